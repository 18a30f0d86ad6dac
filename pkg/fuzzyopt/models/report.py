"""
What each command prints on stdout.
"""
from __future__ import annotations
from typing import Optional

from pydantic import BaseModel, Field


class ViolationOut(BaseModel):
    constraint:     str
    key:            str
    score:          float
    weighted_score: float
    positions:      list[str] = Field(default_factory=list)


class HardViolationOut(BaseModel):
    kind:     str
    message:  str
    day:      Optional[int] = None
    subgroup: Optional[str] = None


class EvaluationReport(BaseModel):
    score:           float
    valid:           bool
    leaves:          int
    hard_violations: list[HardViolationOut] = Field(default_factory=list)
    violations:      list[ViolationOut]     = Field(default_factory=list)


class RunSummary(BaseModel):
    algorithm:            str
    seed:                 int
    initial_score:        float
    best_score:           float
    evaluations:          int
    no_ops:               int = 0
    infeasible_offspring: int = 0
    tabu_rejections:      int = 0
    schedule:             Optional[str] = None   # CSV, only when no output file was given


class QueensSummary(BaseModel):
    n:           int
    algorithm:   str
    seed:        int
    conflicts:   int
    best_score:  float
    evaluations: int
    rows:        list[int]


class AdoptionOutcome(BaseModel):
    adopted: bool
    db:      str
    pair_id: Optional[str] = None
    digest:  Optional[str] = None
    reason:  Optional[str] = None
