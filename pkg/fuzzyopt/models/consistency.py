"""
Configurations, instantiation snapshots, reference
ranking pairs and the named pair databases that hold them.
"""
from __future__ import annotations
import hashlib
import json
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field

from fuzzyopt.models.dynamic import KnowledgeBase, TemplateConstraint
from fuzzyopt.models.fuzzy import OperatorSet


def _strip_comments(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _strip_comments(v) for k, v in obj.items() if k != "comment"}
    if isinstance(obj, list):
        return [_strip_comments(v) for v in obj]
    return obj


class Configuration(BaseModel):
    """Everything that decides a score: operators, importances, ramps and structure."""
    model_config = ConfigDict(frozen=True)

    operator_set: OperatorSet = OperatorSet()
    templates:    tuple[TemplateConstraint, ...]

    @classmethod
    def from_kb(cls, kb: KnowledgeBase) -> "Configuration":
        return cls(operator_set=kb.operator_set, templates=kb.templates)

    def template(self, name: str) -> Optional[TemplateConstraint]:
        for t in self.templates:
            if t.name == name:
                return t
        return None

    @property
    def digest(self) -> str:
        canonical = json.dumps(_strip_comments(self.model_dump(mode="json")), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ConfigDelta(BaseModel):
    model_config = ConfigDict(frozen=True)

    operator_set: Optional[OperatorSet] = None
    importances:  dict[str, float] = Field(default_factory=dict)
    ramp_widths:  dict[str, float] = Field(default_factory=dict)


class Binding(BaseModel):
    model_config = ConfigDict(frozen=True)

    constraint: str
    key:        str
    value:      float


class InstantiationSnapshot(BaseModel):
    """Bindings of every generated constraint, enough to re-score under another configuration."""
    model_config = ConfigDict(frozen=True)

    label:    str = ""
    bindings: tuple[Binding, ...]
    schedule: Optional[str] = None    # CSV grid, used to regenerate bindings for new constraints
    score:    float
    digest:   str                     # configuration the score was computed under


class ReferenceRankingPair(BaseModel):
    model_config = ConfigDict(frozen=True)

    id:         str
    first:      InstantiationSnapshot   # ranked better
    second:     InstantiationSnapshot
    digest:     str
    created_at: str


class ReferencePairDB(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:          str
    configuration: Configuration
    pairs:         tuple[ReferenceRankingPair, ...] = ()
    next_id:       int = 1


class PairStore(BaseModel):
    databases: dict[str, ReferencePairDB] = Field(default_factory=dict)


# ── Reports ───────────────────────────────────────────────────────────────────

class PairInversion(BaseModel):
    pair_id:    str
    old_first:  float
    old_second: float
    new_first:  float
    new_second: float


class ConsistencyReport(BaseModel):
    consistent: bool
    inversions: list[PairInversion] = Field(default_factory=list)


class ConstraintDelta(BaseModel):
    constraint:     str
    old_score:      float
    new_score:      float
    old_importance: float
    new_importance: float


class RankChange(BaseModel):
    label:    str
    old_rank: int
    new_rank: int
    deltas:   list[ConstraintDelta]


class WhatIfReport(BaseModel):
    consistency: ConsistencyReport
    old_digest:  str
    new_digest:  str
    old_ranking: list[tuple[str, float]]
    new_ranking: list[tuple[str, float]]
    changes:     list[RankChange]
