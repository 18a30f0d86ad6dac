"""
Run configuration, repair results and run results.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Hashable, Literal

from pydantic import BaseModel, ConfigDict, Field

from fuzzyopt.config import get_settings

Algorithm = Literal["deepening1", "tabu", "random_hill", "genetic"]


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    algorithm:           Algorithm = "deepening1"
    seed:                int = 42
    max_evaluations:     int = Field(2000, ge=1)
    tries_per_step:      int = Field(10, ge=1)
    worst_k:             int = Field(3, ge=1)
    tabu_tenure:         int = Field(7, ge=0)
    population_size:     int = Field(8, ge=1)
    crossover_rate:      float = Field(0.7, ge=0.0, le=1.0)
    mutation_rate:       float = Field(0.3, ge=0.0, le=1.0)
    violation_threshold: float = Field(0.9, ge=0.0, le=1.0)
    max_attempts:        int = Field(50, ge=1)      # bounded fallbacks and feasibility repairs

    @classmethod
    def from_settings(cls, **overrides: Any) -> "OptimizerConfig":
        """Defaults from Settings; explicit keyword overrides win, None is ignored."""
        s = get_settings()
        values: dict[str, Any] = {
            "seed":                s.default_seed,
            "max_evaluations":     s.max_evaluations,
            "tries_per_step":      s.tries_per_step,
            "worst_k":             s.worst_k,
            "tabu_tenure":         s.tabu_tenure,
            "population_size":     s.population_size,
            "crossover_rate":      s.crossover_rate,
            "mutation_rate":       s.mutation_rate,
            "violation_threshold": s.violation_threshold,
            "max_attempts":        s.max_feasibility_attempts,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass(frozen=True)
class RepairResult:
    """A repaired instance, the positions it touched and a key naming the move."""
    instance: Any
    changed:  frozenset[Hashable]
    key:      tuple


@dataclass(frozen=True)
class TracePoint:
    eval_index: int
    current:    float
    best:       float


@dataclass
class RunResult:
    algorithm:   str
    best:        Any
    best_score:  float
    evaluations: int
    trace:       list[TracePoint] = field(default_factory=list)
    no_ops:      int = 0
    infeasible_offspring: int = 0
    tabu_rejections:      int = 0
    perturbations:        list[int] = field(default_factory=list)   # eval indices of random kicks

    @property
    def initial_score(self) -> float:
        return self.trace[0].current if self.trace else self.best_score


class BenchSpec(BaseModel):
    """Batches of one or more algorithms, all started from the same initial solution."""
    model_config = ConfigDict(frozen=True)

    algorithms:      tuple[Algorithm, ...] = ("deepening1",)
    batches:         int = Field(4, ge=1)
    seeds:           tuple[int, ...] = ()         # one per batch; empty = base seed + batch index
    base_seed:       int = 1
    initial_seed:    int = 42
    max_evaluations: int = Field(2000, ge=1)
    out:             str = "bench"

    def seed_for(self, batch: int) -> int:
        return self.seeds[batch] if batch < len(self.seeds) else self.base_seed + batch


@dataclass(frozen=True)
class BatchSummary:
    batch:         int
    algorithm:     str
    seed:          int
    initial_score: float
    best_score:    float
    evaluations:   int
    wall_seconds:  float
