"""
Domain adapters: the one surface the optimizer sees. Each domain names its
repair operators, maps violated constraint types to them, and knows how to
evaluate, splice and sample its instances.
"""
from __future__ import annotations
import logging
import random
from typing import Any, Hashable, Mapping, Optional, Protocol, Sequence

from fuzzyopt.errors import NoFeasibleSwap
from fuzzyopt.models.dynamic import KnowledgeBase, ViolationRecord
from fuzzyopt.models.optimizer import RepairResult
from fuzzyopt.models.queens import QueensBoard
from fuzzyopt.models.schedule import SUBGROUPS, OperationPlan, Position, Schedule
from fuzzyopt.services.evaluation_service import build_tree
from fuzzyopt.services.queens_service import QUEENS_CONSTRAINT, QUEENS_REPAIRS, QueensEvaluator
from fuzzyopt.services.repair_service import MOVES, REPAIRS, REPAIRS_FOR, Move
from fuzzyopt.services.shift_service import ShiftView, reference_knowledge_base, repair_to_feasibility, validate_hard

log = logging.getLogger(__name__)


class Evaluator(Protocol):
    recomputed_leaves: int

    @property
    def root_score(self) -> float: ...

    @property
    def valid(self) -> bool: ...

    def fork(self) -> "Evaluator": ...

    def invalidate_and_reevaluate(self, inst: Any, changed: Any) -> tuple[float, list[ViolationRecord]]: ...

    def violations(self) -> list[ViolationRecord]: ...

    def snapshot_bindings(self) -> list[tuple[str, str, float]]: ...


class Domain(Protocol):
    name: str

    @property
    def repairs(self) -> Sequence[str]: ...

    @property
    def repairs_for(self) -> Mapping[str, Sequence[str]]: ...

    def apply_repair(self, op: str, inst: Any, pos: Hashable, rng: random.Random, start: Optional[int] = None) -> Optional[RepairResult]: ...

    def positions_for(self, record: ViolationRecord) -> list[Hashable]: ...

    def random_position(self, inst: Any, rng: random.Random) -> Hashable: ...

    def is_feasible(self, inst: Any) -> bool: ...

    def build_evaluator(self, inst: Any) -> Evaluator: ...

    def crossover(self, a: Any, b: Any, rng: random.Random) -> Any: ...


# ── Shift scheduling ──────────────────────────────────────────────────────────

class ShiftDomain:
    name = "shift"

    def __init__(
        self,
        plan: OperationPlan,
        kb: Optional[KnowledgeBase] = None,
        violation_threshold: Optional[float] = None,
        max_feasibility_attempts: Optional[int] = None,
    ) -> None:
        self.plan = plan
        self.kb = kb or reference_knowledge_base(plan)
        self.view = ShiftView(plan)
        self.violation_threshold = violation_threshold
        self.max_feasibility_attempts = max_feasibility_attempts
        self._moves: dict[str, tuple[Schedule, list[Move]]] = {}

    @property
    def repairs(self) -> Sequence[str]:
        return tuple(REPAIRS)

    @property
    def repairs_for(self) -> Mapping[str, Sequence[str]]:
        return REPAIRS_FOR

    def _moves_for(self, op: str, s: Schedule) -> list[Move]:
        cached = self._moves.get(op)
        if cached is not None and cached[0] is s:
            return cached[1]
        moves = MOVES[op](s, self.plan)
        self._moves[op] = (s, moves)
        return moves

    def apply_repair(self, op: str, inst: Schedule, pos: Position, rng: random.Random, start: Optional[int] = None) -> Optional[RepairResult]:
        try:
            return REPAIRS[op](inst, self.plan, pos, rng, start, self._moves_for(op, inst))
        except NoFeasibleSwap as exc:
            log.debug("%s no-op: %s", op, exc)
            return None

    def positions_for(self, record: ViolationRecord) -> list[Hashable]:
        return list(record.positions)

    def random_position(self, inst: Schedule, rng: random.Random) -> Position:
        return Position(rng.randrange(inst.days), rng.randrange(len(SUBGROUPS)))

    def is_feasible(self, inst: Schedule) -> bool:
        return not validate_hard(inst, self.plan)

    def build_evaluator(self, inst: Schedule):
        return build_tree(self.kb, self.view, inst, self.violation_threshold)

    def crossover(self, a: Schedule, b: Schedule, rng: random.Random) -> Schedule:
        """Days before a random week boundary from `a`, the rest from `b`, then hours repair."""
        cuts = [self.plan.days_in_week(w)[0] for w in range(1, self.plan.weeks)]
        if not cuts:
            return a
        c = rng.choice(cuts)
        child = Schedule(cells=a.cells[:c] + b.cells[c:])
        return repair_to_feasibility(child, self.plan, rng, self.max_feasibility_attempts)


# ── N-queens ──────────────────────────────────────────────────────────────────

class QueensDomain:
    name = "queens"

    def __init__(self, n: int) -> None:
        if n < 1:
            raise ValueError("n must be at least 1")
        self.n = n

    @property
    def repairs(self) -> Sequence[str]:
        return tuple(QUEENS_REPAIRS)

    @property
    def repairs_for(self) -> Mapping[str, Sequence[str]]:
        # random_row only serves as the fallback perturbation
        return {QUEENS_CONSTRAINT: ("min_conflicts",)}

    def apply_repair(self, op: str, inst: QueensBoard, pos: int, rng: random.Random, start: Optional[int] = None) -> Optional[RepairResult]:
        try:
            return QUEENS_REPAIRS[op](inst, pos, rng, start)
        except NoFeasibleSwap:
            return None

    def positions_for(self, record: ViolationRecord) -> list[Hashable]:
        return list(record.positions)

    def random_position(self, inst: QueensBoard, rng: random.Random) -> int:
        return rng.randrange(inst.n)

    def is_feasible(self, inst: QueensBoard) -> bool:
        return inst.n == self.n

    def build_evaluator(self, inst: QueensBoard) -> QueensEvaluator:
        return QueensEvaluator(inst)

    def crossover(self, a: QueensBoard, b: QueensBoard, rng: random.Random) -> QueensBoard:
        if a.n < 2:
            return a
        c = rng.randrange(1, a.n)
        return QueensBoard(a.rows[:c] + b.rows[c:])
