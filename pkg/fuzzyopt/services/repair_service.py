"""
Repair operators for shift schedules.

Every operator is a double swap: one subgroup's assignment moves to another
day and a partner subgroup moves the opposite way, so per-day counts and group
structure are preserved. A move is only taken if the affected subgroups stay
within the hour tolerance. When nothing fits the operator raises
NoFeasibleSwap, which callers treat as a no-op.
"""
from __future__ import annotations
import logging
import random
from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Mapping, Optional

from fuzzyopt.errors import NoFeasibleSwap
from fuzzyopt.models.optimizer import RepairResult
from fuzzyopt.models.schedule import GROUPS, Cell, OperationPlan, Position, Schedule
from fuzzyopt.services.shift_service import days_of, hours_ok

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Move:
    op:      str
    changes: Mapping[Position, Cell]

    @property
    def changed(self) -> frozenset[Position]:
        return frozenset(self.changes)

    @property
    def key(self) -> tuple:
        return (self.op, tuple(sorted(self.changes)))


def _works(s: Schedule, day: int, sg: int, code: str) -> bool:
    cell = s.cells[day][sg]
    return cell is not None and cell.code == code


def _double_swaps(s: Schedule, op: str, days: list[int], code: str) -> list[Move]:
    """All (a works X, free Y) × (b works Y, free X) exchanges over the given days."""
    moves: list[Move] = []
    n = len(s.cells[0]) if s.cells else 0
    for i, x in enumerate(days):
        for y in days[i + 1:]:
            for a in range(n):
                if not (_works(s, x, a, code) and s.cells[y][a] is None):
                    continue
                for b in range(n):
                    if not (_works(s, y, b, code) and s.cells[x][b] is None):
                        continue
                    moves.append(Move(op, {
                        Position(x, a): None,
                        Position(y, a): s.cells[y][b],
                        Position(y, b): None,
                        Position(x, b): s.cells[x][a],
                    }))
    return moves


# ── Move enumeration ──────────────────────────────────────────────────────────

def mon_wed_moves(s: Schedule, plan: OperationPlan) -> list[Move]:
    return _double_swaps(s, "mon_wed", days_of(plan, "mon_wed"), "TD")


def weekend_td_moves(s: Schedule, plan: OperationPlan) -> list[Move]:
    days = [d for d in days_of(plan, "weekend") if plan.days[d].required("TDWE")]
    return _double_swaps(s, "weekend_td", days, "TDWE")


def weekend_sw_moves(s: Schedule, plan: OperationPlan) -> list[Move]:
    # the maintenance Saturday carries no SWWE requirement, so it never appears here
    days = [d for d in days_of(plan, "weekend") if plan.days[d].required("SWWE")]
    return _double_swaps(s, "weekend_sw", days, "SWWE")


def mon_wed_to_thu_fri_moves(s: Schedule, plan: OperationPlan) -> list[Move]:
    """A free group G takes over Thu/Fri day Y from working group H.

    G's halves each hand one Mon–Wed TD (days X and Z) to a half of H that is
    free there; the whole exchange is two double swaps sharing day Y.
    """
    mon_wed = days_of(plan, "mon_wed")
    moves: dict[tuple, Move] = {}
    for y in days_of(plan, "thu_fri"):
        for g_pair in GROUPS.values():
            if any(s.cells[y][g] is not None for g in g_pair):
                continue
            for h_pair in GROUPS.values():
                if not all(_works(s, y, h, "TD") for h in h_pair):
                    continue
                g0, g1 = g_pair
                for h0, h1 in permutations(h_pair):
                    for x in mon_wed:
                        if not (_works(s, x, g0, "TD") and s.cells[x][h0] is None):
                            continue
                        for z in mon_wed:
                            if not (_works(s, z, g1, "TD") and s.cells[z][h1] is None):
                                continue
                            changes = {
                                Position(x, g0): None,
                                Position(x, h0): s.cells[x][g0],
                                Position(z, g1): None,
                                Position(z, h1): s.cells[z][g1],
                                Position(y, g0): s.cells[y][h0],
                                Position(y, g1): s.cells[y][h1],
                                Position(y, h0): None,
                                Position(y, h1): None,
                            }
                            # distinct (x, z, pairing) choices can land on the same grid
                            sig = tuple(sorted(changes.items(), key=lambda kv: kv[0]))
                            moves.setdefault(sig, Move("mon_wed_to_thu_fri", changes))
    return list(moves.values())


# ── Repair operators ──────────────────────────────────────────────────────────

def _first_feasible(
    s: Schedule,
    plan: OperationPlan,
    moves: list[Move],
    pos: Position,
    rng: random.Random,
    start: Optional[int],
) -> RepairResult:
    touching = [m for m in moves if pos in m.changes]
    if not touching:
        raise NoFeasibleSwap(f"no move touches {pos.label()}")
    offset = rng.randrange(len(touching)) if start is None else start % len(touching)
    for i in range(len(touching)):
        move = touching[(offset + i) % len(touching)]
        candidate = s.with_changes(move.changes)
        if hours_ok(candidate, plan, {p.subgroup for p in move.changes}):
            return RepairResult(instance=candidate, changed=move.changed, key=move.key)
    log.debug("%d moves at %s rejected on hours", len(touching), pos.label())
    raise NoFeasibleSwap(f"every move at {pos.label()} breaks the hour tolerance")


def repair_mon_wed(
    s: Schedule, plan: OperationPlan, pos: Position, rng: random.Random,
    start: Optional[int] = None, moves: Optional[list[Move]] = None,
) -> RepairResult:
    return _first_feasible(s, plan, mon_wed_moves(s, plan) if moves is None else moves, pos, rng, start)


def repair_mon_wed_to_thu_fri(
    s: Schedule, plan: OperationPlan, pos: Position, rng: random.Random,
    start: Optional[int] = None, moves: Optional[list[Move]] = None,
) -> RepairResult:
    return _first_feasible(s, plan, mon_wed_to_thu_fri_moves(s, plan) if moves is None else moves, pos, rng, start)


def repair_weekend_td(
    s: Schedule, plan: OperationPlan, pos: Position, rng: random.Random,
    start: Optional[int] = None, moves: Optional[list[Move]] = None,
) -> RepairResult:
    return _first_feasible(s, plan, weekend_td_moves(s, plan) if moves is None else moves, pos, rng, start)


def repair_weekend_sw(
    s: Schedule, plan: OperationPlan, pos: Position, rng: random.Random,
    start: Optional[int] = None, moves: Optional[list[Move]] = None,
) -> RepairResult:
    return _first_feasible(s, plan, weekend_sw_moves(s, plan) if moves is None else moves, pos, rng, start)


RepairFn = Callable[..., RepairResult]

REPAIRS: dict[str, RepairFn] = {
    "mon_wed":            repair_mon_wed,
    "mon_wed_to_thu_fri": repair_mon_wed_to_thu_fri,
    "weekend_td":         repair_weekend_td,
    "weekend_sw":         repair_weekend_sw,
}

MOVES: dict[str, Callable[[Schedule, OperationPlan], list[Move]]] = {
    "mon_wed":            mon_wed_moves,
    "mon_wed_to_thu_fri": mon_wed_to_thu_fri_moves,
    "weekend_td":         weekend_td_moves,
    "weekend_sw":         weekend_sw_moves,
}

# constraint type → repair operators able to change its value
REPAIRS_FOR: dict[str, tuple[str, ...]] = {
    "even_distribution": ("mon_wed", "mon_wed_to_thu_fri", "weekend_td", "weekend_sw"),
    "free_weekends":     ("weekend_td", "weekend_sw"),
    "consecutive_days":  ("mon_wed", "mon_wed_to_thu_fri"),
}
