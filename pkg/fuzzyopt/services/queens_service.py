"""
N-queens: conflict counting, min-conflicts repair and a counter-based
evaluator that updates in O(1) per moved queen.
"""
from __future__ import annotations
import logging
import random
from typing import Iterable, Optional

from fuzzyopt.errors import NoFeasibleSwap, UnknownPosition
from fuzzyopt.models.dynamic import ViolationRecord
from fuzzyopt.models.optimizer import RepairResult
from fuzzyopt.models.queens import QueensBoard

log = logging.getLogger(__name__)

QUEENS_CONSTRAINT = "queens"


# ── Conflict counting ─────────────────────────────────────────────────────────

class _Counts:
    """Queens per row and per diagonal."""

    def __init__(self, b: QueensBoard) -> None:
        n = b.n
        self.n = n
        self.row = [0] * n
        self.diag = [0] * (2 * n - 1)      # row - col + n - 1
        self.anti = [0] * (2 * n - 1)      # row + col
        for col, r in enumerate(b.rows):
            self.add(col, r, 1)

    def add(self, col: int, row: int, delta: int) -> None:
        self.row[row] += delta
        self.diag[row - col + self.n - 1] += delta
        self.anti[row + col] += delta

    def on_lines(self, col: int, row: int) -> int:
        """Queens sharing a row or diagonal with (col, row); one standing there counts three times."""
        return self.row[row] + self.diag[row - col + self.n - 1] + self.anti[row + col]

    def attacks(self, col: int, row: int) -> int:
        return self.on_lines(col, row) - 3

    def pairs(self) -> int:
        return sum(k * (k - 1) // 2 for line in (self.row, self.diag, self.anti) for k in line)


def queens_conflicts(b: QueensBoard) -> int:
    """Number of attacking pairs."""
    return _Counts(b).pairs()


def queens_repair(b: QueensBoard, col: int) -> QueensBoard:
    """Move the queen in `col` to the row with fewest attackers; ties go to the lowest row."""
    if not 0 <= col < b.n:
        raise UnknownPosition(f"column {col} outside 0..{b.n - 1}")
    counts = _Counts(b)
    counts.add(col, b.rows[col], -1)
    best = min(range(b.n), key=lambda r: (counts.on_lines(col, r), r))
    return b.with_row(col, best)


def random_board(n: int, rng: random.Random) -> QueensBoard:
    rows = list(range(n))
    rng.shuffle(rows)
    return QueensBoard(tuple(rows))


# ── Repair operators ──────────────────────────────────────────────────────────

def repair_min_conflicts(b: QueensBoard, col: int, rng: random.Random, start: Optional[int] = None) -> RepairResult:
    moved = queens_repair(b, col)
    if moved == b:
        raise NoFeasibleSwap(f"column {col} already sits on its best row")
    return RepairResult(instance=moved, changed=frozenset({col}), key=("min_conflicts", col, moved.rows[col]))


def repair_random_row(b: QueensBoard, col: int, rng: random.Random, start: Optional[int] = None) -> RepairResult:
    if b.n < 2:
        raise NoFeasibleSwap("a single queen has nowhere to go")
    row = rng.randrange(b.n - 1)
    if row >= b.rows[col]:
        row += 1
    return RepairResult(instance=b.with_row(col, row), changed=frozenset({col}), key=("random_row", col, row))


QUEENS_REPAIRS = {
    "min_conflicts": repair_min_conflicts,
    "random_row":    repair_random_row,
}


# ── Evaluator ─────────────────────────────────────────────────────────────────

class QueensEvaluator:
    """Score 1 / (1 + attacking pairs); one violation per attacked column."""

    def __init__(self, b: QueensBoard) -> None:
        self.board = b
        self._counts = _Counts(b)
        self._pairs = self._counts.pairs()
        self.recomputed_leaves = b.n

    @property
    def root_score(self) -> float:
        return 1.0 / (1.0 + self._pairs)

    @property
    def conflicts(self) -> int:
        return self._pairs

    @property
    def valid(self) -> bool:
        return True

    def fork(self) -> "QueensEvaluator":
        twin = object.__new__(QueensEvaluator)
        twin.board = self.board
        twin._counts = object.__new__(_Counts)
        twin._counts.n = self._counts.n
        twin._counts.row = list(self._counts.row)
        twin._counts.diag = list(self._counts.diag)
        twin._counts.anti = list(self._counts.anti)
        twin._pairs = self._pairs
        twin.recomputed_leaves = self.recomputed_leaves
        return twin

    def invalidate_and_reevaluate(self, b: QueensBoard, changed: Iterable[int]) -> tuple[float, list[ViolationRecord]]:
        cols = set(changed)
        bad = [c for c in cols if not 0 <= c < self.board.n]
        if bad:
            raise UnknownPosition(f"unknown columns {sorted(bad)}")
        c = self._counts
        for col in sorted(cols):
            old, new = self.board.rows[col], b.rows[col]
            if old == new:
                continue
            c.add(col, old, -1)
            self._pairs -= c.on_lines(col, old)
            self._pairs += c.on_lines(col, new)
            c.add(col, new, 1)
            self.recomputed_leaves += 1
        self.board = b
        return self.root_score, self.violations()

    def violations(self) -> list[ViolationRecord]:
        out: list[ViolationRecord] = []
        for col, row in enumerate(self.board.rows):
            k = self._counts.attacks(col, row)
            if k > 0:
                score = 1.0 / (1.0 + k)
                out.append(ViolationRecord(
                    weighted_score=score, constraint=QUEENS_CONSTRAINT, positions=(col,), score=score, key=(str(col),),
                ))
        out.sort()
        return out

    def snapshot_bindings(self) -> list[tuple[str, str, float]]:
        return [
            (QUEENS_CONSTRAINT, str(col), float(self._counts.attacks(col, row)))
            for col, row in enumerate(self.board.rows)
        ]
