"""
N-queens board: one queen per column, `rows[col]` is its row.
"""
from __future__ import annotations
from dataclasses import dataclass


@dataclass(frozen=True)
class QueensBoard:
    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.rows)
        if n == 0:
            raise ValueError("board needs at least one column")
        for col, row in enumerate(self.rows):
            if not 0 <= row < n:
                raise ValueError(f"column {col}: row {row} outside 0..{n - 1}")

    @property
    def n(self) -> int:
        return len(self.rows)

    def with_row(self, col: int, row: int) -> "QueensBoard":
        rows = list(self.rows)
        rows[col] = row
        return QueensBoard(tuple(rows))
