"""
Shift types, the operation plan and the schedule grid.

The subgroup is the scheduling unit. Schedules are value objects: every
change produces a new grid, so a repair can never corrupt its input.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import Iterable, Literal, Mapping, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

ShiftCode = Literal["TD", "TDWE", "SWWE"]
UnitKind  = Literal["subgroup", "group"]

SUBGROUPS: tuple[str, ...] = ("A1", "A2", "B1", "B2", "C1", "C2")
GROUPS: dict[str, tuple[int, int]] = {"A": (0, 1), "B": (2, 3), "C": (4, 5)}
WEEKDAYS: tuple[str, ...] = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")

# (min, max) hours per assignment
SHIFT_DURATIONS: dict[str, tuple[float, float]] = {
    "TD":   (8.0, 9.0),
    "TDWE": (4.0, 4.0),
    "SWWE": (12.0, 12.0),
}
DEFAULT_TD_HOURS = 8.5


def default_duration(code: str) -> float:
    return DEFAULT_TD_HOURS if code == "TD" else SHIFT_DURATIONS[code][0]


def group_of(subgroup: int) -> str:
    return "ABC"[subgroup // 2]


class Position(NamedTuple):
    day:      int
    subgroup: int

    def label(self) -> str:
        return f"d{self.day}/{SUBGROUPS[self.subgroup]}"


@dataclass(frozen=True, slots=True)
class ShiftAssignment:
    code:     str
    duration: float

    def __post_init__(self) -> None:
        if self.code not in SHIFT_DURATIONS:
            raise ValueError(f"unknown shift code {self.code!r}")
        lo, hi = SHIFT_DURATIONS[self.code]
        if not lo <= self.duration <= hi:
            raise ValueError(f"{self.code} duration {self.duration} outside [{lo}, {hi}]")

    def cell(self) -> str:
        # repr is the shortest text that parses back to the same float
        hours = repr(float(self.duration))
        return f"{self.code}:{hours.removesuffix('.0')}"


# ── Operation plan ────────────────────────────────────────────────────────────

class Requirement(BaseModel):
    model_config = ConfigDict(frozen=True)

    shift: ShiftCode
    unit:  UnitKind = "subgroup"
    count: int = Field(..., ge=1)

    @property
    def subgroups_needed(self) -> int:
        return self.count * (2 if self.unit == "group" else 1)


class PlanDay(BaseModel):
    model_config = ConfigDict(frozen=True)

    weekday:      int = Field(..., ge=0, le=6)
    week:         int = Field(..., ge=0)
    maintenance:  bool = False
    requirements: tuple[Requirement, ...] = ()

    def required(self, code: str) -> Optional[Requirement]:
        for r in self.requirements:
            if r.shift == code:
                return r
        return None

    @property
    def label(self) -> str:
        return f"{WEEKDAYS[self.weekday]}{self.week + 1}"


class OperationPlan(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:                 str = "reference"
    days:                 tuple[PlanDay, ...]
    nominal_weekly_hours: float = 38.5     # metadata; the hard check uses the fair share
    hour_tolerance:       float = Field(1.5, ge=0.0)

    @model_validator(mode="after")
    def _check_capacity(self) -> "OperationPlan":
        n = len(SUBGROUPS)
        maintenance_days = 0
        for i, day in enumerate(self.days):
            codes = [r.shift for r in day.requirements]
            if len(set(codes)) != len(codes):
                raise ValueError(f"day {i}: one requirement per shift type")
            if sum(r.subgroups_needed for r in day.requirements) > n:
                raise ValueError(f"day {i}: requirements exceed {n} subgroups")
            if sum(r.count for r in day.requirements if r.unit == "group") > len(GROUPS):
                raise ValueError(f"day {i}: more groups required than exist")
            if day.maintenance:
                maintenance_days += 1
                if day.weekday != 5:
                    raise ValueError(f"day {i}: maintenance day must be a Saturday")
        if maintenance_days > 1:
            raise ValueError("at most one maintenance Saturday per cycle")
        return self

    @property
    def cycle_days(self) -> int:
        return len(self.days)

    @property
    def weeks(self) -> int:
        return max((d.week for d in self.days), default=-1) + 1

    def days_in_week(self, week: int) -> list[int]:
        return [i for i, d in enumerate(self.days) if d.week == week]

    def weekends(self) -> list[tuple[int, ...]]:
        """Saturday/Sunday day indices per week that has both."""
        out: list[tuple[int, ...]] = []
        for w in range(self.weeks):
            wk = [i for i in self.days_in_week(w) if self.days[i].weekday >= 5]
            if len(wk) == 2:
                out.append(tuple(wk))
        return out

    @property
    def required_hours(self) -> float:
        return sum(r.subgroups_needed * default_duration(r.shift) for d in self.days for r in d.requirements)

    @property
    def fair_share(self) -> float:
        return self.required_hours / len(SUBGROUPS)


# ── Schedule ──────────────────────────────────────────────────────────────────

Cell = Optional[ShiftAssignment]


@dataclass(frozen=True)
class Schedule:
    """Grid of days × subgroups; `cells[day][subgroup]`."""
    cells: tuple[tuple[Cell, ...], ...]

    @classmethod
    def empty(cls, days: int) -> "Schedule":
        return cls(cells=tuple((None,) * len(SUBGROUPS) for _ in range(days)))

    @property
    def days(self) -> int:
        return len(self.cells)

    def get(self, pos: Position) -> Cell:
        return self.cells[pos.day][pos.subgroup]

    def with_changes(self, changes: Mapping[Position, Cell]) -> "Schedule":
        if not changes:
            return self
        rows = [list(r) for r in self.cells]
        for pos, cell in changes.items():
            rows[pos.day][pos.subgroup] = cell
        return Schedule(cells=tuple(tuple(r) for r in rows))

    def positions(self) -> Iterable[Position]:
        for d in range(self.days):
            for s in range(len(SUBGROUPS)):
                yield Position(d, s)

    def hours(self, subgroup: int, days: Optional[Iterable[int]] = None) -> float:
        rng = range(self.days) if days is None else days
        total = 0.0
        for d in rng:
            cell = self.cells[d][subgroup]
            if cell is not None:
                total += cell.duration
        return total

    def working(self, day: int, code: Optional[str] = None) -> list[int]:
        return [
            s for s, cell in enumerate(self.cells[day])
            if cell is not None and (code is None or cell.code == code)
        ]


@dataclass(frozen=True)
class HardViolation:
    kind:     Literal["dimension", "coverage", "group", "duration", "hours"]
    message:  str
    day:      Optional[int] = None
    subgroup: Optional[int] = None

