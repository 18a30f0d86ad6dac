"""
JSON for structured knowledge, CSV for grids and curves.

  knowledge base / plan / configuration / pair store   pydantic JSON
  schedule        one row per plan day, one column per subgroup, cells "CODE:hours"
  trace           eval_index,current,best
"""
from __future__ import annotations
import csv
import io
import json
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, TypeVar

from pydantic import BaseModel

from fuzzyopt.errors import FuzzyOptError
from fuzzyopt.models.consistency import ConfigDelta, PairStore
from fuzzyopt.models.dynamic import KnowledgeBase
from fuzzyopt.models.optimizer import TracePoint
from fuzzyopt.models.queens import QueensBoard
from fuzzyopt.models.schedule import SUBGROUPS, OperationPlan, Schedule, ShiftAssignment, default_duration

log = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)

_NULL_CELLS = {"", "-", "off"}


class FormatError(FuzzyOptError, ValueError):
    """A file parsed but does not have the expected shape; message carries file and row."""


# ── JSON models ───────────────────────────────────────────────────────────────

def read_model(path: str | Path, model: type[M]) -> M:
    text = Path(path).read_text(encoding="utf-8")
    return model.model_validate_json(text)


def write_model(path: str | Path, obj: BaseModel) -> None:
    Path(path).write_text(obj.model_dump_json(indent=2), encoding="utf-8")
    log.debug("Wrote %s to %s", type(obj).__name__, path)


def load_kb(path: str | Path) -> KnowledgeBase:
    return read_model(path, KnowledgeBase)


def load_plan(path: str | Path) -> OperationPlan:
    return read_model(path, OperationPlan)


def load_delta(path: str | Path) -> ConfigDelta:
    return read_model(path, ConfigDelta)


def load_pair_store(path: str | Path) -> PairStore:
    p = Path(path)
    if not p.exists():
        log.info("Pair store %s not found, starting empty", p)
        return PairStore()
    return read_model(p, PairStore)


def save_pair_store(path: str | Path, store: PairStore) -> None:
    write_model(path, store)


# ── Schedule CSV ──────────────────────────────────────────────────────────────

def _parse_cell(raw: str, where: str) -> Optional[ShiftAssignment]:
    text = raw.strip()
    if text.lower() in _NULL_CELLS:
        return None
    code, sep, hours = text.partition(":")
    try:
        return ShiftAssignment(code.strip().upper(), float(hours) if sep else _default_hours(code))
    except ValueError as exc:
        raise FormatError(f"{where}: bad cell {raw!r} ({exc})") from exc


def _default_hours(code: str) -> float:
    return default_duration(code.strip().upper())


def schedule_to_csv(s: Schedule, plan: Optional[OperationPlan] = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["day", *SUBGROUPS])
    for d, row in enumerate(s.cells):
        label = plan.days[d].label if plan is not None and d < plan.cycle_days else f"d{d}"
        w.writerow([label, *("" if c is None else c.cell() for c in row)])
    return buf.getvalue()


def schedule_from_csv(text: str, plan: Optional[OperationPlan] = None, source: str = "<schedule>") -> Schedule:
    rows = [r for r in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in r)]
    if not rows:
        raise FormatError(f"{source}: empty schedule")
    header = [h.strip() for h in rows[0]]
    if tuple(header[1:]) != SUBGROUPS:
        raise FormatError(f"{source}: header must be day,{','.join(SUBGROUPS)}")
    cells = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(SUBGROUPS) + 1:
            raise FormatError(f"{source}:{i}: expected {len(SUBGROUPS) + 1} columns, got {len(row)}")
        cells.append(tuple(_parse_cell(c, f"{source}:{i}") for c in row[1:]))
    if plan is not None and len(cells) != plan.cycle_days:
        raise FormatError(f"{source}: {len(cells)} days, plan {plan.name!r} has {plan.cycle_days}")
    return Schedule(cells=tuple(cells))


def read_schedule(path: str | Path, plan: Optional[OperationPlan] = None) -> Schedule:
    return schedule_from_csv(Path(path).read_text(encoding="utf-8"), plan, source=str(path))


def write_schedule(path: str | Path, s: Schedule, plan: Optional[OperationPlan] = None) -> None:
    Path(path).write_text(schedule_to_csv(s, plan), encoding="utf-8")


# ── Trace CSV ─────────────────────────────────────────────────────────────────

def trace_to_csv(trace: Iterable[TracePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eval_index", "current", "best"])
    for p in trace:
        w.writerow([p.eval_index, repr(float(p.current)), repr(float(p.best))])
    return buf.getvalue()


def trace_from_csv(text: str) -> list[TracePoint]:
    reader = csv.DictReader(io.StringIO(text))
    return [TracePoint(int(r["eval_index"]), float(r["current"]), float(r["best"])) for r in reader]


def write_trace(path: str | Path, trace: Sequence[TracePoint]) -> None:
    Path(path).write_text(trace_to_csv(trace), encoding="utf-8")


# ── Queens ────────────────────────────────────────────────────────────────────

def board_to_json(b: QueensBoard) -> str:
    return json.dumps({"n": b.n, "rows": list(b.rows)})


def board_from_json(text: str) -> QueensBoard:
    raw = json.loads(text)
    rows = raw["rows"] if isinstance(raw, dict) else raw
    return QueensBoard(tuple(int(r) for r in rows))
