"""
Command handlers behind the CLI routes.
Responsibility: load inputs, run the service, write the declared payload to
stdout, and turn every failure into a stable exit code:

  0  success / valid / consistent
  1  input error (unreadable or invalid file, bad argument, library error)
  2  hard-invalid schedule, inconsistent configuration or refused adoption
"""
from __future__ import annotations
import csv
import functools
import io
import json
import logging
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Optional, Sequence

from pydantic import BaseModel, ValidationError

from fuzzyopt.config import get_settings
from fuzzyopt.errors import (
    FuzzyOptError,
    IncompatibleStructure,
    InvalidInitial,
    RefusedInconsistent,
    RefusedNotImproving,
)
from fuzzyopt.models.consistency import Binding, Configuration, InstantiationSnapshot, ReferencePairDB
from fuzzyopt.models.dynamic import KnowledgeBase
from fuzzyopt.models.optimizer import BatchSummary, BenchSpec, OptimizerConfig, TracePoint
from fuzzyopt.models.report import (
    AdoptionOutcome,
    EvaluationReport,
    HardViolationOut,
    QueensSummary,
    RunSummary,
    ViolationOut,
)
from fuzzyopt.models.schedule import SUBGROUPS, OperationPlan, Position, Schedule
from fuzzyopt.services import consistency_service
from fuzzyopt.services.domain_service import QueensDomain, ShiftDomain
from fuzzyopt.services.evaluation_service import EvaluationTree, build_tree, validate_knowledge_base
from fuzzyopt.services.optimizer_service import optimize
from fuzzyopt.services.queens_service import queens_conflicts, random_board
from fuzzyopt.services.shift_service import (
    ShiftView,
    default_reference_plan,
    initial_solution,
    reference_knowledge_base,
    validate_hard,
)
from fuzzyopt.utils import io_utils

log = logging.getLogger(__name__)

EXIT_OK, EXIT_INPUT, EXIT_INVALID = 0, 1, 2


def _guarded(fn: Callable[..., int]) -> Callable[..., int]:
    """Map library and file errors to exit code 1; diagnostics go to the log (stderr)."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs) -> int:
        try:
            return fn(*args, **kwargs)
        except InvalidInitial as exc:
            log.error("%s: %s", fn.__name__, exc)
            return EXIT_INVALID
        except (FuzzyOptError, ValidationError, OSError, ValueError, KeyError) as exc:
            log.error("%s: %s", fn.__name__, exc)
            return EXIT_INPUT
    return wrapper


def _emit(payload: BaseModel | dict | list | str) -> None:
    if isinstance(payload, str):
        sys.stdout.write(payload)
        return
    if isinstance(payload, BaseModel):
        sys.stdout.write(payload.model_dump_json(indent=2) + "\n")
        return
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _plan(path: Optional[str]) -> OperationPlan:
    return io_utils.load_plan(path) if path else default_reference_plan()


def _kb(path: Optional[str], plan: OperationPlan) -> KnowledgeBase:
    return io_utils.load_kb(path) if path else reference_knowledge_base(plan)


def _positions(positions: Sequence) -> list[str]:
    return [p.label() if isinstance(p, Position) else str(p) for p in positions]


def evaluation_report(tree: EvaluationTree, plan: OperationPlan, s: Schedule, top_k: Optional[int] = None) -> EvaluationReport:
    k = get_settings().top_k_report if top_k is None else top_k
    hard = validate_hard(s, plan)
    return EvaluationReport(
        score=tree.root_score,
        valid=not hard and tree.valid,
        leaves=len(tree.leaves),
        hard_violations=[
            HardViolationOut(
                kind=h.kind, message=h.message, day=h.day,
                subgroup=None if h.subgroup is None else SUBGROUPS[h.subgroup],
            )
            for h in hard
        ],
        violations=[
            ViolationOut(
                constraint=v.constraint, key="/".join(v.key), score=v.score,
                weighted_score=v.weighted_score, positions=_positions(v.positions),
            )
            for v in tree.violations()[:k]
        ],
    )


# ── evaluate / initial / optimize ─────────────────────────────────────────────

@_guarded
def cmd_evaluate(schedule: str, plan: Optional[str] = None, kb: Optional[str] = None, top_k: Optional[int] = None) -> int:
    p = _plan(plan)
    k = _kb(kb, p)
    s = io_utils.read_schedule(schedule, p)
    tree = build_tree(k, ShiftView(p), s)
    report = evaluation_report(tree, p, s, top_k)
    _emit(report)
    log.info("Evaluated %s: score %.6f, %s", schedule, report.score, "valid" if report.valid else "hard-invalid")
    return EXIT_OK if report.valid else EXIT_INVALID


@_guarded
def cmd_initial(plan: Optional[str] = None, seed: Optional[int] = None, out: Optional[str] = None) -> int:
    p = _plan(plan)
    s = initial_solution(p, seed)
    if out:
        io_utils.write_schedule(out, s, p)
    else:
        _emit(io_utils.schedule_to_csv(s, p))
    return EXIT_OK


@_guarded
def cmd_optimize(
    algorithm: str = "deepening1",
    seed: Optional[int] = None,
    plan: Optional[str] = None,
    kb: Optional[str] = None,
    schedule: Optional[str] = None,
    max_evaluations: Optional[int] = None,
    out: Optional[str] = None,
    trace: Optional[str] = None,
    tries_per_step: Optional[int] = None,
    worst_k: Optional[int] = None,
) -> int:
    p = _plan(plan)
    k = _kb(kb, p)
    cfg = OptimizerConfig.from_settings(
        algorithm=algorithm, seed=seed, max_evaluations=max_evaluations,
        tries_per_step=tries_per_step, worst_k=worst_k,
    )
    domain = ShiftDomain(p, k, cfg.violation_threshold, cfg.max_attempts)
    initial = io_utils.read_schedule(schedule, p) if schedule else initial_solution(p, cfg.seed)

    result = optimize(domain, initial, cfg)

    if out:
        io_utils.write_schedule(out, result.best, p)
    if trace:
        io_utils.write_trace(trace, result.trace)
    _emit(RunSummary(
        algorithm=result.algorithm, seed=cfg.seed,
        initial_score=result.initial_score, best_score=result.best_score,
        evaluations=result.evaluations, no_ops=result.no_ops,
        infeasible_offspring=result.infeasible_offspring,
        tabu_rejections=result.tabu_rejections,
        schedule=None if out else io_utils.schedule_to_csv(result.best, p),
    ))
    return EXIT_OK


# ── bench ─────────────────────────────────────────────────────────────────────

def _run_batch(
    job: tuple[int, str, int, int, OperationPlan, KnowledgeBase, Schedule],
) -> tuple[BatchSummary, list[TracePoint]]:
    """One optimizer run with its own domain and random stream; safe to run in a worker process."""
    batch, algorithm, seed, max_evaluations, plan, kb, initial = job
    cfg = OptimizerConfig.from_settings(algorithm=algorithm, seed=seed, max_evaluations=max_evaluations)
    domain = ShiftDomain(plan, kb, cfg.violation_threshold, cfg.max_attempts)
    t0 = time.perf_counter()
    result = optimize(domain, initial, cfg)
    summary = BatchSummary(
        batch=batch, algorithm=algorithm, seed=seed,
        initial_score=result.initial_score, best_score=result.best_score,
        evaluations=result.evaluations, wall_seconds=round(time.perf_counter() - t0, 3),
    )
    return summary, result.trace


def summary_to_csv(rows: Sequence[BatchSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["batch", "algorithm", "seed", "initial_score", "best_score", "evaluations", "wall_seconds"])
    for r in rows:
        w.writerow([r.batch, r.algorithm, r.seed, repr(float(r.initial_score)), repr(float(r.best_score)), r.evaluations, r.wall_seconds])
    return buf.getvalue()


def run_bench(spec: BenchSpec, plan: OperationPlan, kb: KnowledgeBase, workers: int = 1) -> list[tuple[BatchSummary, list[TracePoint]]]:
    """Every batch of every algorithm starts from the same initial solution."""
    initial = initial_solution(plan, spec.initial_seed)
    jobs = []
    for algorithm in spec.algorithms:
        for b in range(spec.batches):
            jobs.append((len(jobs), algorithm, spec.seed_for(b), spec.max_evaluations, plan, kb, initial))
    log.info("Bench: %d batches, %d worker(s)", len(jobs), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_batch, jobs))
    return [_run_batch(job) for job in jobs]


@_guarded
def cmd_bench(spec: BenchSpec, plan: Optional[str] = None, kb: Optional[str] = None, workers: Optional[int] = None) -> int:
    p = _plan(plan)
    k = _kb(kb, p)
    results = run_bench(spec, p, k, get_settings().bench_workers if workers is None else workers)

    out = Path(spec.out)
    out.mkdir(parents=True, exist_ok=True)
    for summary, trace in results:
        io_utils.write_trace(out / f"batch_{summary.batch}.csv", trace)
    text = summary_to_csv([s for s, _ in results])
    (out / "summary.csv").write_text(text, encoding="utf-8")
    _emit(text)
    return EXIT_OK


# ── check-config ──────────────────────────────────────────────────────────────

def _with_config(kb: KnowledgeBase, config: Configuration) -> KnowledgeBase:
    return kb.model_copy(update={"operator_set": config.operator_set, "templates": config.templates})


def schedule_rebinder(plan: OperationPlan, kb: KnowledgeBase) -> consistency_service.Rebinder:
    """Regenerates snapshot bindings from the stored schedule under the given configuration."""
    view = ShiftView(plan)

    def rebind(snap: InstantiationSnapshot, config: Configuration) -> list[Binding]:
        if snap.schedule is None:
            raise IncompatibleStructure(f"snapshot {snap.label!r} has no schedule to rebind from")
        s = io_utils.schedule_from_csv(snap.schedule, plan, source=snap.label or "<snapshot>")
        tree = build_tree(_with_config(kb, config), view, s)
        return [Binding(constraint=c, key=k, value=v) for c, k, v in tree.snapshot_bindings()]

    return rebind


def snapshot_schedule(path: str, plan: OperationPlan, kb: KnowledgeBase) -> InstantiationSnapshot:
    s = io_utils.read_schedule(path, plan)
    tree = build_tree(kb, ShiftView(plan), s)
    return consistency_service.capture_snapshot(
        tree.snapshot_bindings(), Configuration.from_kb(kb),
        label=Path(path).stem, schedule=io_utils.schedule_to_csv(s, plan),
    )


@_guarded
def cmd_check_config(
    kb_new: str,
    db: str = "default",
    kb_old: Optional[str] = None,
    plan: Optional[str] = None,
    store: Optional[str] = None,
    adopt: Optional[Sequence[str]] = None,
    what_if: Optional[str] = None,
    candidates: Sequence[str] = (),
) -> int:
    """Check, adopt or simulate a configuration against a named reference pair database.

    `adopt` is (before, after) schedule paths; `what_if` a delta JSON applied to
    the database's current configuration and ranked over `candidates`.
    """
    p = _plan(plan)
    old_kb = _kb(kb_old, p)
    new_kb = io_utils.load_kb(kb_new)
    store_path = store or get_settings().pair_store_path
    pair_store = io_utils.load_pair_store(store_path)
    database = pair_store.databases.get(db) or ReferencePairDB(name=db, configuration=Configuration.from_kb(old_kb))
    rebinder = schedule_rebinder(p, new_kb)

    if what_if:
        delta = io_utils.load_delta(what_if)
        snaps = [snapshot_schedule(c, p, _with_config(new_kb, database.configuration)) for c in candidates]
        report = consistency_service.what_if(delta, database, snaps, rebinder)
        _emit(report)
        return EXIT_OK if report.consistency.consistent else EXIT_INVALID

    new_config = Configuration.from_kb(new_kb)
    if adopt:
        before, after = adopt
        try:
            updated = consistency_service.adopt_config(
                new_config, snapshot_schedule(before, p, new_kb), snapshot_schedule(after, p, new_kb),
                database, rebinder,
            )
        except (RefusedInconsistent, RefusedNotImproving) as exc:
            log.warning("Adoption refused: %s", exc)
            _emit(AdoptionOutcome(adopted=False, db=db, reason=str(exc)))
            return EXIT_INVALID
        pair_store.databases[db] = updated
        io_utils.save_pair_store(store_path, pair_store)
        _emit(AdoptionOutcome(adopted=True, db=db, pair_id=updated.pairs[-1].id, digest=new_config.digest))
        return EXIT_OK

    report = consistency_service.consistency_check(new_config, database, rebinder)
    _emit(report)
    return EXIT_OK if report.consistent else EXIT_INVALID


@_guarded
def cmd_remove_pair(pair_id: str, db: str = "default", store: Optional[str] = None) -> int:
    store_path = store or get_settings().pair_store_path
    pair_store = io_utils.load_pair_store(store_path)
    if db not in pair_store.databases:
        log.error("No pair database %r in %s", db, store_path)
        return EXIT_INPUT
    pair_store.databases[db] = consistency_service.remove_pair(pair_store.databases[db], pair_id)
    io_utils.save_pair_store(store_path, pair_store)
    _emit({"removed": pair_id, "db": db})
    return EXIT_OK


# ── kb ────────────────────────────────────────────────────────────────────────

@_guarded
def cmd_kb_validate(kb: Optional[str] = None, plan: Optional[str] = None) -> int:
    k = _kb(kb, _plan(plan))
    problems = validate_knowledge_base(k)
    for msg in problems:
        log.warning("%s: %s", k.name, msg)
    _emit({"kb": k.name, "diagnostics": problems})
    return EXIT_INPUT if problems else EXIT_OK


@_guarded
def cmd_kb_export(plan: Optional[str] = None, out: Optional[str] = None) -> int:
    k = reference_knowledge_base(_plan(plan))
    if out:
        io_utils.write_model(out, k)
    else:
        _emit(k)
    return EXIT_OK


# ── queens ────────────────────────────────────────────────────────────────────

@_guarded
def cmd_queens(
    n: int,
    algorithm: str = "random_hill",
    seed: Optional[int] = None,
    max_evaluations: Optional[int] = None,
    out: Optional[str] = None,
) -> int:
    cfg = OptimizerConfig.from_settings(algorithm=algorithm, seed=seed, max_evaluations=max_evaluations)
    board = random_board(n, random.Random(cfg.seed))
    result = optimize(QueensDomain(n), board, cfg)
    if out:
        Path(out).write_text(io_utils.board_to_json(result.best), encoding="utf-8")
    _emit(QueensSummary(
        n=n, algorithm=result.algorithm, seed=cfg.seed,
        conflicts=queens_conflicts(result.best), best_score=result.best_score,
        evaluations=result.evaluations, rows=list(result.best.rows),
    ))
    return EXIT_OK
