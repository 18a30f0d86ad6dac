"""
Re-scores stored reference pairs under a changed
configuration and guards adoption of that configuration.

Checks only report. Nothing here resolves an inconsistency on its own.
"""
from __future__ import annotations
import logging
from datetime import datetime, timezone
from typing import Callable, Iterable, Optional, Sequence

from fuzzyopt.errors import IncompatibleStructure, RefusedInconsistent, RefusedNotImproving, UnknownPair
from fuzzyopt.models.consistency import (
    Binding,
    ConfigDelta,
    Configuration,
    ConsistencyReport,
    ConstraintDelta,
    InstantiationSnapshot,
    PairInversion,
    RankChange,
    ReferencePairDB,
    ReferenceRankingPair,
    WhatIfReport,
)
from fuzzyopt.models.fuzzy import Crisp
from fuzzyopt.services.constraint_service import evaluate_compare
from fuzzyopt.services.fuzzy_service import aggregate

log = logging.getLogger(__name__)

# Regenerates a snapshot's bindings under a configuration that adds constraints.
Rebinder = Callable[[InstantiationSnapshot, Configuration], Sequence[Binding]]


# ── Scoring ───────────────────────────────────────────────────────────────────

def _resolve(snap: InstantiationSnapshot, config: Configuration, rebinder: Optional[Rebinder]) -> Sequence[Binding]:
    names = {t.name for t in config.templates}
    bound = {b.constraint for b in snap.bindings}
    dropped = bound - names
    if dropped:
        raise IncompatibleStructure(f"snapshot {snap.label!r} needs dropped constraints {sorted(dropped)}")
    # constraints the configuration adds have no binding yet
    if names - bound and snap.bindings:
        if rebinder is None:
            raise IncompatibleStructure(f"snapshot {snap.label!r} has no bindings for {sorted(names - bound)}")
        return rebinder(snap, config)
    return snap.bindings


def _scored(bindings: Iterable[Binding], config: Configuration) -> list[tuple[str, float, float]]:
    out: list[tuple[str, float, float]] = []
    for b in bindings:
        t = config.template(b.constraint)
        if t is None:
            raise IncompatibleStructure(f"no constraint {b.constraint!r} in configuration")
        out.append((b.constraint, evaluate_compare(t.base, Crisp(x=b.value), config.operator_set), t.base.importance))
    return out


def score_bindings(bindings: Sequence[Binding], config: Configuration) -> float:
    scored = _scored(bindings, config)
    if not scored:
        return 1.0
    return aggregate(config.operator_set, [(s, w) for _, s, w in scored])


def score_snapshot(snap: InstantiationSnapshot, config: Configuration, rebinder: Optional[Rebinder] = None) -> float:
    return score_bindings(_resolve(snap, config, rebinder), config)


def constraint_scores(snap: InstantiationSnapshot, config: Configuration, rebinder: Optional[Rebinder] = None) -> dict[str, float]:
    """Aggregated score per constraint type."""
    groups: dict[str, list[tuple[float, float]]] = {}
    for name, s, w in _scored(_resolve(snap, config, rebinder), config):
        groups.setdefault(name, []).append((s, w))
    out: dict[str, float] = {}
    for name, scored in groups.items():
        # zero-importance types still get a plain mean
        weights_ok = any(w > 0 for _, w in scored)
        out[name] = aggregate(config.operator_set, scored if weights_ok else [(s, 1.0) for s, _ in scored])
    return out


def capture_snapshot(
    bindings: Iterable[tuple[str, str, float]],
    config: Configuration,
    label: str = "",
    schedule: Optional[str] = None,
) -> InstantiationSnapshot:
    """Freeze an evaluator's bindings together with the score they give under `config`."""
    frozen = tuple(Binding(constraint=c, key=k, value=v) for c, k, v in bindings)
    return InstantiationSnapshot(
        label=label, bindings=frozen, schedule=schedule,
        score=score_bindings(frozen, config), digest=config.digest,
    )


def _rescored(snap: InstantiationSnapshot, config: Configuration, rebinder: Optional[Rebinder]) -> InstantiationSnapshot:
    bindings = tuple(_resolve(snap, config, rebinder))
    return snap.model_copy(update={
        "bindings": bindings, "score": score_bindings(bindings, config), "digest": config.digest,
    })


# ── Check / adopt / remove ────────────────────────────────────────────────────

def consistency_check(new_config: Configuration, db: ReferencePairDB, rebinder: Optional[Rebinder] = None) -> ConsistencyReport:
    """Every pair must keep its strict order under the new configuration; ties count as broken."""
    inversions: list[PairInversion] = []
    for pair in db.pairs:
        nf = score_snapshot(pair.first, new_config, rebinder)
        ns = score_snapshot(pair.second, new_config, rebinder)
        if not nf > ns:
            inversions.append(PairInversion(
                pair_id=pair.id,
                old_first=pair.first.score, old_second=pair.second.score,
                new_first=nf, new_second=ns,
            ))
    inversions.sort(key=lambda inv: _pair_number(inv.pair_id))
    if inversions:
        log.info("Configuration %s breaks %d of %d pairs in %s", new_config.digest[:12], len(inversions), len(db.pairs), db.name)
    return ConsistencyReport(consistent=not inversions, inversions=inversions)


def _pair_number(pair_id: str) -> tuple[int, str]:
    tail = pair_id.rsplit("-", 1)[-1]
    return (int(tail) if tail.isdigit() else -1, pair_id)


def adopt_config(
    new_config: Configuration,
    best_before: InstantiationSnapshot,
    best_after: InstantiationSnapshot,
    db: ReferencePairDB,
    rebinder: Optional[Rebinder] = None,
    now: Optional[datetime] = None,
) -> ReferencePairDB:
    """Record (best_after, best_before) as a new pair and make new_config current."""
    report = consistency_check(new_config, db, rebinder)
    if not report.consistent:
        raise RefusedInconsistent(f"{len(report.inversions)} reference pairs change order")
    after = _rescored(best_after, new_config, rebinder)
    before = _rescored(best_before, new_config, rebinder)
    if not after.score > before.score:
        raise RefusedNotImproving(f"after {after.score:.6f} does not beat before {before.score:.6f}")
    stamp = (now or datetime.now(timezone.utc)).isoformat()
    pair = ReferenceRankingPair(
        id=f"pair-{db.next_id}", first=after, second=before, digest=new_config.digest, created_at=stamp,
    )
    log.info("Adopted configuration %s into %s as %s", new_config.digest[:12], db.name, pair.id)
    return db.model_copy(update={
        "pairs": (*db.pairs, pair), "configuration": new_config, "next_id": db.next_id + 1,
    })


def remove_pair(db: ReferencePairDB, pair_id: str) -> ReferencePairDB:
    kept = tuple(p for p in db.pairs if p.id != pair_id)
    if len(kept) == len(db.pairs):
        raise UnknownPair(f"{db.name}: no pair {pair_id!r}")
    return db.model_copy(update={"pairs": kept})


# ── What-if ───────────────────────────────────────────────────────────────────

def apply_delta(config: Configuration, delta: ConfigDelta) -> Configuration:
    names = {t.name for t in config.templates}
    unknown = (set(delta.importances) | set(delta.ramp_widths)) - names
    if unknown:
        raise IncompatibleStructure(f"delta names unknown constraints {sorted(unknown)}")
    templates = []
    for t in config.templates:
        update: dict[str, float] = {}
        if t.name in delta.importances:
            update["importance"] = delta.importances[t.name]
        if t.name in delta.ramp_widths:
            update["ramp_width"] = delta.ramp_widths[t.name]
        if update:
            base = t.base.model_validate({**t.base.model_dump(), **update})
            t = t.model_copy(update={"base": base})
        templates.append(t)
    return Configuration(operator_set=delta.operator_set or config.operator_set, templates=tuple(templates))


def _ranking(cands: Sequence[InstantiationSnapshot], config: Configuration, rebinder: Optional[Rebinder]) -> list[tuple[str, float]]:
    scored = [(c.label or f"candidate-{i}", score_snapshot(c, config, rebinder)) for i, c in enumerate(cands)]
    return sorted(scored, key=lambda x: (-x[1], x[0]))


def what_if(
    delta: ConfigDelta,
    db: ReferencePairDB,
    candidates: Sequence[InstantiationSnapshot],
    rebinder: Optional[Rebinder] = None,
) -> WhatIfReport:
    """Verdict plus old and new ranking of the candidates; the database is not touched."""
    old, new = db.configuration, apply_delta(db.configuration, delta)
    old_rank, new_rank = _ranking(candidates, old, rebinder), _ranking(candidates, new, rebinder)
    by_label = {c.label or f"candidate-{i}": c for i, c in enumerate(candidates)}
    old_pos = {label: i + 1 for i, (label, _) in enumerate(old_rank)}

    changes: list[RankChange] = []
    for i, (label, _) in enumerate(new_rank):
        if old_pos[label] == i + 1:
            continue
        snap = by_label[label]
        before, after = constraint_scores(snap, old, rebinder), constraint_scores(snap, new, rebinder)
        deltas = [
            ConstraintDelta(
                constraint=name,
                old_score=before.get(name, 1.0), new_score=after[name],
                old_importance=old.template(name).base.importance if old.template(name) else 0.0,
                new_importance=new.template(name).base.importance,
            )
            for name in sorted(after)
        ]
        changes.append(RankChange(label=label, old_rank=old_pos[label], new_rank=i + 1, deltas=deltas))

    return WhatIfReport(
        consistency=consistency_check(new, db, rebinder),
        old_digest=old.digest, new_digest=new.digest,
        old_ranking=old_rank, new_ranking=new_rank, changes=changes,
    )
