"""Reference pairs: consistency checks, guarded adoption, removal and what-if."""
from __future__ import annotations

import random
from datetime import datetime, timezone

import pytest

from fuzzyopt.errors import IncompatibleStructure, RefusedInconsistent, RefusedNotImproving, UnknownPair
from fuzzyopt.models.consistency import Binding, ConfigDelta, Configuration, ReferencePairDB
from fuzzyopt.models.constraint import CompareConstraint
from fuzzyopt.models.dynamic import AttrExpr, TemplateConstraint
from fuzzyopt.services.consistency_service import (
    adopt_config,
    apply_delta,
    capture_snapshot,
    consistency_check,
    constraint_scores,
    remove_pair,
    score_snapshot,
    what_if,
)

NOON = datetime(2024, 5, 1, 12, tzinfo=timezone.utc)


def _template(name: str, importance: float, comment: str = "") -> TemplateConstraint:
    base = CompareConstraint(
        name=name, variable=name, op="<=", compare_value=0.0, ramp_width=1.0,
        importance=importance, comment=comment,
    )
    return TemplateConstraint(name=name, base=base, specialization=AttrExpr(name=name))


def _config(wx: float, wy: float, *extra: TemplateConstraint) -> Configuration:
    return Configuration(templates=(_template("x", wx), _template("y", wy), *extra))


# x fully met, y half way: better while x weighs more
GOOD_X = [("x", "k", 0.0), ("y", "k", 0.5)]
GOOD_Y = [("x", "k", 0.5), ("y", "k", 0.0)]


@pytest.fixture
def db() -> ReferencePairDB:
    cfg = _config(2.0, 1.0)
    empty = ReferencePairDB(name="test", configuration=cfg)
    return adopt_config(
        cfg,
        best_before=capture_snapshot(GOOD_Y, cfg, label="before"),
        best_after=capture_snapshot(GOOD_X, cfg, label="after"),
        db=empty,
        now=NOON,
    )


class TestScoring:
    def test_snapshot_score(self):
        cfg = _config(2.0, 1.0)
        snap = capture_snapshot(GOOD_X, cfg)
        assert snap.score == pytest.approx(2.5 / 3)
        assert snap.digest == cfg.digest
        assert score_snapshot(snap, _config(1.0, 2.0)) == pytest.approx(2.0 / 3)

    def test_empty_snapshot_scores_one(self):
        assert capture_snapshot([], _config(1.0, 1.0)).score == 1.0

    def test_per_constraint_scores(self):
        snap = capture_snapshot(GOOD_X, _config(2.0, 1.0))
        assert constraint_scores(snap, _config(2.0, 1.0)) == pytest.approx({"x": 1.0, "y": 0.5})

    def test_digest_ignores_comments(self):
        a = Configuration(templates=(_template("x", 1.0, "first wording"),))
        b = Configuration(templates=(_template("x", 1.0, "second wording"),))
        assert a.digest == b.digest
        assert a.digest != _config(1.0, 1.0).digest


class TestConsistencyCheck:
    def test_current_configuration_is_consistent(self, db):
        assert consistency_check(db.configuration, db).consistent

    def test_swapped_weights_invert(self, db):
        report = consistency_check(_config(1.0, 2.0), db)
        assert not report.consistent
        [inv] = report.inversions
        assert inv.pair_id == "pair-1"
        assert inv.old_first > inv.old_second
        assert inv.new_first < inv.new_second

    def test_scaling_keeps_order(self, db):
        assert consistency_check(_config(4.0, 2.0), db).consistent

    def test_uniform_scaling_keeps_every_random_db_consistent(self):
        rng = random.Random(2024)
        for _ in range(1000):
            names = [f"c{i}" for i in range(rng.randint(2, 4))]
            cfg = Configuration(templates=tuple(_template(n, rng.uniform(0.1, 5.0)) for n in names))
            db = ReferencePairDB(name="random", configuration=cfg)
            for _ in range(rng.randint(1, 3)):
                a, b = (capture_snapshot([(n, "k", rng.uniform(0.0, 1.5)) for n in names], cfg) for _ in range(2))
                if abs(a.score - b.score) <= 1e-9:
                    continue
                worse, better = sorted((a, b), key=lambda s: s.score)
                db = adopt_config(cfg, best_before=worse, best_after=better, db=db, now=NOON)
            factor = rng.uniform(0.1, 10.0)
            scaled = apply_delta(cfg, ConfigDelta(importances={
                t.name: t.base.importance * factor for t in cfg.templates
            }))
            assert consistency_check(scaled, db).consistent

    def test_tie_breaks_order(self, db):
        assert not consistency_check(_config(1.0, 1.0), db).consistent

    def test_dropped_constraint(self, db):
        with pytest.raises(IncompatibleStructure):
            consistency_check(Configuration(templates=(_template("x", 1.0),)), db)

    def test_added_constraint_needs_rebinder(self, db):
        bigger = _config(2.0, 1.0, _template("z", 1.0))
        with pytest.raises(IncompatibleStructure):
            consistency_check(bigger, db)

        def rebind(snap, config):
            return (*snap.bindings, Binding(constraint="z", key="k", value=0.0))

        assert consistency_check(bigger, db, rebind).consistent


class TestAdoption:
    def test_adds_pair_and_replaces_configuration(self, db):
        assert [p.id for p in db.pairs] == ["pair-1"]
        assert db.next_id == 2
        assert db.pairs[0].first.label == "after"
        assert db.pairs[0].created_at == NOON.isoformat()

    def test_refuses_inconsistent(self, db):
        swapped = _config(1.0, 2.0)
        with pytest.raises(RefusedInconsistent):
            adopt_config(
                swapped,
                capture_snapshot(GOOD_X, swapped),
                capture_snapshot(GOOD_Y, swapped),
                db,
            )

    def test_refuses_non_improving(self, db):
        cfg = db.configuration
        snap = capture_snapshot(GOOD_X, cfg)
        with pytest.raises(RefusedNotImproving):
            adopt_config(cfg, snap, snap, db)

    def test_second_adoption_rescores_under_new_configuration(self, db):
        cfg = _config(3.0, 1.0)
        grown = adopt_config(
            cfg,
            capture_snapshot([("x", "k", 0.25), ("y", "k", 0.0)], db.configuration),
            capture_snapshot([("x", "k", 0.0), ("y", "k", 0.25)], db.configuration),
            db,
            now=NOON,
        )
        assert [p.id for p in grown.pairs] == ["pair-1", "pair-2"]
        assert grown.pairs[1].digest == cfg.digest
        assert grown.pairs[1].first.score == pytest.approx(3.75 / 4)
        assert db.next_id == 2


class TestRemovePair:
    def test_remove_then_unknown(self, db):
        emptied = remove_pair(db, "pair-1")
        assert emptied.pairs == ()
        with pytest.raises(UnknownPair):
            remove_pair(emptied, "pair-1")

    def test_ids_are_not_reused(self, db):
        assert remove_pair(db, "pair-1").next_id == 2


class TestWhatIf:
    def test_swapped_weights_report(self, db):
        candidates = [capture_snapshot(GOOD_X, db.configuration, "gx"), capture_snapshot(GOOD_Y, db.configuration, "gy")]
        report = what_if(ConfigDelta(importances={"x": 1.0, "y": 2.0}), db, candidates)
        assert not report.consistency.consistent
        assert [label for label, _ in report.old_ranking] == ["gx", "gy"]
        assert [label for label, _ in report.new_ranking] == ["gy", "gx"]
        assert {c.label: (c.old_rank, c.new_rank) for c in report.changes} == {"gx": (1, 2), "gy": (2, 1)}
        assert report.old_digest == db.configuration.digest != report.new_digest
        gy = next(c for c in report.changes if c.label == "gy")
        assert {d.constraint: d.new_importance for d in gy.deltas} == {"x": 1.0, "y": 2.0}

    def test_ramp_change(self, db):
        cfg = apply_delta(db.configuration, ConfigDelta(ramp_widths={"y": 2.0}))
        assert cfg.template("y").base.ramp == 2.0
        assert cfg.template("x") == db.configuration.template("x")

    def test_unknown_constraint(self, db):
        with pytest.raises(IncompatibleStructure):
            apply_delta(db.configuration, ConfigDelta(importances={"nope": 1.0}))
