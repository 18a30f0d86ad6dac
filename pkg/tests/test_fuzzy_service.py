"""Fuzzy core: membership, fuzzification, rules, aggregation, defuzzification."""
from __future__ import annotations

import random

import pytest
from pydantic import ValidationError

from fuzzyopt.errors import AllZeroWeights, DegenerateSet, EmptyInput, OutOfUniverse, UnresolvedVariable
from fuzzyopt.models.fuzzy import (
    Crisp,
    Distribution,
    LinguisticVariable,
    MembershipFunction,
    OperatorSet,
    Rule,
    RuleSet,
)
from fuzzyopt.services.fuzzy_service import (
    aggregate,
    apply_rules,
    defuzzify,
    fuzzify,
    infer,
    membership_degree,
    symmetric_axis,
)

tri = MembershipFunction.triangle


@pytest.fixture
def low_high() -> LinguisticVariable:
    return LinguisticVariable(name="x", universe=(0.0, 1.0), terms={"low": tri(0, 0, 1), "high": tri(0, 1, 1)})


@pytest.fixture
def quality() -> RuleSet:
    inp = LinguisticVariable(name="in", universe=(0.0, 1.0), terms={"a": tri(0, 0, 1), "b": tri(0, 1, 1)})
    out = LinguisticVariable(name="out", universe=(0.0, 1.0), terms={
        "bad": tri(0, 0.25, 0.5), "good": tri(0.5, 0.75, 1.0),
    })
    return RuleSet(variables=(inp, out), rules=(
        Rule(antecedent=(("in", "a"),), consequent=("out", "bad")),
        Rule(antecedent=(("in", "b"),), consequent=("out", "good")),
    ))


class TestMembershipFunction:
    def test_triangle_interpolates(self):
        assert membership_degree(tri(0, 1, 2), 0.5) == pytest.approx(0.5)

    def test_outside_support_is_zero(self):
        assert membership_degree(tri(0, 1, 2), 5.0) == 0.0

    def test_shoulder_holds_level(self):
        assert membership_degree(tri(0, 1, 1), 3.0) == 1.0

    def test_rejects_decreasing_vertices(self):
        with pytest.raises(ValidationError):
            MembershipFunction(vertices=((1.0, 0.0), (0.0, 1.0)))

    def test_rejects_mu_above_one(self):
        with pytest.raises(ValidationError):
            MembershipFunction(vertices=((0.0, 0.0), (1.0, 1.5)))

    def test_step_jumps_at_point(self):
        step = MembershipFunction.step(2.0)
        assert membership_degree(step, 1.999) == 0.0
        assert membership_degree(step, 2.001) == 1.0

    def test_distribution_is_normalized(self):
        d = Distribution(mf=MembershipFunction(vertices=((0.0, 0.0), (1.0, 0.5), (2.0, 0.0))))
        assert d.mf.height == 1.0

    def test_zero_distribution_rejected(self):
        with pytest.raises(ValidationError):
            Distribution(mf=MembershipFunction.zero(0.0, 1.0))


class TestFuzzify:
    def test_crisp_at_vertex(self, low_high):
        assert fuzzify(low_high, Crisp(x=0.0)) == {"low": 1.0, "high": 0.0}

    def test_crisp_midpoint(self, low_high):
        assert fuzzify(low_high, Crisp(x=0.5)) == pytest.approx({"low": 0.5, "high": 0.5})

    def test_crisp_matches_membership(self, low_high):
        rng = random.Random(3)
        for _ in range(100):
            x = rng.random()
            degrees = fuzzify(low_high, Crisp(x=x))
            for name, mf in low_high.terms.items():
                assert degrees[name] == membership_degree(mf, x)

    def test_distribution_sup_min(self, low_high):
        # left flank 4x - 1 meets 1 - x at x = 0.4, where both are 0.6
        degrees = fuzzify(low_high, Distribution(mf=tri(0.25, 0.5, 0.75)))
        assert degrees == pytest.approx({"low": 0.6, "high": 0.6}, abs=1e-12)

    def test_distribution_agrees_with_grid_search(self, low_high):
        dist = tri(0.1, 0.3, 0.9)
        exact = fuzzify(low_high, Distribution(mf=dist))
        grid = [i / 10000 for i in range(10001)]
        for name, mf in low_high.terms.items():
            approx = max(min(membership_degree(dist, x), membership_degree(mf, x)) for x in grid)
            assert exact[name] == pytest.approx(approx, abs=1e-3)
            assert exact[name] >= approx - 1e-12

    def test_out_of_universe(self, low_high):
        with pytest.raises(OutOfUniverse):
            fuzzify(low_high, Crisp(x=1.5))


class TestRules:
    def test_two_rules_clip_and_max(self, quality):
        ops = OperatorSet(defuzz="centroid")
        out = apply_rules(quality, {"in": {"a": 0.5, "b": 0.5}}, ops)
        bad, good = quality.output.terms["bad"], quality.output.terms["good"]
        for i in range(1001):
            x = i / 1000
            expected = max(min(membership_degree(bad, x), 0.5), min(membership_degree(good, x), 0.5))
            assert membership_degree(out, x) == pytest.approx(expected, abs=1e-12)

    def test_nothing_fires_gives_zero_set(self, quality):
        out = apply_rules(quality, {"in": {"a": 0.0, "b": 0.0}}, OperatorSet())
        assert out.height == 0.0

    def test_missing_degree(self, quality):
        with pytest.raises(UnresolvedVariable):
            apply_rules(quality, {"in": {"a": 0.5}}, OperatorSet())

    def test_height_defuzzification(self, quality):
        score = infer(quality, {"in": {"a": 0.25, "b": 0.75}}, OperatorSet(defuzz="height"))
        assert score == pytest.approx(0.25 * 0.25 + 0.75 * 0.75)

    def test_height_without_firing(self, quality):
        with pytest.raises(DegenerateSet):
            infer(quality, {"in": {"a": 0.0, "b": 0.0}}, OperatorSet(defuzz="height"))

    def test_probabilistic_sum_stays_in_unit_interval(self, quality):
        out = apply_rules(quality, {"in": {"a": 0.9, "b": 0.8}}, OperatorSet(or_op="probabilistic_sum"))
        assert all(0.0 <= mu <= 1.0 for mu in out.mus)

    def test_rule_set_rejects_unknown_term(self, quality):
        with pytest.raises(ValidationError):
            RuleSet(variables=quality.variables, rules=(
                Rule(antecedent=(("in", "c"),), consequent=("out", "bad")),
            ))


class TestAggregate:
    def test_exponent_weighted_min(self):
        ops = OperatorSet(aggregation="exponent_weighted_min")
        assert aggregate(ops, [(0.25, 1.0), (0.81, 0.5)]) == pytest.approx(0.25)

    def test_weighted_mean(self):
        assert aggregate(OperatorSet(), [(1.0, 2.0), (0.0, 1.0)]) == pytest.approx(2 / 3)

    def test_empty(self):
        with pytest.raises(EmptyInput):
            aggregate(OperatorSet(), [])

    def test_all_zero_weights(self):
        with pytest.raises(AllZeroWeights):
            aggregate(OperatorSet(), [(0.5, 0.0), (0.3, 0.0)])

    def test_min_mean_max_ordering(self):
        rng = random.Random(11)
        lo, mean, hi = (OperatorSet(aggregation=a) for a in ("min", "weighted_mean", "max"))
        for _ in range(10000):
            scored = [(rng.random(), rng.random() + 1e-3) for _ in range(rng.randint(1, 6))]
            assert aggregate(lo, scored) <= aggregate(mean, scored) + 1e-12
            assert aggregate(mean, scored) <= aggregate(hi, scored) + 1e-12


class TestDefuzzify:
    def test_triangle_centroid(self):
        assert defuzzify(tri(0, 1, 2), "centroid") == pytest.approx(1.0)

    def test_shoulder_triangle_centroid(self):
        # vertices (0, 1) and (3, 0): a third of the way along
        assert defuzzify(tri(0, 0, 3), "centroid") == pytest.approx(1.0)

    def test_mean_of_maxima_plateau(self):
        assert defuzzify(MembershipFunction.trapezoid(0, 1, 3, 4), "mean_of_maxima") == pytest.approx(2.0)

    def test_all_zero(self):
        with pytest.raises(DegenerateSet):
            defuzzify(MembershipFunction.zero(0, 1), "centroid")

    def test_centroid_of_symmetric_sets_is_axis(self):
        rng = random.Random(5)
        for _ in range(1000):
            axis = rng.uniform(-10, 10)
            half = sorted(rng.uniform(0.01, 5) for _ in range(rng.randint(1, 4)))
            mus = [rng.random() for _ in half]
            left = [(axis - h, m) for h, m in zip(reversed(half), reversed(mus))]
            right = [(axis + h, m) for h, m in zip(half, mus)]
            vertices = (*left, (axis, rng.random()), *right)
            mf = MembershipFunction(vertices=vertices)
            if mf.height == 0.0:
                continue
            assert symmetric_axis(mf) == pytest.approx(axis)
            assert defuzzify(mf, "centroid") == pytest.approx(axis, abs=1e-9)
