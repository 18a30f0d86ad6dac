"""Compare and concat constraints, default rules, hard barriers, soften/harden."""
from __future__ import annotations

import pytest

from pydantic import ValidationError

from fuzzyopt.errors import KnowledgeBaseError, NonPositiveFactor, UnboundVariable
from fuzzyopt.models.constraint import (
    CompareConstraint,
    ConcatConstraint,
    SetOfConstraints,
    deviation_variable,
    satisfaction_variable,
)
from fuzzyopt.models.fuzzy import Distribution, LinguisticVariable, MembershipFunction, OperatorSet, Rule, RuleSet
from fuzzyopt.services.constraint_service import (
    evaluate_compare,
    evaluate_set,
    make_default_ruleset,
    scale_compare,
    soften_harden,
)

OPS = OperatorSet()


def _set(*roots, ops: OperatorSet = OPS) -> SetOfConstraints:
    var = LinguisticVariable(name="v", universe=(-100.0, 100.0), terms={"any": MembershipFunction.triangle(-100, 0, 100)})
    return SetOfConstraints(name="s", roots=roots, operator_set=ops, parameter_set=(var,))


def _le(name: str, ref: float = 0.0, ramp: float = 1.0, **kw) -> CompareConstraint:
    return CompareConstraint(name=name, variable="v", op="<=", compare_value=ref, ramp_width=ramp, **kw)


def _rules_without_deviation() -> RuleSet:
    level = LinguisticVariable(name="level", universe=(0.0, 1.0), terms={"any": MembershipFunction.triangle(0, 0.5, 1)})
    rule = Rule(antecedent=(("level", "any"),), consequent=("satisfaction", "good"))
    return RuleSet(variables=(level, satisfaction_variable()), rules=(rule,))


class TestDefaultRuleset:
    def test_medium_violation_is_bad(self, alu):
        described = make_default_ruleset(alu).describe()
        assert "IF deviation is positive_medium THEN satisfaction is bad" in described
        assert "IF deviation is positive_small THEN satisfaction is zero" in described

    def test_satisfied_side_is_very_good(self, alu):
        assert "IF deviation is negative_big THEN satisfaction is very_good" in make_default_ruleset(alu).describe()

    def test_equality_penalizes_both_sides(self):
        c = CompareConstraint(name="eq", variable="v", op="=", compare_value=0.0, ramp_width=1.0)
        described = make_default_ruleset(c).describe()
        assert "IF deviation is negative_big THEN satisfaction is very_bad" in described
        assert "IF deviation is positive_big THEN satisfaction is very_bad" in described

    def test_term_layout(self):
        assert set(deviation_variable().terms) == {
            "negative_big", "negative_medium", "negative_small", "zero",
            "positive_small", "positive_medium", "positive_big",
        }
        assert satisfaction_variable().universe == (0.0, 1.0)


class TestEvaluateCompare:
    @pytest.mark.parametrize("value, expected", [
        (0.08, 1.0),
        (0.12, 0.0),
        (0.10, 0.5),
        (0.00, 1.0),
        (0.50, 0.0),
    ])
    def test_alu_examples(self, alu, value, expected):
        assert evaluate_compare(alu, value, OPS) == pytest.approx(expected, abs=1e-9)

    def test_ramp_is_linear(self):
        c = _le("c", ramp=4.0)
        for i in range(41):
            x = i / 10
            assert evaluate_compare(c, x, OPS) == pytest.approx(1.0 - x / 4.0, abs=1e-12)

    def test_monotone_in_violation(self):
        c = _le("c", ramp=2.0)
        scores = [evaluate_compare(c, i / 20, OPS) for i in range(60)]
        assert all(a >= b - 1e-12 for a, b in zip(scores, scores[1:]))

    def test_greater_equal_mirrors(self):
        c = CompareConstraint(name="ge", variable="v", op=">=", compare_value=3.0, ramp_width=3.0)
        assert evaluate_compare(c, 2.0, OPS) == pytest.approx(2 / 3)
        assert evaluate_compare(c, 5.0, OPS) == 1.0

    def test_equality_is_unimodal(self):
        c = CompareConstraint(name="eq", variable="v", op="=", compare_value=1.0, ramp_width=1.0)
        assert evaluate_compare(c, 1.0, OPS) == 1.0
        assert evaluate_compare(c, 0.5, OPS) == pytest.approx(evaluate_compare(c, 1.5, OPS))
        assert evaluate_compare(c, 0.5, OPS) < 1.0

    def test_crisp_dilatation_is_a_step(self):
        c = _le("c", dilatation="crisp")
        assert evaluate_compare(c, 0.0, OPS) == 1.0
        assert evaluate_compare(c, 1e-9, OPS) == 0.0

    def test_mixed_dilatation(self):
        c = _le("c", ramp=2.0, dilatation="mixed")
        assert evaluate_compare(c, -1.0, OPS) == 1.0
        assert evaluate_compare(c, 1.0, OPS) == pytest.approx(0.5)

    def test_mixed_differs_from_fuzzy_under_centroid(self):
        centroid = OperatorSet(defuzz="centroid")
        fuzzy, mixed = _le("f", ramp=2.0), _le("m", ramp=2.0, dilatation="mixed")
        assert evaluate_compare(fuzzy, -1.0, centroid) < 1.0
        assert evaluate_compare(mixed, -1.0, centroid) == 1.0
        assert evaluate_compare(fuzzy, 1.0, centroid) == pytest.approx(evaluate_compare(mixed, 1.0, centroid))

    def test_rule_set_without_deviation(self):
        with pytest.raises(KnowledgeBaseError, match="deviation"):
            evaluate_compare(_le("c"), 0.5, OPS, ruleset=_rules_without_deviation())

    def test_distribution_binding(self):
        c = _le("c", ramp=1.0)
        dist = Distribution(mf=MembershipFunction.triangle(-0.5, 0.0, 0.5))
        score = evaluate_compare(c, dist, OPS)
        assert 0.0 < score <= 1.0

    def test_distribution_beyond_ramp(self):
        c = _le("c", ramp=1.0)
        dist = Distribution(mf=MembershipFunction.triangle(5.0, 6.0, 7.0))
        assert evaluate_compare(c, dist, OPS) == 0.0


class TestEvaluateSet:
    def test_hard_barrier_invalidates(self):
        s = _set(_le("a"), _le("b"))
        result = evaluate_set(s, {"v": 2.0})
        assert not result.valid
        assert result.hard_violations() == ["a", "b"]

    def test_zero_importance_never_hard(self):
        s = _set(_le("a", importance=0.0), _le("b", ref=5.0))
        result = evaluate_set(s, {"v": 2.0})
        assert result.valid
        assert result.score == pytest.approx(1.0)

    def test_concat_and_weights_children(self):
        node = ConcatConstraint(name="both", left=_le("a", ramp=4.0), right=_le("b", ramp=4.0, importance=0.5))
        result = evaluate_set(_set(node), {"v": 1.0})
        # left 0.75, right 0.75 ** 0.5
        assert result.results[0].score == pytest.approx(0.75)
        assert [c.name for c in result.results[0].children] == ["a", "b"]

    def test_unbound(self):
        with pytest.raises(UnboundVariable):
            evaluate_set(_set(_le("a")), {})

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError):
            _set(_le("a"), _le("a"))

    def test_rule_set_must_read_deviation(self):
        var = LinguisticVariable(name="v", universe=(-100.0, 100.0), terms={"any": MembershipFunction.triangle(-100, 0, 100)})
        with pytest.raises(ValidationError, match="deviation"):
            SetOfConstraints(name="s", roots=(_le("a"),), parameter_set=(var,), ruleset=_rules_without_deviation())


class TestSoftenHarden:
    def test_soften_doubles_ramp(self):
        s = _set(_le("a", ref=0.08, ramp=0.04))
        softer = soften_harden(s, 2.0)
        assert softer.compares()[0].ramp == pytest.approx(0.08)
        assert evaluate_compare(softer.compares()[0], 0.12, OPS) == pytest.approx(0.5)

    def test_harden_never_raises_scores(self):
        c = _le("a", ramp=2.0)
        hard = scale_compare(c, 0.5)
        for i in range(1, 40):
            x = i / 10
            assert evaluate_compare(hard, x, OPS) <= evaluate_compare(c, x, OPS) + 1e-12

    def test_tuned_and_crisp_untouched(self):
        s = _set(_le("a", tuned=True), _le("b", dilatation="crisp"))
        assert soften_harden(s, 3.0) == s

    def test_identity(self):
        s = _set(_le("a"))
        assert soften_harden(s, 1.0) is s

    @pytest.mark.parametrize("factor", [0.0, -1.0])
    def test_non_positive(self, factor):
        with pytest.raises(NonPositiveFactor):
            soften_harden(_set(_le("a")), factor)
