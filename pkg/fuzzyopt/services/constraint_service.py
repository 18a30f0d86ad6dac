"""
Default rule generation, compare/set evaluation with hard
barriers, and global softening/hardening of untuned constraints.
"""
from __future__ import annotations
import logging
from functools import lru_cache
from typing import Mapping, Optional, Union

from fuzzyopt.errors import KnowledgeBaseError, NonPositiveFactor, OutOfUniverse, UnboundVariable
from fuzzyopt.models.constraint import (
    DEVIATION,
    DEVIATION_PEAKS,
    SATISFACTION,
    CompareConstraint,
    CompareOp,
    ConcatConstraint,
    EvaluatedConstraint,
    SetOfConstraints,
    SetOfEvalConstraints,
    deviation_variable,
    satisfaction_variable,
)
from fuzzyopt.models.fuzzy import Crisp, Distribution, FuzzyValue, LinguisticVariable, MembershipFunction, OperatorSet, Rule, RuleSet
from fuzzyopt.services.fuzzy_service import defuzzify, exponent_weight, fuzzify, infer, membership_degree
from fuzzyopt.services import fuzzy_service

log = logging.getLogger(__name__)

Binding = Union[FuzzyValue, float]

# Violation magnitude → satisfaction term. Zero deviation is the satisfied boundary.
_VIOLATION_TERMS: dict[str, str] = {
    "zero":   "very_good",
    "small":  "zero",
    "medium": "bad",
    "big":    "very_bad",
}


# ── Default rules ─────────────────────────────────────────────────────────────

@lru_cache(maxsize=None)
def _ruleset_for(op: CompareOp) -> RuleSet:
    rules: list[Rule] = []
    for term in DEVIATION_PEAKS:
        if term == "zero":
            out = _VIOLATION_TERMS["zero"]
        else:
            sign, size = term.split("_")
            violating = (
                op == "="
                or (op in ("<=", "<") and sign == "positive")
                or (op in (">=", ">") and sign == "negative")
            )
            out = _VIOLATION_TERMS[size] if violating else "very_good"
        rules.append(Rule(antecedent=((DEVIATION, term),), consequent=(SATISFACTION, out)))
    return RuleSet(variables=(deviation_variable(), satisfaction_variable()), rules=tuple(rules))


def make_default_ruleset(c: CompareConstraint) -> RuleSet:
    return _ruleset_for(c.op)


# ── Compare evaluation ────────────────────────────────────────────────────────

def _clip_to_universe(mf: MembershipFunction, lo: float, hi: float) -> MembershipFunction:
    inside = [(x, mu) for x, mu in mf.vertices if lo < x < hi]
    pts = [(lo, membership_degree(mf, lo)), *inside, (hi, membership_degree(mf, hi))]
    return MembershipFunction(vertices=tuple(pts))


def _deviation_value(c: CompareConstraint, binding: FuzzyValue) -> FuzzyValue:
    ramp = c.ramp
    if isinstance(binding, Crisp):
        d = (binding.x - c.compare_value) / ramp
        return Crisp(x=min(1.0, max(-1.0, d)))
    shifted = MembershipFunction(
        vertices=tuple(((x - c.compare_value) / ramp, mu) for x, mu in binding.mf.vertices)
    )
    clipped = _clip_to_universe(shifted, -1.0, 1.0)
    if clipped.height == 0.0:
        # whole distribution lies beyond the ramp
        peak = defuzzify(shifted, "mean_of_maxima")
        return Crisp(x=min(1.0, max(-1.0, peak)))
    return Distribution(mf=clipped)


def _crisp_holds(op: CompareOp, x: float, ref: float) -> bool:
    return {
        "<=": x <= ref, "<": x < ref, ">=": x >= ref, ">": x > ref, "=": x == ref,
    }[op]


def _as_value(binding: Binding) -> FuzzyValue:
    if isinstance(binding, (Crisp, Distribution)):
        return binding
    return Crisp(x=float(binding))


def evaluate_compare(
    c: CompareConstraint,
    binding: Binding,
    ops: OperatorSet,
    variable: Optional[LinguisticVariable] = None,
    ruleset: Optional[RuleSet] = None,
) -> float:
    """Degree of satisfaction of `c` for the given value, in [0, 1]."""
    value = _as_value(binding)
    if variable is not None:
        lo, hi = variable.universe
        v_lo, v_hi = (value.x, value.x) if isinstance(value, Crisp) else value.mf.support
        if v_lo < lo or v_hi > hi:
            raise OutOfUniverse(f"{c.name}: value outside {variable.name} universe [{lo}, {hi}]")

    point = value.x if isinstance(value, Crisp) else defuzzify(value.mf, "mean_of_maxima")
    if c.dilatation == "crisp":
        return 1.0 if _crisp_holds(c.op, point, c.compare_value) else 0.0
    # mixed only differs from fuzzy when rules or defuzzification can leave a
    # satisfied crisp value below 1 (centroid, user rule sets)
    if c.dilatation == "mixed" and isinstance(value, Crisp) and _crisp_holds(c.op, point, c.compare_value):
        return 1.0

    rs = ruleset or make_default_ruleset(c)
    try:
        deviation = rs.variable(DEVIATION)
    except KeyError:
        raise KnowledgeBaseError(f"{c.name}: rule set has no {DEVIATION!r} input variable") from None
    degrees = {DEVIATION: fuzzify(deviation, _deviation_value(c, value))}
    score = infer(rs, degrees, ops)
    return min(1.0, max(0.0, score))


# ── Set evaluation ────────────────────────────────────────────────────────────

def _evaluate_node(
    node: CompareConstraint | ConcatConstraint,
    s: SetOfConstraints,
    bindings: Mapping[str, Binding],
    variables: Mapping[str, LinguisticVariable],
) -> EvaluatedConstraint:
    ops = s.operator_set
    if isinstance(node, CompareConstraint):
        if node.variable not in bindings:
            raise UnboundVariable(f"{s.name}: variable {node.variable!r} is not bound")
        score = evaluate_compare(node, bindings[node.variable], ops, variables.get(node.variable), s.ruleset)
        return EvaluatedConstraint(
            name=node.name, importance=node.importance, score=score,
            hard_violation=score == 0.0 and node.importance > 0,
        )

    left = _evaluate_node(node.left, s, bindings, variables)
    right = _evaluate_node(node.right, s, bindings, variables)
    max_w = max(left.importance, right.importance)
    weighted = [exponent_weight(ch.score, ch.importance, max_w, ops.weighing_scheme) for ch in (left, right)]
    score = fuzzy_service.fold_and(ops, weighted) if node.op == "and" else fuzzy_service.fold_or(ops, weighted)
    return EvaluatedConstraint(
        name=node.name, importance=node.importance, score=score,
        hard_violation=score == 0.0 and node.importance > 0,
        children=(left, right),
    )


def evaluate_set(s: SetOfConstraints, bindings: Mapping[str, Binding]) -> SetOfEvalConstraints:
    """Bottom-up evaluation; scoring always completes so violations can be ranked."""
    variables = {v.name: v for v in s.parameter_set}
    results = tuple(_evaluate_node(root, s, bindings, variables) for root in s.roots)
    valid = not any(leaf.hard_violation for r in results for leaf in _all_nodes(r))
    score = fuzzy_service.aggregate(s.operator_set, [(r.score, r.importance) for r in results])
    if not valid:
        log.debug("Set %s crossed a hard barrier", s.name)
    return SetOfEvalConstraints(name=s.name, score=score, valid=valid, results=results)


def _all_nodes(r: EvaluatedConstraint):
    yield r
    for ch in r.children:
        yield from _all_nodes(ch)


# ── Soften / harden ───────────────────────────────────────────────────────────

def _scale(node: CompareConstraint | ConcatConstraint, factor: float):
    if isinstance(node, CompareConstraint):
        if node.tuned or node.dilatation == "crisp":
            return node
        return node.model_copy(update={"ramp_width": node.ramp * factor})
    return node.model_copy(update={"left": _scale(node.left, factor), "right": _scale(node.right, factor)})


def soften_harden(s: SetOfConstraints, factor: float) -> SetOfConstraints:
    """Widen (factor > 1) or narrow (factor < 1) every untuned ramp."""
    if not factor > 0:
        raise NonPositiveFactor(f"factor must be positive, got {factor}")
    if factor == 1.0:
        return s
    return s.model_copy(update={"roots": tuple(_scale(r, factor) for r in s.roots)})


def scale_compare(c: CompareConstraint, factor: float) -> CompareConstraint:
    if not factor > 0:
        raise NonPositiveFactor(f"factor must be positive, got {factor}")
    return _scale(c, factor)
