"""
Fuzzy inference: membership evaluation, fuzzification (crisp and
possibilistic), rule application, aggregation and defuzzification.

Every function here is pure. Piecewise-linear sets are handled exactly:
breakpoints are collected analytically and integrals use closed forms.
"""
from __future__ import annotations
import logging
import math
from typing import Iterable, Mapping, Sequence

import numpy as np
import skfuzzy as fuzz

from fuzzyopt.errors import AllZeroWeights, DegenerateSet, EmptyInput, OutOfUniverse, UnresolvedVariable
from fuzzyopt.models.fuzzy import (
    Crisp,
    Distribution,
    FuzzyValue,
    LinguisticVariable,
    MembershipFunction,
    OperatorSet,
    RuleSet,
)

log = logging.getLogger(__name__)

_PROBSUM_REFINEMENT = 16


# ── Membership ────────────────────────────────────────────────────────────────

def _degrees(mf: MembershipFunction, x):
    # boundary degrees hold outside the vertex range
    xs, mus = np.asarray(mf.xs, dtype=float), np.asarray(mf.mus, dtype=float)
    return fuzz.interp_membership(xs, mus, x, zero_outside_x=False)


def membership_degree(mf: MembershipFunction, x: float) -> float:
    return float(_degrees(mf, x))


def _segment_crossing(x0: float, a0: float, b0: float, x1: float, a1: float, b1: float) -> float | None:
    """x in (x0, x1) where two linear functions a and b cross, if any."""
    d0, d1 = a0 - b0, a1 - b1
    if d0 == 0.0 or d1 == 0.0 or (d0 > 0) == (d1 > 0):
        return None
    return x0 + (x1 - x0) * d0 / (d0 - d1)


def _breakpoints(fns: Sequence[MembershipFunction], extra: Iterable[float] = ()) -> np.ndarray:
    xs: set[float] = set(extra)
    for f in fns:
        xs.update(f.xs)
    grid = np.array(sorted(xs), dtype=float)
    crossings: list[float] = []
    for i, f in enumerate(fns):
        for g in fns[i + 1:]:
            fv = _degrees(f, grid)
            gv = _degrees(g, grid)
            for k in range(len(grid) - 1):
                c = _segment_crossing(grid[k], fv[k], gv[k], grid[k + 1], fv[k + 1], gv[k + 1])
                if c is not None:
                    crossings.append(c)
    if crossings:
        grid = np.unique(np.concatenate([grid, np.array(crossings)]))
    return grid


def possibility(dist: MembershipFunction, term: MembershipFunction) -> float:
    """sup_x min(dist(x), term(x)), evaluated on all breakpoints and crossings."""
    lo, hi = dist.support
    grid = _breakpoints([dist, term])
    grid = grid[(grid >= lo) & (grid <= hi)]
    if grid.size == 0:
        return 0.0
    vals = np.minimum(_degrees(dist, grid), _degrees(term, grid))
    return float(vals.max())


def fuzzify(var: LinguisticVariable, value: FuzzyValue) -> dict[str, float]:
    lo, hi = var.universe
    if isinstance(value, Crisp):
        if not lo <= value.x <= hi:
            raise OutOfUniverse(f"{var.name}: {value.x} outside [{lo}, {hi}]")
        return {name: membership_degree(mf, value.x) for name, mf in var.terms.items()}

    d_lo, d_hi = value.mf.support
    if d_lo < lo or d_hi > hi:
        raise OutOfUniverse(f"{var.name}: distribution support [{d_lo}, {d_hi}] outside [{lo}, {hi}]")
    return {name: possibility(value.mf, mf) for name, mf in var.terms.items()}


# ── Rules ─────────────────────────────────────────────────────────────────────

def fold_and(ops: OperatorSet, degrees: Sequence[float]) -> float:
    if ops.and_op == "min":
        return min(degrees)
    out = 1.0
    for d in degrees:
        out *= d
    return out


def fold_or(ops: OperatorSet, degrees: Sequence[float]) -> float:
    if ops.or_op == "max":
        return max(degrees)
    out = 0.0
    for d in degrees:
        out = out + d - out * d
    return out


def firing_strengths(rs: RuleSet, input_degrees: Mapping[str, Mapping[str, float]], ops: OperatorSet) -> list[float]:
    strengths: list[float] = []
    for rule in rs.rules:
        degrees: list[float] = []
        for var, term in rule.antecedent:
            try:
                degrees.append(input_degrees[var][term])
            except KeyError:
                raise UnresolvedVariable(f"no degree for {var}.{term}") from None
        strengths.append(fold_and(ops, degrees) if rule.connective == "and" else fold_or(ops, degrees))
    return strengths


def apply_rules(
    rs: RuleSet,
    input_degrees: Mapping[str, Mapping[str, float]],
    ops: OperatorSet,
) -> MembershipFunction:
    """Clip each consequent at its firing strength and combine with or_op."""
    out_var = rs.output
    lo, hi = out_var.universe
    strengths = firing_strengths(rs, input_degrees, ops)

    clipped: list[tuple[MembershipFunction, float]] = [
        (out_var.terms[rule.consequent[1]], s)
        for rule, s in zip(rs.rules, strengths)
        if s > 0.0
    ]
    if not clipped:
        return MembershipFunction.zero(lo, hi)

    terms = [mf for mf, _ in clipped]
    # every term may cross every clip level, not only its own
    levels = {s for _, s in clipped}
    clip_points: list[float] = []
    for mf in terms:
        xs, mus = mf.xs, mf.mus
        for s in levels:
            for k in range(len(xs) - 1):
                c = _segment_crossing(xs[k], mus[k], s, xs[k + 1], mus[k + 1], s)
                if c is not None:
                    clip_points.append(c)
    grid = _breakpoints(terms, extra=[lo, hi, *clip_points])
    grid = grid[(grid >= lo) & (grid <= hi)]

    if ops.or_op == "probabilistic_sum":
        fine = [grid[:1]]
        for a, b in zip(grid[:-1], grid[1:]):
            fine.append(np.linspace(a, b, _PROBSUM_REFINEMENT + 2)[1:])
        grid = np.concatenate(fine)

    layers = np.vstack([np.minimum(_degrees(mf, grid), s) for mf, s in clipped])
    if ops.or_op == "max":
        mu = layers.max(axis=0)
    else:
        mu = np.zeros_like(grid)
        for layer in layers:
            mu = mu + layer - mu * layer
    mu = np.clip(mu, 0.0, 1.0)
    return MembershipFunction(vertices=tuple(zip(grid.tolist(), mu.tolist())))


def infer(rs: RuleSet, input_degrees: Mapping[str, Mapping[str, float]], ops: OperatorSet) -> float:
    """Rules followed by defuzzification; the only entry point for `height`."""
    if ops.defuzz != "height":
        return defuzzify(apply_rules(rs, input_degrees, ops), ops.defuzz)

    out_var = rs.output
    num = den = 0.0
    for rule, s in zip(rs.rules, firing_strengths(rs, input_degrees, ops)):
        if s > 0.0:
            num += s * defuzzify(out_var.terms[rule.consequent[1]], "mean_of_maxima")
            den += s
    if den == 0.0:
        raise DegenerateSet("no rule fired")
    return num / den


# ── Aggregation ───────────────────────────────────────────────────────────────

def aggregate(ops: OperatorSet, scored: Sequence[tuple[float, float]]) -> float:
    if not scored:
        raise EmptyInput("aggregate needs at least one (score, weight) pair")
    scores = [s for s, _ in scored]
    if ops.aggregation == "min":
        return min(scores)
    if ops.aggregation == "max":
        return max(scores)

    weights = [w for _, w in scored]
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    total = sum(weights)
    if total == 0.0:
        raise AllZeroWeights(f"{ops.aggregation} needs a positive weight")

    if ops.aggregation == "weighted_mean":
        return min(1.0, max(0.0, sum(s * w for s, w in scored) / total))

    max_w = max(weights)
    return min(exponent_weight(s, w, max_w, ops.weighing_scheme) for s, w in scored)


def exponent_weight(score: float, weight: float, max_weight: float, scheme: str = "normalized") -> float:
    """Raise a score toward 1 for unimportant constraints."""
    power = weight / max_weight if scheme == "normalized" and max_weight > 0 else weight
    if power == 0.0:
        return 1.0
    return score ** power


# ── Defuzzification ───────────────────────────────────────────────────────────

def defuzzify(mf: MembershipFunction, method: str) -> float:
    x = np.asarray(mf.xs, dtype=float)
    mu = np.asarray(mf.mus, dtype=float)
    if not mu.any():
        raise DegenerateSet("cannot defuzzify an all-zero set")

    if method == "centroid":
        area = float(np.sum(np.diff(x) * (mu[:-1] + mu[1:]) / 2.0))
        if area == 0.0:
            # spikes of zero width: fall back to the maxima
            return defuzzify(mf, "mean_of_maxima")
        # per-segment trapezoid moments, exact for piecewise-linear sets
        return float(fuzz.defuzz(x, mu, "centroid"))

    if method == "mean_of_maxima":
        top = mu.max()
        at_top = x[mu == top]
        return float((at_top[0] + at_top[-1]) / 2.0)

    if method == "height":
        raise ValueError("height defuzzification works on rule firings; use infer()")
    raise ValueError(f"unknown defuzzification method {method!r}")


def symmetric_axis(mf: MembershipFunction) -> float | None:
    """Axis of mirror symmetry of the vertex list, if it has one."""
    v = mf.vertices
    axis = (v[0][0] + v[-1][0]) / 2.0
    for (xa, ma), (xb, mb) in zip(v, reversed(v)):
        if not math.isclose(xa + xb, 2 * axis, abs_tol=1e-12) or ma != mb:
            return None
    return axis
