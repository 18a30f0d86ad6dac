"""
Compare and concat nodes, sets of constraints and
their evaluated counterparts, plus the default deviation/satisfaction terms.
"""
from __future__ import annotations
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from fuzzyopt.models.fuzzy import LinguisticVariable, MembershipFunction, OperatorSet, RuleSet

Dilatation = Literal["crisp", "fuzzy", "mixed"]
CompareOp  = Literal["<=", "<", ">=", ">", "="]

RAMP_FLOOR = 1e-6


def default_ramp(compare_value: float) -> float:
    """Half the magnitude of the compare value, floored for templates tuned at zero."""
    return max(abs(compare_value) * 0.5, RAMP_FLOOR)


class CompareConstraint(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind:          Literal["compare"] = "compare"
    name:          str
    importance:    float = Field(1.0, ge=0.0)
    dilatation:    Dilatation = "fuzzy"
    comment:       str = ""
    variable:      str
    op:            CompareOp = "<="
    compare_value: float = 0.0
    ramp_width:    Optional[float] = Field(None, gt=0.0)
    tuned:         bool = False          # individually fine-tuned; soften/harden skips it

    @property
    def ramp(self) -> float:
        return self.ramp_width if self.ramp_width is not None else default_ramp(self.compare_value)


class ConcatConstraint(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind:       Literal["concat"] = "concat"
    name:       str
    importance: float = Field(1.0, ge=0.0)
    dilatation: Dilatation = "fuzzy"
    comment:    str = ""
    left:       "ConstraintNode"
    right:      "ConstraintNode"
    op:         Literal["and", "or"] = "and"


ConstraintNode = Annotated[Union[CompareConstraint, ConcatConstraint], Field(discriminator="kind")]
ConcatConstraint.model_rebuild()


def walk(node: CompareConstraint | ConcatConstraint):
    """Pre-order traversal of a constraint tree."""
    yield node
    if isinstance(node, ConcatConstraint):
        yield from walk(node.left)
        yield from walk(node.right)


class SetOfConstraints(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:          str
    roots:         tuple[ConstraintNode, ...]
    operator_set:  OperatorSet = OperatorSet()
    parameter_set: tuple[LinguisticVariable, ...] = ()
    ruleset:       Optional[RuleSet] = None    # user-defined rules replace the generated defaults

    @model_validator(mode="after")
    def _check(self) -> "SetOfConstraints":
        names: set[str] = set()
        known = {v.name for v in self.parameter_set}
        for root in self.roots:
            for node in walk(root):
                if node.name in names:
                    raise ValueError(f"{self.name}: duplicate constraint name {node.name!r}")
                names.add(node.name)
                if isinstance(node, CompareConstraint) and node.variable not in known:
                    raise ValueError(f"{self.name}: constraint {node.name!r} uses unknown variable {node.variable!r}")
        if self.ruleset is not None and DEVIATION not in {v.name for v in self.ruleset.variables}:
            raise ValueError(f"{self.name}: rule set has no {DEVIATION!r} input variable")
        return self

    def compares(self) -> list[CompareConstraint]:
        return [n for root in self.roots for n in walk(root) if isinstance(n, CompareConstraint)]


class EvaluatedConstraint(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:           str
    importance:     float
    score:          float
    hard_violation: bool
    children:       tuple["EvaluatedConstraint", ...] = ()

    def leaves(self):
        if not self.children:
            yield self
        for child in self.children:
            yield from child.leaves()


class SetOfEvalConstraints(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:    str
    score:   float
    valid:   bool
    results: tuple[EvaluatedConstraint, ...]

    def hard_violations(self) -> list[str]:
        out: list[str] = []
        for r in self.results:
            stack = [r]
            while stack:
                node = stack.pop()
                if node.hard_violation:
                    out.append(node.name)
                stack.extend(node.children)
        return sorted(out)


# ── Default term templates ────────────────────────────────────────────────────

DEVIATION = "deviation"
SATISFACTION = "satisfaction"

SATISFACTION_PEAKS: dict[str, float] = {
    "very_bad": 0.0, "bad": 0.25, "zero": 0.5, "good": 0.75, "very_good": 1.0,
}

# Peaks on the violating side lie on the line satisfaction = 1 - deviation,
# so height defuzzification interpolates a linear ramp.
DEVIATION_PEAKS: dict[str, float] = {
    "negative_big": -1.0, "negative_medium": -0.75, "negative_small": -0.5,
    "zero": 0.0,
    "positive_small": 0.5, "positive_medium": 0.75, "positive_big": 1.0,
}


def _partition(peaks: dict[str, float]) -> dict[str, MembershipFunction]:
    """Triangles peaking at each point, feet at the neighbours' peaks."""
    ordered = sorted(peaks.items(), key=lambda kv: kv[1])
    terms: dict[str, MembershipFunction] = {}
    for i, (name, p) in enumerate(ordered):
        left = ordered[i - 1][1] if i > 0 else p
        right = ordered[i + 1][1] if i + 1 < len(ordered) else p
        terms[name] = MembershipFunction.triangle(left, p, right)
    return terms


def satisfaction_variable() -> LinguisticVariable:
    return LinguisticVariable(name=SATISFACTION, universe=(0.0, 1.0), terms=_partition(SATISFACTION_PEAKS))


def deviation_variable() -> LinguisticVariable:
    return LinguisticVariable(name=DEVIATION, universe=(-1.0, 1.0), terms=_partition(DEVIATION_PEAKS))
