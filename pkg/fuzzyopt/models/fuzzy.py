"""
Membership functions, linguistic variables,
fuzzy values, operator sets and rule sets. All immutable after construction.
"""
from __future__ import annotations
import math
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

Vertex = tuple[float, float]


class MembershipFunction(BaseModel):
    """Piecewise-linear membership function given by (x, mu) vertices.

    Outside the first/last vertex the boundary mu is held constant, so a
    function ending at mu = 0 is zero there and a shoulder stays at its level.
    """
    model_config = ConfigDict(frozen=True)

    vertices: tuple[Vertex, ...]

    @field_validator("vertices")
    @classmethod
    def _check_vertices(cls, v: tuple[Vertex, ...]) -> tuple[Vertex, ...]:
        if len(v) < 2:
            raise ValueError("membership function needs at least 2 vertices")
        for (x0, _), (x1, _) in zip(v, v[1:]):
            if not x1 > x0:
                raise ValueError(f"vertex x values must be strictly increasing ({x0} >= {x1})")
        for x, mu in v:
            if not math.isfinite(x):
                raise ValueError(f"vertex x must be finite, got {x}")
            if not 0.0 <= mu <= 1.0:
                raise ValueError(f"mu must lie in [0, 1], got {mu}")
        return tuple((float(x), float(mu)) for x, mu in v)

    # ── constructors ─────────────────────────────────────────────────────────

    @classmethod
    def triangle(cls, a: float, b: float, c: float) -> "MembershipFunction":
        """Triangle with feet a, c and apex b; a == b or b == c gives a shoulder."""
        if not (a <= b <= c) or a == c:
            raise ValueError(f"invalid triangle ({a}, {b}, {c})")
        pts: list[Vertex] = []
        if a < b:
            pts.append((a, 0.0))
        pts.append((b, 1.0))
        if b < c:
            pts.append((c, 0.0))
        return cls(vertices=tuple(pts))

    @classmethod
    def trapezoid(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        if not (a <= b <= c <= d) or a == d:
            raise ValueError(f"invalid trapezoid ({a}, {b}, {c}, {d})")
        pts: list[Vertex] = []
        if a < b:
            pts.append((a, 0.0))
        pts.append((b, 1.0))
        if c > b:
            pts.append((c, 1.0))
        if d > c:
            pts.append((d, 0.0))
        return cls(vertices=tuple(pts))

    @classmethod
    def step(cls, at: float, rising: bool = True) -> "MembershipFunction":
        """Crisp step at `at`; the jump spans one ulp."""
        nxt = math.nextafter(at, math.inf)
        if rising:
            return cls(vertices=((at, 0.0), (nxt, 1.0)))
        return cls(vertices=((at, 1.0), (nxt, 0.0)))

    @classmethod
    def zero(cls, lo: float, hi: float) -> "MembershipFunction":
        return cls(vertices=((lo, 0.0), (hi, 0.0)))

    # ── accessors ────────────────────────────────────────────────────────────

    @property
    def xs(self) -> tuple[float, ...]:
        return tuple(x for x, _ in self.vertices)

    @property
    def mus(self) -> tuple[float, ...]:
        return tuple(mu for _, mu in self.vertices)

    @property
    def support(self) -> tuple[float, float]:
        return self.vertices[0][0], self.vertices[-1][0]

    @property
    def height(self) -> float:
        return max(self.mus)


class LinguisticVariable(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:     str
    universe: tuple[float, float]
    terms:    dict[str, MembershipFunction]

    @model_validator(mode="after")
    def _check_terms(self) -> "LinguisticVariable":
        lo, hi = self.universe
        if not lo < hi:
            raise ValueError(f"{self.name}: universe lower bound must be below upper bound")
        if not self.terms:
            raise ValueError(f"{self.name}: at least one term is required")
        for term, mf in self.terms.items():
            s_lo, s_hi = mf.support
            if s_lo < lo or s_hi > hi:
                raise ValueError(f"{self.name}.{term}: support [{s_lo}, {s_hi}] leaves universe [{lo}, {hi}]")
        return self

    def __hash__(self) -> int:
        return hash((self.name, self.universe, tuple(sorted(self.terms.items(), key=lambda t: t[0]))))


class Crisp(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["crisp"] = "crisp"
    x:    float


class Distribution(BaseModel):
    """Possibility distribution; normalized to max mu = 1 on construction."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["distribution"] = "distribution"
    mf:   MembershipFunction

    @field_validator("mf")
    @classmethod
    def _normalize(cls, mf: MembershipFunction) -> MembershipFunction:
        top = mf.height
        if top <= 0.0:
            raise ValueError("possibility distribution must not be identically zero")
        if top == 1.0:
            return mf
        return MembershipFunction(vertices=tuple((x, mu / top) for x, mu in mf.vertices))


FuzzyValue = Annotated[Union[Crisp, Distribution], Field(discriminator="kind")]


class OperatorSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    and_op:          Literal["min", "product"] = "min"
    or_op:           Literal["max", "probabilistic_sum"] = "max"
    aggregation:     Literal["min", "max", "weighted_mean", "exponent_weighted_min"] = "weighted_mean"
    defuzz:          Literal["centroid", "mean_of_maxima", "height"] = "height"
    weighing_scheme: Literal["normalized", "raw"] = "normalized"


class Rule(BaseModel):
    model_config = ConfigDict(frozen=True)

    antecedent: tuple[tuple[str, str], ...]   # (variable, term) pairs
    connective: Literal["and", "or"] = "and"
    consequent: tuple[str, str]

    @field_validator("antecedent")
    @classmethod
    def _non_empty(cls, v: tuple[tuple[str, str], ...]) -> tuple[tuple[str, str], ...]:
        if not v:
            raise ValueError("rule antecedent must not be empty")
        return v

    def describe(self) -> str:
        cond = f" {self.connective.upper()} ".join(f"{var} is {term}" for var, term in self.antecedent)
        return f"IF {cond} THEN {self.consequent[0]} is {self.consequent[1]}"


class RuleSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    variables: tuple[LinguisticVariable, ...]
    rules:     tuple[Rule, ...]

    @model_validator(mode="after")
    def _check_references(self) -> "RuleSet":
        if not self.rules:
            raise ValueError("rule set needs at least one rule")
        known = {v.name: v for v in self.variables}
        for rule in self.rules:
            for var, term in (*rule.antecedent, rule.consequent):
                if var not in known:
                    raise ValueError(f"rule references unknown variable {var!r}")
                if term not in known[var].terms:
                    raise ValueError(f"rule references unknown term {var}.{term}")
        outputs = {r.consequent[0] for r in self.rules}
        if len(outputs) != 1:
            raise ValueError(f"rule set must have exactly one output variable, got {sorted(outputs)}")
        return self

    def variable(self, name: str) -> LinguisticVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    @property
    def output(self) -> LinguisticVariable:
        return self.variable(self.rules[0].consequent[0])

    def describe(self) -> list[str]:
        return [r.describe() for r in self.rules]
