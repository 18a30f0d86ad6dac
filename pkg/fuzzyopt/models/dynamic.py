"""
Specialization expressions, template constraints,
generation rules, domain objects and violation records.

Expressions and predicates are declarative data so a knowledge base can be
stored as JSON and validated without running anything.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Annotated, Any, Hashable, Literal, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from fuzzyopt.models.constraint import CompareConstraint
from fuzzyopt.models.fuzzy import OperatorSet


# ── Specialization expressions ────────────────────────────────────────────────

class AttrExpr(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: Literal["attr"] = "attr"
    name: str                       # "x", or "first.x" / "second.x" inside pair rules


class ConstExpr(BaseModel):
    model_config = ConfigDict(frozen=True)

    type:  Literal["const"] = "const"
    value: float


class BinaryExpr(BaseModel):
    model_config = ConfigDict(frozen=True)

    type:  Literal["binary"] = "binary"
    op:    Literal["sub", "add", "max", "min"]
    left:  "Expression"
    right: "Expression"


class AbsExpr(BaseModel):
    model_config = ConfigDict(frozen=True)

    type: Literal["abs"] = "abs"
    arg:  "Expression"


class RangeAggregation(BaseModel):
    """Aggregate over a run of values held in a list attribute.

    Items may be numbers or mappings; with `field` set the value is read from
    each mapping. `start`/`stop` slice the run.
    """
    model_config = ConfigDict(frozen=True)

    type:      Literal["range"] = "range"
    kind:      Literal["sum", "count", "min", "max"]
    attribute: str
    field:     Optional[str] = None
    start:     Optional[int] = None
    stop:      Optional[int] = None


Expression = Annotated[
    Union[AttrExpr, ConstExpr, BinaryExpr, AbsExpr, RangeAggregation],
    Field(discriminator="type"),
]
BinaryExpr.model_rebuild()
AbsExpr.model_rebuild()


def expression_attributes(expr: Any) -> set[str]:
    """Every attribute name an expression reads."""
    if isinstance(expr, AttrExpr):
        return {expr.name}
    if isinstance(expr, RangeAggregation):
        return {expr.attribute}
    if isinstance(expr, BinaryExpr):
        return expression_attributes(expr.left) | expression_attributes(expr.right)
    if isinstance(expr, AbsExpr):
        return expression_attributes(expr.arg)
    return set()


# ── Condition predicates ──────────────────────────────────────────────────────

class HasPredicate(BaseModel):
    model_config = ConfigDict(frozen=True)

    type:      Literal["has"] = "has"
    attribute: str


class MissingPredicate(BaseModel):
    model_config = ConfigDict(frozen=True)

    type:      Literal["missing"] = "missing"
    attribute: str


class ComparePredicate(BaseModel):
    model_config = ConfigDict(frozen=True)

    type:      Literal["compare"] = "compare"
    attribute: str
    op:        Literal["<=", "<", ">=", ">", "=", "!="]
    value:     Union[float, str, bool]


Predicate = Annotated[Union[HasPredicate, MissingPredicate, ComparePredicate], Field(discriminator="type")]


# ── Templates and rules ───────────────────────────────────────────────────────

class TemplateConstraint(BaseModel):
    """A compare constraint tuned at a reference value plus the expression
    that produces its left-hand value from instance data."""
    model_config = ConfigDict(frozen=True)

    name:           str
    base:           CompareConstraint
    specialization: Expression


class GenerationRule(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:      str
    template:  str                          # TemplateConstraint name
    kind:      str                          # domain object kind the rule ranges over
    arity:     Literal[1, 2] = 1            # 2 = adjacent pairs within a unit
    condition: tuple[Predicate, ...] = ()   # conjunction; empty always holds


class DomainSchema(BaseModel):
    """Declared attributes per object kind."""
    model_config = ConfigDict(frozen=True)

    kinds: dict[str, tuple[str, ...]]


class KnowledgeBase(BaseModel):
    model_config = ConfigDict(frozen=True)

    name:          str
    operator_set:  OperatorSet = OperatorSet()
    domain_schema: DomainSchema
    templates:     tuple[TemplateConstraint, ...]
    rules:         tuple[GenerationRule, ...]

    def template(self, name: str) -> TemplateConstraint:
        for t in self.templates:
            if t.name == name:
                return t
        raise KeyError(name)


# ── Runtime records ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class DomainObject:
    """One schedule object as seen by generation rules."""
    kind:       str
    key:        str
    unit:       str
    index:      int
    attributes: Mapping[str, Any]
    positions:  frozenset[Hashable] = field(default_factory=frozenset)


@dataclass(frozen=True)
class SpecializedConstraint:
    constraint: CompareConstraint
    value:      float


@dataclass(frozen=True)
class GeneratedConstraint:
    rule:        str
    template:    str
    key:         tuple[str, ...]
    unit:        str
    positions:   frozenset[Hashable]
    specialized: SpecializedConstraint


@dataclass(frozen=True, order=True)
class ViolationRecord:
    weighted_score: float
    constraint:     str
    positions:      tuple[Hashable, ...]
    score:          float = field(compare=False)
    key:            tuple[str, ...] = field(compare=False)
