"""
Specializes templates to instance data, generates
constraint instances from rules, and maintains the evaluation tree.

Tree shape is root → unit nodes → leaves. Every node keeps an associative
partial state of its aggregation, recomputed from its children in a fixed
order, so an incremental update produces exactly the numbers a fresh build
would.
"""
from __future__ import annotations
import logging
from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Optional, Protocol, Sequence

from fuzzyopt.config import get_settings
from fuzzyopt.errors import AllZeroWeights, EmptyInput, KnowledgeBaseError, MissingAttribute, SchemaMismatch, UnknownPosition
from fuzzyopt.models.dynamic import (
    AbsExpr,
    AttrExpr,
    BinaryExpr,
    ComparePredicate,
    ConstExpr,
    DomainObject,
    GeneratedConstraint,
    GenerationRule,
    HasPredicate,
    KnowledgeBase,
    MissingPredicate,
    RangeAggregation,
    SpecializedConstraint,
    TemplateConstraint,
    ViolationRecord,
    expression_attributes,
)
from fuzzyopt.models.fuzzy import Crisp, OperatorSet
from fuzzyopt.services.constraint_service import evaluate_compare
from fuzzyopt.services.fuzzy_service import aggregate, exponent_weight

log = logging.getLogger(__name__)


class DomainView(Protocol):
    """What the evaluator needs to know about a domain instance."""

    def objects(self, inst: Any) -> Sequence[DomainObject]: ...

    def positions(self, inst: Any) -> Iterable[Hashable]: ...


class _EmptyRange(Exception):
    """min/max over an empty run; the generating rule is skipped."""


# ── Specialization ────────────────────────────────────────────────────────────

def _lookup(ctx: Mapping[str, Any], name: str) -> Any:
    try:
        value = ctx[name]
    except KeyError:
        raise MissingAttribute(f"attribute {name!r} is not bound") from None
    if value is None:
        raise MissingAttribute(f"attribute {name!r} is unset")
    return value


def _range_value(expr: RangeAggregation, ctx: Mapping[str, Any]) -> float:
    run = list(_lookup(ctx, expr.attribute))[expr.start:expr.stop]
    if expr.field is not None:
        run = [item[expr.field] for item in run]
    if expr.kind == "count":
        return float(len(run))
    if expr.kind == "sum":
        return float(sum(run))
    if not run:
        raise _EmptyRange(expr.attribute)
    return float(min(run) if expr.kind == "min" else max(run))


def evaluate_expression(expr: Any, ctx: Mapping[str, Any]) -> float:
    if isinstance(expr, ConstExpr):
        return expr.value
    if isinstance(expr, AttrExpr):
        return float(_lookup(ctx, expr.name))
    if isinstance(expr, RangeAggregation):
        return _range_value(expr, ctx)
    if isinstance(expr, AbsExpr):
        return abs(evaluate_expression(expr.arg, ctx))
    if isinstance(expr, BinaryExpr):
        a = evaluate_expression(expr.left, ctx)
        b = evaluate_expression(expr.right, ctx)
        if expr.op == "sub":
            return a - b
        if expr.op == "add":
            return a + b
        return max(a, b) if expr.op == "max" else min(a, b)
    raise TypeError(f"unknown expression {expr!r}")


def specialize(t: TemplateConstraint, ctx: Mapping[str, Any]) -> SpecializedConstraint:
    """Bind a template to instance data. The template is left untouched."""
    return SpecializedConstraint(constraint=t.base, value=evaluate_expression(t.specialization, ctx))


def score_specialized(sc: SpecializedConstraint, ops: OperatorSet) -> float:
    return evaluate_compare(sc.constraint, Crisp(x=sc.value), ops)


# ── Generation ────────────────────────────────────────────────────────────────

_PREDICATE_OPS = {
    "<=": lambda a, b: a <= b,
    "<":  lambda a, b: a < b,
    ">=": lambda a, b: a >= b,
    ">":  lambda a, b: a > b,
    "=":  lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def _holds(rule: GenerationRule, ctx: Mapping[str, Any]) -> bool:
    for p in rule.condition:
        present = ctx.get(p.attribute) is not None
        if isinstance(p, HasPredicate) and not present:
            return False
        if isinstance(p, MissingPredicate) and present:
            return False
        if isinstance(p, ComparePredicate):
            if not present or not _PREDICATE_OPS[p.op](ctx[p.attribute], p.value):
                return False
    return True


def _pair_context(a: DomainObject, b: DomainObject) -> dict[str, Any]:
    ctx: dict[str, Any] = {f"first.{k}": v for k, v in a.attributes.items()}
    ctx.update({f"second.{k}": v for k, v in b.attributes.items()})
    return ctx


def _check_schema(kb: KnowledgeBase, objects: Sequence[DomainObject]) -> None:
    kinds = kb.domain_schema.kinds
    for obj in objects:
        if obj.kind not in kinds:
            raise SchemaMismatch(f"object {obj.key!r} has undeclared kind {obj.kind!r}")
        extra = set(obj.attributes) - set(kinds[obj.kind])
        if extra:
            raise SchemaMismatch(f"object {obj.key!r} carries undeclared attributes {sorted(extra)}")


def _tuples(rule: GenerationRule, objects: Sequence[DomainObject]):
    of_kind = [o for o in objects if o.kind == rule.kind]
    if rule.arity == 1:
        for o in of_kind:
            yield (o,), dict(o.attributes)
        return
    by_unit: dict[str, list[DomainObject]] = {}
    for o in of_kind:
        by_unit.setdefault(o.unit, []).append(o)
    for unit_objs in by_unit.values():
        unit_objs.sort(key=lambda o: o.index)
        for a, b in zip(unit_objs, unit_objs[1:]):
            yield (a, b), _pair_context(a, b)


def generate_constraints(kb: KnowledgeBase, objects: Sequence[DomainObject]) -> list[GeneratedConstraint]:
    """One specialized instance per rule and satisfying object tuple, in rule then object order."""
    _check_schema(kb, objects)
    out: list[GeneratedConstraint] = []
    for rule in kb.rules:
        template = kb.template(rule.template)
        for objs, ctx in _tuples(rule, objects):
            if not _holds(rule, ctx):
                continue
            try:
                sc = specialize(template, ctx)
            except _EmptyRange:
                continue
            out.append(GeneratedConstraint(
                rule=rule.name,
                template=template.name,
                key=(rule.name, *(o.key for o in objs)),
                unit=objs[0].unit,
                positions=frozenset().union(*(o.positions for o in objs)),
                specialized=sc,
            ))
    return out


def validate_knowledge_base(kb: KnowledgeBase) -> list[str]:
    """Every broken reference in the knowledge base, not just the first."""
    problems: list[str] = []
    templates = {t.name for t in kb.templates}
    if len(templates) != len(kb.templates):
        problems.append("duplicate template names")
    rule_names = [r.name for r in kb.rules]
    if len(set(rule_names)) != len(rule_names):
        problems.append("duplicate rule names")
    kinds = kb.domain_schema.kinds
    for rule in kb.rules:
        if rule.template not in templates:
            problems.append(f"rule {rule.name!r}: unknown template {rule.template!r}")
            continue
        if rule.kind not in kinds:
            problems.append(f"rule {rule.name!r}: unknown object kind {rule.kind!r}")
            continue
        declared = set(kinds[rule.kind])
        if rule.arity == 2:
            declared = {f"{side}.{a}" for side in ("first", "second") for a in declared}
        used = expression_attributes(kb.template(rule.template).specialization)
        used |= {p.attribute for p in rule.condition}
        for attr in sorted(used - declared):
            problems.append(f"rule {rule.name!r}: attribute {attr!r} not in schema of {rule.kind!r}")
    return problems


# ── Partial aggregation ───────────────────────────────────────────────────────

def _leaf_partial(agg: str, score: float, weight: float, scheme: str) -> tuple[float, float]:
    if agg == "weighted_mean":
        return score * weight, weight
    if agg == "exponent_weighted_min":
        # min over s^w; the normalized scheme takes the 1/max_w root at the top
        return (1.0 if weight == 0.0 else score ** weight), weight
    return score, weight


def _combine(agg: str, parts: Iterable[tuple[float, float]]) -> Optional[tuple[float, float]]:
    acc: Optional[tuple[float, float]] = None
    for p in parts:
        if acc is None:
            acc = p
        elif agg == "weighted_mean":
            acc = (acc[0] + p[0], acc[1] + p[1])
        elif agg == "max":
            acc = (max(acc[0], p[0]), 0.0)
        else:
            acc = (min(acc[0], p[0]), max(acc[1], p[1]))
    return acc


def _finish(agg: str, scheme: str, state: Optional[tuple[float, float]]) -> float:
    if state is None:
        raise EmptyInput("nothing to aggregate")
    value, weight = state
    if agg == "weighted_mean":
        if weight == 0.0:
            raise AllZeroWeights("weighted_mean needs a positive weight")
        return min(1.0, max(0.0, value / weight))
    if agg == "exponent_weighted_min":
        if weight == 0.0:
            raise AllZeroWeights("exponent_weighted_min needs a positive weight")
        return value if scheme == "raw" else value ** (1.0 / weight)
    return value


# ── Evaluation tree ───────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Leaf:
    generated:  GeneratedConstraint
    score:      float
    importance: float

    @property
    def key(self) -> tuple[str, ...]:
        return self.generated.key

    @property
    def hard_violation(self) -> bool:
        return self.score == 0.0 and self.importance > 0.0


class EvaluationTree:
    """Evaluated constraint instances of one instantiation, grouped by unit."""

    def __init__(
        self,
        kb: KnowledgeBase,
        view: DomainView,
        inst: Any,
        violation_threshold: Optional[float] = None,
    ) -> None:
        self.kb = kb
        self.view = view
        self.inst = inst
        self.threshold = get_settings().violation_threshold if violation_threshold is None else violation_threshold
        self.recomputed_leaves = 0
        self.leaves: dict[tuple[str, ...], Leaf] = {}
        self.units: dict[str, list[tuple[str, ...]]] = {}
        self.unit_partials: dict[str, Optional[tuple[float, float]]] = {}
        self.index: dict[Hashable, set[tuple[str, ...]]] = {}
        self.dirty: set[str] = set()
        self.root_score = 1.0
        self._rebuild(generate_constraints(kb, view.objects(inst)), reuse=None, touched=frozenset())

    # ── internals ────────────────────────────────────────────────────────────

    def _score_leaf(self, g: GeneratedConstraint) -> Leaf:
        self.recomputed_leaves += 1
        return Leaf(
            generated=g,
            score=score_specialized(g.specialized, self.kb.operator_set),
            importance=g.specialized.constraint.importance,
        )

    def _rebuild(
        self,
        generated: Sequence[GeneratedConstraint],
        reuse: Optional[Mapping[tuple[str, ...], Leaf]],
        touched: frozenset,
    ) -> None:
        old_units = self.units
        leaves: dict[tuple[str, ...], Leaf] = {}
        units: dict[str, list[tuple[str, ...]]] = {}
        index: dict[Hashable, set[tuple[str, ...]]] = {}
        for g in generated:
            cached = reuse.get(g.key) if reuse is not None else None
            if (
                cached is not None
                and not (g.positions & touched)
                and cached.generated.specialized == g.specialized
            ):
                leaf = cached
            else:
                leaf = self._score_leaf(g)
                self.dirty.add(g.unit)
            leaves[g.key] = leaf
            units.setdefault(g.unit, []).append(g.key)
            for pos in g.positions:
                index.setdefault(pos, set()).add(g.key)

        for unit, keys in units.items():
            if old_units.get(unit) != keys:
                self.dirty.add(unit)

        self.leaves, self.units, self.index = leaves, units, index
        self._reaggregate()

    def _reaggregate(self) -> None:
        ops = self.kb.operator_set
        agg, scheme = ops.aggregation, ops.weighing_scheme
        for unit in [u for u in self.unit_partials if u not in self.units]:
            del self.unit_partials[unit]
        for unit in self.units:
            if unit in self.dirty or unit not in self.unit_partials:
                self.unit_partials[unit] = _combine(agg, (
                    _leaf_partial(agg, leaf.score, leaf.importance, scheme)
                    for leaf in (self.leaves[k] for k in self.units[unit])
                ))
        self.dirty.clear()
        state = _combine(agg, (self.unit_partials[u] for u in self.units))
        # an instantiation without constraint instances violates nothing
        self.root_score = 1.0 if state is None else _finish(agg, scheme, state)

    # ── public API ───────────────────────────────────────────────────────────

    @property
    def valid(self) -> bool:
        return not any(leaf.hard_violation for leaf in self.leaves.values())

    def leaves_at(self, position: Hashable) -> set[tuple[str, ...]]:
        return set(self.index.get(position, ()))

    def fork(self) -> "EvaluationTree":
        """Independent copy; leaves are immutable so only containers are copied."""
        twin = object.__new__(EvaluationTree)
        twin.__dict__.update(self.__dict__)
        twin.leaves = dict(self.leaves)
        twin.units = {u: list(keys) for u, keys in self.units.items()}
        twin.unit_partials = dict(self.unit_partials)
        twin.index = {p: set(keys) for p, keys in self.index.items()}
        twin.dirty = set()
        return twin

    def invalidate_and_reevaluate(self, inst: Any, changed: Iterable[Hashable]) -> tuple[float, list[ViolationRecord]]:
        """Re-score only leaves touching `changed`; the result equals a fresh build."""
        touched = frozenset(changed)
        if touched:
            valid_positions = set(self.view.positions(inst))
            unknown = touched - valid_positions
            if unknown:
                raise UnknownPosition(f"unknown positions {sorted(unknown, key=repr)[:3]}")
        self.inst = inst
        if not touched:
            return self.root_score, self.violations()
        before = self.recomputed_leaves
        self._rebuild(generate_constraints(self.kb, self.view.objects(inst)), reuse=self.leaves, touched=touched)
        log.debug("Re-evaluated %d leaves for %d changed positions", self.recomputed_leaves - before, len(touched))
        return self.root_score, self.violations()

    def violations(self) -> list[ViolationRecord]:
        """Leaves whose weighted score is below the threshold, worst first."""
        scheme = self.kb.operator_set.weighing_scheme
        max_w = max((leaf.importance for leaf in self.leaves.values()), default=0.0)
        records: list[ViolationRecord] = []
        for leaf in self.leaves.values():
            weighted = exponent_weight(leaf.score, leaf.importance, max_w, scheme)
            if weighted < self.threshold:
                records.append(ViolationRecord(
                    weighted_score=weighted,
                    constraint=leaf.generated.template,
                    positions=tuple(sorted(leaf.generated.positions)),
                    score=leaf.score,
                    key=leaf.key,
                ))
        records.sort()
        return records

    def snapshot_bindings(self) -> list[tuple[str, str, float]]:
        """(constraint, leaf key, specialized value) per leaf, in tree order."""
        return [
            (leaf.generated.template, "/".join(leaf.key), leaf.generated.specialized.value)
            for unit in self.units for leaf in (self.leaves[k] for k in self.units[unit])
        ]


def build_tree(kb: KnowledgeBase, view: DomainView, inst: Any, violation_threshold: Optional[float] = None) -> EvaluationTree:
    problems = validate_knowledge_base(kb)
    if problems:
        raise KnowledgeBaseError("; ".join(problems))
    tree = EvaluationTree(kb, view, inst, violation_threshold)
    log.debug("Built tree %s: %d leaves, root %.6f", kb.name, len(tree.leaves), tree.root_score)
    return tree


def evaluate_flat(kb: KnowledgeBase, view: DomainView, inst: Any) -> float:
    """Root score without a tree: every instance scored directly, one aggregate."""
    generated = generate_constraints(kb, view.objects(inst))
    if not generated:
        return 1.0
    scored = [(score_specialized(g.specialized, kb.operator_set), g.specialized.constraint.importance) for g in generated]
    return aggregate(kb.operator_set, scored)


def worst_conflicts(v: Sequence[ViolationRecord], k: int, repairable: Optional[Iterable[str]] = None) -> list[ViolationRecord]:
    """The k lowest weighted records whose constraint type can be repaired."""
    if k < 1:
        raise ValueError("k must be at least 1")
    allowed = None if repairable is None else set(repairable)
    picked = [r for r in sorted(v) if allowed is None or r.constraint in allowed]
    return picked[:k]

