"""
Shift scheduling: reference operation plan, hard-requirement checks,
initial solution generator, schedule evaluators and the knowledge base that
turns a schedule into runtime constraint instances.
"""
from __future__ import annotations
import logging
import random
from typing import Iterable, Optional, Sequence

from fuzzyopt.config import get_settings
from fuzzyopt.errors import InfeasibleOffspring, Unsatisfiable
from fuzzyopt.models.constraint import CompareConstraint
from fuzzyopt.models.dynamic import (
    AbsExpr,
    AttrExpr,
    BinaryExpr,
    DomainObject,
    DomainSchema,
    GenerationRule,
    KnowledgeBase,
    RangeAggregation,
    TemplateConstraint,
)
from fuzzyopt.models.fuzzy import OperatorSet
from fuzzyopt.models.schedule import (
    GROUPS,
    SHIFT_DURATIONS,
    SUBGROUPS,
    HardViolation,
    OperationPlan,
    PlanDay,
    Position,
    Requirement,
    Schedule,
    ShiftAssignment,
    default_duration,
)
from fuzzyopt.services.constraint_service import evaluate_compare

log = logging.getLogger(__name__)

MAINTENANCE_DAY = 19          # third Saturday, Monday being day 0
HOURS_EPS = 1e-9


# ── Operation plan ────────────────────────────────────────────────────────────

def default_reference_plan(hour_tolerance: Optional[float] = None) -> OperationPlan:
    """Three-week cycle: Mon–Wed five subgroups, Thu–Fri two groups, weekend cover."""
    days: list[PlanDay] = []
    for i in range(21):
        weekday, week = i % 7, i // 7
        if weekday <= 2:
            reqs = (Requirement(shift="TD", unit="subgroup", count=5),)
        elif weekday <= 4:
            reqs = (Requirement(shift="TD", unit="group", count=2),)
        elif weekday == 6:
            reqs = (Requirement(shift="TDWE", count=1),)
        elif i == MAINTENANCE_DAY:
            reqs = (Requirement(shift="TDWE", count=2),)
        else:
            reqs = (Requirement(shift="TDWE", count=1), Requirement(shift="SWWE", count=1))
        days.append(PlanDay(weekday=weekday, week=week, maintenance=i == MAINTENANCE_DAY, requirements=reqs))
    tol = get_settings().hour_tolerance if hour_tolerance is None else hour_tolerance
    return OperationPlan(days=tuple(days), hour_tolerance=tol)


def day_category(day: PlanDay) -> str:
    """mon_wed, thu_fri, weekend or off, derived from what the day requires."""
    td = day.required("TD")
    if td is not None:
        return "thu_fri" if td.unit == "group" else "mon_wed"
    if day.requirements:
        return "weekend"
    return "off"


def days_of(plan: OperationPlan, category: str) -> list[int]:
    return [i for i, d in enumerate(plan.days) if day_category(d) == category]


# ── Hard requirements ─────────────────────────────────────────────────────────

def hours_ok(s: Schedule, plan: OperationPlan, subgroups: Iterable[int]) -> bool:
    fair, tol = plan.fair_share, plan.hour_tolerance
    return all(abs(s.hours(sg) - fair) <= tol + HOURS_EPS for sg in subgroups)


def validate_hard(s: Schedule, plan: OperationPlan) -> list[HardViolation]:
    """Coverage, group structure and cycle hours; an empty list means valid."""
    if s.days != plan.cycle_days:
        return [HardViolation("dimension", f"schedule has {s.days} days, plan has {plan.cycle_days}")]

    problems: list[HardViolation] = []
    for d, day in enumerate(plan.days):
        for code in SHIFT_DURATIONS:
            working = s.working(d, code)
            req = day.required(code)
            need = req.subgroups_needed if req else 0
            if len(working) != need:
                problems.append(HardViolation(
                    "coverage", f"{day.label}: {len(working)} subgroups on {code}, plan needs {need}", day=d,
                ))
            if req is not None and req.unit == "group":
                for g, (a, b) in GROUPS.items():
                    if (a in working) != (b in working):
                        problems.append(HardViolation(
                            "group", f"{day.label}: group {g} split on {code}", day=d, subgroup=a,
                        ))

    fair, tol = plan.fair_share, plan.hour_tolerance
    for sg in range(len(SUBGROUPS)):
        h = s.hours(sg)
        if abs(h - fair) > tol + HOURS_EPS:
            problems.append(HardViolation(
                "hours", f"{SUBGROUPS[sg]}: {h:.2f} h, fair share {fair:.2f} ± {tol}", subgroup=sg,
            ))
    return problems


# ── Initial solution ──────────────────────────────────────────────────────────

def _lowest(cands: list, key, rng: random.Random) -> list:
    rng.shuffle(cands)
    cands.sort(key=key)          # stable, so the shuffle breaks ties
    return cands


def rebalance_durations(s: Schedule, plan: OperationPlan) -> Schedule:
    """Set each subgroup's TD length so its cycle hours approach the fair share."""
    lo, hi = SHIFT_DURATIONS["TD"]
    fair = plan.fair_share
    changes: dict[Position, ShiftAssignment] = {}
    for sg in range(len(SUBGROUPS)):
        td_days = [d for d in range(s.days) if (c := s.cells[d][sg]) is not None and c.code == "TD"]
        if not td_days:
            continue
        other = s.hours(sg) - sum(s.cells[d][sg].duration for d in td_days)
        dur = min(hi, max(lo, round((fair - other) / len(td_days), 2)))
        for d in td_days:
            if s.cells[d][sg].duration != dur:
                changes[Position(d, sg)] = ShiftAssignment("TD", dur)
    return s.with_changes(changes)


def _transfer_td(s: Schedule, plan: OperationPlan, rng: random.Random) -> Optional[Schedule]:
    """Move one subgroup-TD from the busiest to the idlest subgroup, if that narrows the spread."""
    hours = [s.hours(sg) for sg in range(len(SUBGROUPS))]
    busy = max(range(len(hours)), key=lambda i: (hours[i], -i))
    idle = min(range(len(hours)), key=lambda i: (hours[i], i))
    cands = [
        d for d in days_of(plan, "mon_wed")
        if (c := s.cells[d][busy]) is not None and c.code == "TD" and s.cells[d][idle] is None
    ]
    if not cands:
        return None
    d = rng.choice(cands)
    if hours[busy] - hours[idle] <= s.cells[d][busy].duration:
        return None
    moved = s.cells[d][busy]
    return s.with_changes({Position(d, busy): None, Position(d, idle): moved})


def initial_solution(plan: OperationPlan, seed: Optional[int] = None) -> Schedule:
    """Greedy lowest-hours allocation, TD transfers, then TD length balancing."""
    seed = get_settings().default_seed if seed is None else seed
    rng = random.Random(seed)
    n = len(SUBGROUPS)
    hours = [0.0] * n
    changes: dict[Position, ShiftAssignment] = {}

    for d, day in enumerate(plan.days):
        free = set(range(n))
        # group requirements first: they need both halves of a group
        for req in sorted(day.requirements, key=lambda r: r.unit != "group"):
            dur = default_duration(req.shift)
            if req.unit == "group":
                groups = [g for g, (a, b) in GROUPS.items() if a in free and b in free]
                groups = _lowest(groups, lambda g: hours[GROUPS[g][0]] + hours[GROUPS[g][1]], rng)
                if len(groups) < req.count:
                    raise Unsatisfiable(f"{day.label}: {req.count} free groups needed for {req.shift}")
                chosen = [sg for g in groups[:req.count] for sg in GROUPS[g]]
            else:
                cands = _lowest(sorted(free), hours.__getitem__, rng)
                if len(cands) < req.count:
                    raise Unsatisfiable(f"{day.label}: {req.count} free subgroups needed for {req.shift}")
                chosen = cands[:req.count]
            for sg in chosen:
                changes[Position(d, sg)] = ShiftAssignment(req.shift, dur)
                hours[sg] += dur
                free.discard(sg)

    s = Schedule.empty(plan.cycle_days).with_changes(changes)
    for _ in range(plan.cycle_days * n):
        moved = _transfer_td(s, plan, rng)
        if moved is None:
            break
        s = moved
    s = rebalance_durations(s, plan)

    problems = validate_hard(s, plan)
    if problems:
        raise Unsatisfiable(f"no schedule within hour tolerance: {problems[0].message}")
    log.info("Initial solution for plan %s (seed %d)", plan.name, seed)
    return s


def repair_to_feasibility(
    s: Schedule,
    plan: OperationPlan,
    rng: random.Random,
    max_attempts: Optional[int] = None,
) -> Schedule:
    """Bring an offspring whose days are all covered back within the hour tolerance."""
    attempts = get_settings().max_feasibility_attempts if max_attempts is None else max_attempts
    problems = validate_hard(s, plan)
    if not problems:
        return s
    if any(p.kind != "hours" for p in problems):
        raise InfeasibleOffspring(problems[0].message)
    for _ in range(attempts):
        s = rebalance_durations(s, plan)
        if not validate_hard(s, plan):
            return s
        moved = _transfer_td(s, plan, rng)
        if moved is None:
            break
        s = moved
    raise InfeasibleOffspring(f"hours still outside tolerance after {attempts} attempts")


# ── Evaluators ────────────────────────────────────────────────────────────────

EVEN_DISTRIBUTION = CompareConstraint(
    name="even_distribution", variable="hours_gap", op="<=", compare_value=0.0,
    ramp_width=12.0, tuned=True,
    comment="difference in working hours between consecutive weeks",
)
CONSECUTIVE_DAYS = CompareConstraint(
    name="consecutive_days", variable="longest_run", op="<=", compare_value=5.0,
    ramp_width=3.0, importance=0.5, tuned=True,
    comment="longest run of consecutive working days",
)
_OPS = OperatorSet(aggregation="weighted_mean", defuzz="height")


def free_weekends_constraint(plan: OperationPlan) -> CompareConstraint:
    n = len(plan.weekends())
    return CompareConstraint(
        name="free_weekends", variable="free_weekends", op=">=", compare_value=float(n),
        ramp_width=float(max(n, 1)), tuned=True,
        comment="more free weekends are better",
    )


def weekly_hours(s: Schedule, plan: OperationPlan, subgroup: int) -> list[float]:
    return [s.hours(subgroup, plan.days_in_week(w)) for w in range(plan.weeks)]


def score_week_hours(hours: Sequence[float]) -> tuple[float, Optional[tuple[int, int]]]:
    """Score of the largest gap between consecutive weeks and the pair holding it."""
    if len(hours) < 2:
        return 1.0, None
    gaps = [abs(a - b) for a, b in zip(hours, hours[1:])]
    w = max(range(len(gaps)), key=lambda i: (gaps[i], -i))
    return evaluate_compare(EVEN_DISTRIBUTION, gaps[w], _OPS), (w, w + 1)


def eval_even_distribution(s: Schedule, plan: OperationPlan, subgroup: int) -> tuple[float, Optional[tuple[int, int]]]:
    return score_week_hours(weekly_hours(s, plan, subgroup))


def free_weekend_count(s: Schedule, plan: OperationPlan, subgroup: int) -> int:
    return sum(all(s.cells[d][subgroup] is None for d in we) for we in plan.weekends())


def eval_free_weekends(s: Schedule, plan: OperationPlan, subgroup: int) -> tuple[float, list[Position]]:
    """Score rising with free weekends, plus the cells of the weekends that are not free."""
    busy: list[Position] = []
    for we in plan.weekends():
        if any(s.cells[d][subgroup] is not None for d in we):
            busy.extend(Position(d, subgroup) for d in we)
    score = evaluate_compare(free_weekends_constraint(plan), float(free_weekend_count(s, plan, subgroup)), _OPS)
    return score, busy


def working_runs(s: Schedule, subgroup: int) -> list[int]:
    runs: list[int] = []
    current = 0
    for d in range(s.days):
        if s.cells[d][subgroup] is not None:
            current += 1
        elif current:
            runs.append(current)
            current = 0
    if current:
        runs.append(current)
    return runs


# ── Runtime constraint generation ─────────────────────────────────────────────

class ShiftView:
    """Exposes a schedule as week, weekend and work-pattern objects per subgroup."""

    def __init__(self, plan: OperationPlan) -> None:
        self.plan = plan
        self._week_days = [plan.days_in_week(w) for w in range(plan.weeks)]
        self._weekend_days = [d for we in plan.weekends() for d in we]

    def positions(self, s: Schedule) -> Iterable[Position]:
        return s.positions()

    def objects(self, s: Schedule) -> list[DomainObject]:
        out: list[DomainObject] = []
        for sg, name in enumerate(SUBGROUPS):
            for w, days in enumerate(self._week_days):
                out.append(DomainObject(
                    kind="week", key=f"{name}/w{w}", unit=name, index=w,
                    attributes={"hours": s.hours(sg, days)},
                    positions=frozenset(Position(d, sg) for d in days),
                ))
            out.append(DomainObject(
                kind="weekends", key=f"{name}/weekends", unit=name, index=0,
                attributes={"free_weekends": float(free_weekend_count(s, self.plan, sg))},
                positions=frozenset(Position(d, sg) for d in self._weekend_days),
            ))
            out.append(DomainObject(
                kind="pattern", key=f"{name}/pattern", unit=name, index=0,
                attributes={"runs": working_runs(s, sg)},
                positions=frozenset(Position(d, sg) for d in range(s.days)),
            ))
        return out


def reference_knowledge_base(plan: OperationPlan) -> KnowledgeBase:
    templates = [
        TemplateConstraint(
            name="even_distribution", base=EVEN_DISTRIBUTION,
            specialization=AbsExpr(arg=BinaryExpr(
                op="sub", left=AttrExpr(name="first.hours"), right=AttrExpr(name="second.hours"),
            )),
        ),
        TemplateConstraint(
            name="free_weekends", base=free_weekends_constraint(plan),
            specialization=AttrExpr(name="free_weekends"),
        ),
        TemplateConstraint(
            name="consecutive_days", base=CONSECUTIVE_DAYS,
            specialization=RangeAggregation(kind="max", attribute="runs"),
        ),
    ]
    rules = [
        GenerationRule(name="even_distribution", template="even_distribution", kind="week", arity=2),
        GenerationRule(name="consecutive_days", template="consecutive_days", kind="pattern"),
    ]
    if plan.weekends():
        rules.insert(1, GenerationRule(name="free_weekends", template="free_weekends", kind="weekends"))
    return KnowledgeBase(
        name=f"shift/{plan.name}",
        operator_set=_OPS,
        domain_schema=DomainSchema(kinds={
            "week": ("hours",), "weekends": ("free_weekends",), "pattern": ("runs",),
        }),
        templates=tuple(templates),
        rules=tuple(rules),
    )
