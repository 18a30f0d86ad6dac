"""Shared fixtures: settings isolation, the reference plan and small toy plans."""
from __future__ import annotations

import os

import pytest

from fuzzyopt.config import get_settings
from fuzzyopt.models.constraint import CompareConstraint
from fuzzyopt.models.schedule import OperationPlan, PlanDay, Requirement
from fuzzyopt.services.shift_service import default_reference_plan, initial_solution

LOOSE = 100.0   # hour tolerance that never binds on toy plans


@pytest.fixture(autouse=True)
def _fresh_settings(monkeypatch):
    """Each test sees defaults unless it sets FUZZYOPT_* itself."""
    for key in list(os.environ):
        if key.startswith("FUZZYOPT_"):
            monkeypatch.delenv(key, raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture(scope="session")
def reference_plan() -> OperationPlan:
    return default_reference_plan(hour_tolerance=1.5)


@pytest.fixture(scope="session")
def reference_initial(reference_plan):
    return initial_solution(reference_plan, seed=42)


def _td(count: int, unit: str = "subgroup") -> tuple[Requirement, ...]:
    return (Requirement(shift="TD", unit=unit, count=count),)


@pytest.fixture(scope="session")
def mon_wed_toy() -> OperationPlan:
    """Three Mon–Wed days, three subgroups each."""
    days = tuple(PlanDay(weekday=d, week=0, requirements=_td(3)) for d in range(3))
    return OperationPlan(name="toy-mon-wed", days=days, hour_tolerance=LOOSE)


@pytest.fixture(scope="session")
def thu_fri_toy() -> OperationPlan:
    """Mon–Wed with three subgroups, Thu–Fri with one full group."""
    days = (
        *(PlanDay(weekday=d, week=0, requirements=_td(3)) for d in range(3)),
        *(PlanDay(weekday=d, week=0, requirements=_td(1, "group")) for d in (3, 4)),
    )
    return OperationPlan(name="toy-thu-fri", days=days, hour_tolerance=LOOSE)


@pytest.fixture(scope="session")
def weekend_toy() -> OperationPlan:
    """Three weekends: Saturday TDWE + SWWE, Sunday TDWE."""
    days = []
    for week in range(3):
        days.append(PlanDay(weekday=5, week=week, requirements=(
            Requirement(shift="TDWE", count=1), Requirement(shift="SWWE", count=1),
        )))
        days.append(PlanDay(weekday=6, week=week, requirements=(Requirement(shift="TDWE", count=1),)))
    return OperationPlan(name="toy-weekend", days=tuple(days), hour_tolerance=LOOSE)


@pytest.fixture
def alu() -> CompareConstraint:
    return CompareConstraint(name="alu", variable="alu-cntnt", op="<=", compare_value=0.08, ramp_width=0.04)
