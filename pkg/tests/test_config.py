"""Settings defaults, FUZZYOPT_* overrides and how run configs pick them up."""
from __future__ import annotations

import pytest
from pydantic import ValidationError

from fuzzyopt.config import get_settings
from fuzzyopt.models.optimizer import OptimizerConfig
from fuzzyopt.services.shift_service import default_reference_plan


def test_defaults():
    s = get_settings()
    assert s.violation_threshold == 0.9
    assert s.default_seed == 42
    assert s.hour_tolerance == 1.5
    assert s.pair_store_path == "reference_pairs.json"


def test_cached():
    assert get_settings() is get_settings()


def test_env_override(monkeypatch):
    monkeypatch.setenv("FUZZYOPT_TABU_TENURE", "3")
    monkeypatch.setenv("FUZZYOPT_HOUR_TOLERANCE", "2.5")
    get_settings.cache_clear()
    assert get_settings().tabu_tenure == 3
    assert OptimizerConfig.from_settings().tabu_tenure == 3
    assert default_reference_plan().hour_tolerance == 2.5


def test_explicit_overrides_win():
    cfg = OptimizerConfig.from_settings(seed=7, max_evaluations=None)
    assert cfg.seed == 7
    assert cfg.max_evaluations == get_settings().max_evaluations


def test_bad_env_value(monkeypatch):
    monkeypatch.setenv("FUZZYOPT_WORST_K", "many")
    get_settings.cache_clear()
    with pytest.raises(ValidationError):
        get_settings()


def test_run_config_bounds():
    with pytest.raises(ValidationError):
        OptimizerConfig(worst_k=0)
    with pytest.raises(ValidationError):
        OptimizerConfig(crossover_rate=1.5)
