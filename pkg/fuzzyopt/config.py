"""
Settings from FUZZYOPT_* environment variables and an optional .env file.
Nothing else in the package reads os.environ.
"""
from functools import lru_cache
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    log_level: str = "INFO"

    # Evaluation
    violation_threshold: float = 0.9    # leaves below this enter the violation list
    top_k_report:        int   = 5

    # Optimizer defaults (overridable per run)
    default_seed:    int   = 42
    worst_k:         int   = 3
    tries_per_step:  int   = 10
    max_evaluations: int   = 2000
    tabu_tenure:     int   = 7
    population_size: int   = 8
    crossover_rate:  float = 0.7
    mutation_rate:   float = 0.3

    # Shift domain
    hour_tolerance:           float = 1.5   # hours per cycle around the fair share
    max_feasibility_attempts: int   = 50

    # Harness / storage
    bench_workers:   int = 1
    pair_store_path: str = "reference_pairs.json"

    model_config = SettingsConfigDict(
        env_prefix="FUZZYOPT_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )


@lru_cache
def get_settings() -> Settings:
    """Cached after the first call."""
    return Settings()
