"""Major-minor mean-field games on a simplex grid: solvers, evaluation and N-player simulation."""

from ._core import (
    ConfigError,
    Game,
    NumericError,
    Partition,
    Policy,
    env_ids,
    load_policy,
    run_cli,
)

__all__ = [
    "ConfigError",
    "Game",
    "NumericError",
    "Partition",
    "Policy",
    "env_ids",
    "load_policy",
    "run_cli",
]
