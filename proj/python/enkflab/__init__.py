"""Ensemble Kalman filter experiments: models, analysis step and drivers."""

from ._core import (
    ConfigError,
    Model,
    NumericalFailure,
    __version__,
    analyze,
    analyze_with_observations,
    config_keys,
    covariance_apply,
    ensemble_mean,
    relative_error,
    run_experiment,
    theta,
)

__all__ = [
    "ConfigError",
    "Model",
    "NumericalFailure",
    "analyze",
    "analyze_with_observations",
    "config_keys",
    "covariance_apply",
    "ensemble_mean",
    "relative_error",
    "run_experiment",
    "theta",
]
