"""Critical catalytic branching random walks on Z^d."""

from ._catbrw import (
    CalibrationError,
    CatbrwError,
    ConfigError,
    DependencyError,
    InputError,
    NumericalError,
    OffspringLaw,
    Pipeline,
    WalkSpec,
    build_sandwich,
    calibrate_alpha,
    config_hash,
    enumerate_partitions,
    estimate_escape_probability,
    gamma_d,
    gamma_gaussian,
    inverse_factorial_sum,
    phi,
    transition_probability_origin,
    yaglom_cdf,
    yaglom_laplace,
    yaglom_moment,
)

__all__ = [
    "CalibrationError",
    "CatbrwError",
    "ConfigError",
    "DependencyError",
    "InputError",
    "NumericalError",
    "OffspringLaw",
    "Pipeline",
    "WalkSpec",
    "build_sandwich",
    "calibrate_alpha",
    "config_hash",
    "enumerate_partitions",
    "estimate_escape_probability",
    "gamma_d",
    "gamma_gaussian",
    "inverse_factorial_sum",
    "phi",
    "transition_probability_origin",
    "yaglom_cdf",
    "yaglom_laplace",
    "yaglom_moment",
]
