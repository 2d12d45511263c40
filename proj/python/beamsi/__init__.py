"""Identify stiffness and damping of a simply supported beam."""

from ._core import (
    ArtifactError,
    BeamsiError,
    ConfigError,
    NumericalError,
    RunConfig,
    __version__,
    discrete_frechet,
    evaluate,
    generate,
    read_trajectory,
    simulate,
    sweep,
    train,
    truth_fields,
)

__all__ = [
    "ArtifactError",
    "BeamsiError",
    "ConfigError",
    "NumericalError",
    "RunConfig",
    "__version__",
    "discrete_frechet",
    "evaluate",
    "generate",
    "read_trajectory",
    "simulate",
    "sweep",
    "train",
    "truth_fields",
]
