"""Finite-volume solver for the 2-D stochastic heat equation with multiplicative noise."""

from ._stochfv import (
    BrownianPath,
    ConfigError,
    Mesh,
    NoiseModel,
    Rectangle,
    SolverError,
    h1_seminorm_squared,
    l2_norm_squared,
    project,
    realization_path,
    run_command,
    sample_path,
    solve,
    uniform_mesh,
    voronoi_mesh,
)

__all__ = [
    "BrownianPath",
    "ConfigError",
    "Mesh",
    "NoiseModel",
    "Rectangle",
    "SolverError",
    "h1_seminorm_squared",
    "l2_norm_squared",
    "project",
    "realization_path",
    "run_command",
    "sample_path",
    "solve",
    "uniform_mesh",
    "voronoi_mesh",
]
