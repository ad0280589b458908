"""P1 finite elements for the nonlocal parabolic thermistor problem."""

from ._thermistor import (
    Coefficients,
    Expr,
    HypothesisViolation,
    Mesh,
    ThermistorError,
    check_config,
    interval_mesh,
    mass_matrix,
    rect_mesh,
    run_config,
    solve,
    spatial_eoc,
    stiffness_matrix,
    temporal_eoc,
)

__all__ = [
    "Coefficients",
    "Expr",
    "HypothesisViolation",
    "Mesh",
    "ThermistorError",
    "check_config",
    "interval_mesh",
    "mass_matrix",
    "rect_mesh",
    "run_config",
    "solve",
    "spatial_eoc",
    "stiffness_matrix",
    "temporal_eoc",
]
