from ._bdlab import (
    analytic_conductor,
    bessel_j,
    calibrate_eta,
    coefficients,
    kloosterman,
    log_gamma,
    lvalue,
    run,
    voronoi_check,
    weber_identity,
)

__all__ = [
    "analytic_conductor",
    "bessel_j",
    "calibrate_eta",
    "coefficients",
    "kloosterman",
    "log_gamma",
    "lvalue",
    "run",
    "voronoi_check",
    "weber_identity",
]
