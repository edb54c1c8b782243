"""Shared numeric kernel: spectral functions, solvers, curves, geometry."""

from henonlab.numerics.curvetools import Curve, curve_from_params, refine_curve
from henonlab.numerics.solvers import (
    FD_STEP,
    NewtonResult,
    central_diff,
    central_diff_with_error,
    fd_jacobian,
    newton_coeff_space,
    root_1d,
)
from henonlab.numerics.spectral import (
    DEFAULT_PRECISION,
    Precision,
    SpectralFn1D,
    SpectralFn2D,
    cheb_nodes,
    fit_1d,
    fit_2d,
)

__all__ = [
    "Curve",
    "curve_from_params",
    "refine_curve",
    "FD_STEP",
    "NewtonResult",
    "central_diff",
    "central_diff_with_error",
    "fd_jacobian",
    "newton_coeff_space",
    "root_1d",
    "DEFAULT_PRECISION",
    "Precision",
    "SpectralFn1D",
    "SpectralFn2D",
    "cheb_nodes",
    "fit_1d",
    "fit_2d",
]
