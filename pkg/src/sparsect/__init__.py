"""Sparse-view CT reconstruction via inertial Lp half-quadratic splitting.

The toolkit covers the full desk-scale pipeline: exact ray-driven
projection and backprojection, filtered backprojection, a piecewise
linear tight wavelet frame, the exact Lp proximal operator, matrix-free
conjugate gradient with a pluggable initializer, the inertial outer
loop, phantoms, noise models, quality metrics, and a batch CLI.
"""

from .errors import (
    ConfigError,
    DimensionMismatchError,
    GeometryError,
    NumericalDivergenceError,
    RawFormatError,
)
from .fbp import fbp_reconstruct, ramp_filter
from .framelet import FrameCoeffs, frame_adjoint, frame_decompose
from .geometry import FAN, PARALLEL, Image, ScanGeometry, Sinogram, fan_geometry, parallel_geometry
from .linsolve import (
    CgConfig,
    CgReport,
    Initializer,
    NormalOperator,
    apply_normal_operator,
    cg_solve,
    solve_u_update,
)
from .metrics import mae_rmse, psnr, ssim
from .phantom import NoiseSpec, add_noise, shepp_logan
from .projector import back_project, forward_project
from .prox import ProxParams, prox_lp_coeffs, prox_lp_scalar
from .solver import (
    ConvergenceTrace,
    SolverConfig,
    SolverState,
    ihqs_step,
    objective_value,
    reconstruct,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionMismatchError",
    "GeometryError",
    "NumericalDivergenceError",
    "RawFormatError",
    "Image",
    "Sinogram",
    "ScanGeometry",
    "PARALLEL",
    "FAN",
    "parallel_geometry",
    "fan_geometry",
    "forward_project",
    "back_project",
    "ramp_filter",
    "fbp_reconstruct",
    "FrameCoeffs",
    "frame_decompose",
    "frame_adjoint",
    "ProxParams",
    "prox_lp_scalar",
    "prox_lp_coeffs",
    "CgConfig",
    "CgReport",
    "Initializer",
    "NormalOperator",
    "apply_normal_operator",
    "cg_solve",
    "solve_u_update",
    "SolverConfig",
    "SolverState",
    "ConvergenceTrace",
    "objective_value",
    "ihqs_step",
    "reconstruct",
    "NoiseSpec",
    "shepp_logan",
    "add_noise",
    "psnr",
    "ssim",
    "mae_rmse",
    "__version__",
]
