"""Matrix-free conjugate gradient for the image-update normal equations.

The normal operator A^T A + sum_i gamma_i W_i^T W_i is applied through
the projector and frame transform; nothing is materialized.  The CG
starting point is supplied by a pluggable initializer: identity (warm
start from the previous iterate) or an additive correction field loaded
from a small stored stencil.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve as _ndconvolve

from .errors import DimensionMismatchError, NumericalDivergenceError
from .framelet import NUM_CHANNELS, frame_adjoint_weighted, frame_decompose
from .geometry import Image, ScanGeometry, Sinogram
from .projector import back_project, forward_project

IDENTITY = "identity"
CORRECTION_FIELD = "correction-field"


def expand_gamma(gamma, num_channels: int = NUM_CHANNELS) -> np.ndarray:
    """Normalize a scalar or per-channel gamma to a positive weight vector."""
    arr = np.asarray(gamma, dtype=np.float64)
    if arr.ndim == 0:
        arr = np.full(num_channels, float(arr))
    if arr.shape != (num_channels,):
        raise ValueError(f"gamma must be scalar or length {num_channels}, got {arr.shape}")
    return arr


@dataclass(frozen=True)
class CgConfig:
    """Stopping controls for the inner conjugate gradient solve."""

    tol: float = 1e-6
    max_iter: int = 200

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"cg tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"cg max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True)
class CgReport:
    iterations: int
    final_residual_norm: float
    converged: bool


@dataclass(frozen=True, eq=False)
class Initializer:
    """CG starting-point hook: u0 = u + correction(u).

    ``identity`` contributes no correction.  ``correction-field`` adds a
    stored k x k convolution stencil response plus a scalar bias, a
    minimal stand-in for a learned correction network.
    """

    kind: str = IDENTITY
    stencil: np.ndarray | None = None
    bias: float = 0.0

    def __post_init__(self):
        if self.kind not in (IDENTITY, CORRECTION_FIELD):
            raise ValueError(f"unknown initializer kind {self.kind!r}")
        if self.kind == CORRECTION_FIELD:
            st = np.ascontiguousarray(self.stencil, dtype=np.float64)
            if st.ndim != 2 or st.shape[0] != st.shape[1]:
                raise ValueError(f"stencil must be square, got shape {st.shape}")
            object.__setattr__(self, "stencil", st)

    def apply(self, u: Image) -> Image:
        if self.kind == IDENTITY:
            return u
        correction = _ndconvolve(u.data, self.stencil, mode="reflect") + self.bias
        return u.with_data(u.data + correction)


class NormalOperator:
    """u -> A^T(A u) + sum_i gamma_i W_i^T(W_i u), all matrix-free.

    ``geom`` may be None for a pure frame-regularizer operator (A = 0).
    Symmetric positive semidefinite by construction; strictly positive
    definite whenever the gamma weights are positive, since the channels
    form a tight frame.
    """

    def __init__(self, geom: ScanGeometry | None, gamma):
        self.geom = geom
        self.gamma = expand_gamma(gamma)

    @property
    def image_shape(self) -> tuple[int, int]:
        if self.geom is None:
            raise ValueError("operator with no geometry has no fixed image shape")
        return self.geom.image_shape

    def apply(self, u: Image) -> Image:
        if self.geom is not None:
            self.geom.check_image(u)
            out = back_project(forward_project(u, self.geom), self.geom).data
        else:
            out = np.zeros(u.data.shape)
        if np.any(self.gamma != 0.0):
            out = out + frame_adjoint_weighted(frame_decompose(u), self.gamma)
        return u.with_data(out)

    def __call__(self, u: Image) -> Image:
        return self.apply(u)


def apply_normal_operator(op: NormalOperator, u: Image) -> Image:
    """Functional alias for :meth:`NormalOperator.apply`."""
    return op.apply(u)


def cg_solve(op, rhs: Image, x0: Image, max_iter: int, tol: float) -> tuple[Image, CgReport]:
    """Conjugate gradient on op(x) = rhs from x0.

    ``op`` is any callable mapping an Image to an Image, symmetric
    positive definite on the search space.  Stops when the residual norm
    drops to tol * ||rhs|| (absolute tol if rhs is zero) or at max_iter;
    the residual test precedes the first step, so an exact x0 returns
    immediately with zero iterations.
    """
    if rhs.data.shape != x0.data.shape:
        raise DimensionMismatchError(
            f"rhs shape {rhs.data.shape} does not match x0 shape {x0.data.shape}"
        )
    x = x0.data.copy()
    b = rhs.data
    with np.errstate(over="ignore"):
        threshold = tol * np.linalg.norm(b)
    if not np.isfinite(threshold):
        raise NumericalDivergenceError("cg rhs norm", 0)
    if threshold == 0.0:
        threshold = tol
    r = b - op(rhs.with_data(x)).data
    with np.errstate(over="ignore"):
        rnorm = np.linalg.norm(r)
    if not np.isfinite(rnorm):
        raise NumericalDivergenceError("cg residual", 0)
    if rnorm <= threshold:
        return rhs.with_data(x), CgReport(0, float(rnorm), True)
    d = r.copy()
    delta = float(np.vdot(r, r))
    for k in range(1, max_iter + 1):
        q = op(rhs.with_data(d)).data
        dq = float(np.vdot(d, q))
        if not np.isfinite(dq) or dq <= 0.0:
            raise NumericalDivergenceError("cg curvature", k)
        alpha = delta / dq
        with np.errstate(over="ignore", invalid="ignore"):  # divergence is raised, not warned
            x += alpha * d
            r -= alpha * q
            rnorm = float(np.linalg.norm(r))
        if not np.isfinite(rnorm):
            raise NumericalDivergenceError("cg residual", k)
        if rnorm <= threshold:
            return rhs.with_data(x), CgReport(k, rnorm, True)
        delta_new = float(np.vdot(r, r))
        d = r + (delta_new / delta) * d
        delta = delta_new
    return rhs.with_data(x), CgReport(max_iter, float(rnorm), False)


def build_rhs(f: Sinogram, zbar, op: NormalOperator) -> Image:
    """Right-hand side of the normal equations: A^T f + sum_i gamma_i W_i^T zbar_i."""
    if op.geom is None:
        raise ValueError("u-update requires a measurement geometry")
    data = back_project(f, op.geom).data + frame_adjoint_weighted(zbar, op.gamma)
    return Image(data, op.geom.pixel_size)


def solve_u_update(
    f: Sinogram,
    zbar,
    u_prev: Image,
    init: Initializer,
    op: NormalOperator,
    cg_cfg: CgConfig,
) -> tuple[Image, CgReport]:
    """One image update: CG on the normal equations, warm-started.

    The starting point is u_prev plus the initializer's correction (plain
    u_prev for the identity initializer).
    """
    rhs = build_rhs(f, zbar, op)
    x0 = init.apply(u_prev)
    return cg_solve(op, rhs, x0, cg_cfg.max_iter, cg_cfg.tol)
