"""Inertial Lp half-quadratic splitting: the outer reconstruction loop.

Each iteration alternates a channelwise Lp shrinkage in the frame domain
with a conjugate-gradient image update, extrapolating both variables:

    z_{k+1}    = prox_{p, gamma/lambda}(W ubar_k)
    zbar_{k+1} = z_{k+1} + alpha (z_{k+1} - zbar_k)
    u_{k+1}    = CG solve of the quadratic u-subproblem, warm-started
                 from initializer(ubar_k)
    ubar_{k+1} = u_{k+1} + beta (u_{k+1} - ubar_k)

stopping when the relative change of ubar falls to epsilon.  The loop
starts from the clamped filtered-backprojection image and returns ubar.
The extrapolated objective value is not monotone; only boundedness and
terminal stationarity are guaranteed, which is what the tests check.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalDivergenceError
from .fbp import fbp_reconstruct
from .framelet import FrameCoeffs, frame_decompose
from .geometry import Image, ScanGeometry, Sinogram
from .linsolve import CgConfig, CgReport, Initializer, NormalOperator, expand_gamma, solve_u_update
from .metrics import psnr
from .projector import forward_project
from .prox import prox_lp_coeffs

BETA_MAX = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters of the reconstruction loop.

    Inertia weights must satisfy alpha in [0, 1) and
    beta in [0, (sqrt(5) - 1)/2), the range for which the iterate
    sequences stay bounded.  ``gamma`` is a scalar or one weight per
    frame channel (nine, lowpass first).
    """

    p: float = 0.7
    lam: float = 6e-4
    gamma: float | tuple[float, ...] = 0.2
    alpha: float = 0.5
    beta: float = 0.6
    epsilon: float = 1e-4
    max_iter: int = 200
    cg: CgConfig = field(default_factory=CgConfig)
    initializer: Initializer = field(default_factory=Initializer)
    record_trace: bool = True

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"p must be in (0, 1], got {self.p}")
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not 0 <= self.alpha < 1:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if not 0 <= self.beta < BETA_MAX:
            raise ValueError(f"beta must be in [0, {BETA_MAX:.10f}), got {self.beta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if np.any(self.gamma_vector <= 0):
            raise ValueError("all gamma weights must be positive")

    @property
    def gamma_vector(self) -> np.ndarray:
        return expand_gamma(self.gamma)


@dataclass(frozen=True, eq=False)
class SolverState:
    """Iterates of the splitting loop at step k."""

    u: Image
    ubar: Image
    z: FrameCoeffs
    zbar: FrameCoeffs
    k: int = 0
    cg_report: CgReport | None = None

    def max_abs(self) -> float:
        """Largest magnitude across all four iterate sequences."""
        return max(
            float(np.max(np.abs(self.u.data))),
            float(np.max(np.abs(self.ubar.data))),
            float(np.max(np.abs(self.z.channels))),
            float(np.max(np.abs(self.zbar.channels))),
        )


TRACE_CSV_HEADER = ("iter", "rel_change", "objective", "cg_iters", "psnr")


@dataclass
class ConvergenceTrace:
    """Per-iteration diagnostics of one reconstruction run."""

    rel_change: list[float] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    cg_iters: list[int] = field(default_factory=list)
    psnr: list[float] = field(default_factory=list)
    # squared relative change of u (not ubar), a common convergence plot
    squared_u_change: list[float] = field(default_factory=list)
    state_max_abs: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.rel_change)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_CSV_HEADER)
            for i in range(self.iterations):
                p = self.psnr[i] if self.psnr else ""
                writer.writerow(
                    [i + 1, repr(self.rel_change[i]), repr(self.objective[i]), self.cg_iters[i], p]
                )


def objective_value(state: SolverState, f: Sinogram, geom: ScanGeometry, cfg: SolverConfig) -> float:
    """0.5 ||A u - f||^2 + lambda sum |z|^p + 0.5 sum_i gamma_i ||W_i u - z_i||^2.

    The Lp sum runs over the penalized (highpass) channels; the quadratic
    coupling runs over the full stack.
    """
    resid = forward_project(state.u, geom).data - f.data
    data_term = 0.5 * float(np.sum(resid**2))
    lp_term = cfg.lam * float(np.sum(np.abs(state.z.highpass_view()) ** cfg.p))
    wu = frame_decompose(state.u)
    diff = wu.channels - state.z.channels
    gamma = cfg.gamma_vector
    couple = 0.5 * float(np.sum(gamma * np.sum(diff**2, axis=(1, 2))))
    return data_term + lp_term + couple


def _check_finite(arr: np.ndarray, stage: str, iteration: int) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericalDivergenceError(stage, iteration)


def ihqs_step(state: SolverState, f: Sinogram, geom: ScanGeometry, cfg: SolverConfig) -> SolverState:
    """Advance the splitting loop by one iteration."""
    k = state.k
    z_new = prox_lp_coeffs(
        frame_decompose(state.ubar), cfg.p, cfg.lam, cfg.gamma_vector[1:]
    )
    _check_finite(z_new.channels, "z-prox", k)
    zbar_arr = z_new.channels + cfg.alpha * (z_new.channels - state.zbar.channels)
    _check_finite(zbar_arr, "z-extrapolation", k)
    zbar_new = z_new.with_channels(zbar_arr)
    op = NormalOperator(geom, cfg.gamma_vector)
    u_new, report = solve_u_update(f, zbar_new, state.ubar, cfg.initializer, op, cfg.cg)
    _check_finite(u_new.data, "u-cg", k)
    ubar_arr = u_new.data + cfg.beta * (u_new.data - state.ubar.data)
    _check_finite(ubar_arr, "u-extrapolation", k)
    return SolverState(u_new, u_new.with_data(ubar_arr), z_new, zbar_new, k + 1, report)


def initial_state(f: Sinogram, geom: ScanGeometry) -> SolverState:
    """Clamped FBP image and its frame coefficients as the starting state."""
    u0 = fbp_reconstruct(f, geom)
    u0 = u0.with_data(np.maximum(u0.data, 0.0))
    z0 = frame_decompose(u0)
    return SolverState(u=u0, ubar=u0, z=z0, zbar=z0, k=0)


def reconstruct(
    f: Sinogram,
    geom: ScanGeometry,
    cfg: SolverConfig,
    ground_truth: Image | None = None,
) -> tuple[Image, ConvergenceTrace]:
    """Run the full loop from the FBP start; returns ubar and its trace.

    Iterates until ||ubar_{k+1} - ubar_k|| / ||ubar_k|| <= epsilon or
    max_iter.  When ``ground_truth`` is given, the trace records PSNR
    (peak 1.0) per iteration.
    """
    geom.check_sinogram(f)
    state = initial_state(f, geom)
    trace = ConvergenceTrace()
    for _ in range(cfg.max_iter):
        prev_ubar = state.ubar
        prev_u = state.u
        state = ihqs_step(state, f, geom, cfg)
        denom = float(np.linalg.norm(prev_ubar.data))
        change = float(np.linalg.norm(state.ubar.data - prev_ubar.data))
        rel = change / denom if denom > 0 else change
        trace.rel_change.append(rel)
        u_norm = float(np.linalg.norm(state.u.data))
        du = float(np.linalg.norm(state.u.data - prev_u.data))
        trace.squared_u_change.append((du / u_norm) ** 2 if u_norm > 0 else du**2)
        trace.cg_iters.append(state.cg_report.iterations)
        trace.state_max_abs.append(state.max_abs())
        if cfg.record_trace:
            trace.objective.append(objective_value(state, f, geom, cfg))
            if ground_truth is not None:
                trace.psnr.append(psnr(state.ubar, ground_truth, 1.0))
        else:
            trace.objective.append(float("nan"))
        if rel <= cfg.epsilon:
            trace.converged = True
            break
    return state.ubar, trace
