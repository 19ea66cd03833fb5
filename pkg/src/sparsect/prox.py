"""Exact proximal operator of the Lp quasi-norm, 0 < p <= 1.

prox_{p,eta}(t) minimizes |x|^p + (eta/2)(x - t)^2.  For p < 1 the
solution is 0 below the hard threshold tau and otherwise sign(t) * g with
g the root of h(g) = p g^(p-1) + eta g - eta |t| on (rho, |t|), where
rho = (2 (1 - p) / eta)^(1 / (2 - p)) and tau = rho + p rho^(p-1) / eta.
h is convex on that interval, so Newton started at |t| decreases
monotonically to the root; a bisection fallback guarantees termination.
The boundary case |t| = tau is resolved to 0.  p = 1 is the soft
threshold sign(t) * max(|t| - 1/eta, 0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .framelet import FrameCoeffs

_newton_fallbacks = 0


def newton_fallback_count() -> int:
    """Number of elementwise prox evaluations that needed bisection."""
    return _newton_fallbacks


def reset_newton_fallback_count() -> None:
    global _newton_fallbacks
    _newton_fallbacks = 0


@dataclass(frozen=True)
class ProxParams:
    """Shrinkage parameters: exponent p, weight eta, Newton controls."""

    p: float
    eta: float
    newton_tol: float = 1e-12
    newton_max_iter: int = 50

    def __post_init__(self):
        if not 0 < self.p <= 1:
            raise ValueError(f"p must be in (0, 1], got {self.p}")
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not self.newton_tol > 0:
            raise ValueError(f"newton_tol must be positive, got {self.newton_tol}")

    @property
    def rho(self) -> float:
        return (2.0 * (1.0 - self.p) / self.eta) ** (1.0 / (2.0 - self.p))

    @property
    def tau(self) -> float:
        """Hard threshold: inputs with |t| <= tau map to 0."""
        if self.p == 1.0:
            return 1.0 / self.eta
        r = self.rho
        return r + self.p * r ** (self.p - 1.0) / self.eta


def _shrink_above_threshold(t_abs, p, eta, tol, max_iter):
    """Root of h on (rho, t_abs) for each entry, Newton with bisection fallback.

    All entries must satisfy t_abs > tau.  eta is a scalar or an array
    broadcast against t_abs.
    """
    global _newton_fallbacks
    eta = np.broadcast_to(np.asarray(eta, dtype=np.float64), t_abs.shape).copy()
    g = t_abs.astype(np.float64).copy()
    active = np.ones(t_abs.shape, dtype=bool)
    for _ in range(max_iter):
        ga = g[active]
        if ga.size == 0:
            break
        ea = eta[active]
        h = p * ga ** (p - 1.0) + ea * ga - ea * t_abs[active]
        done = np.abs(h) <= tol
        dh = p * (p - 1.0) * ga ** (p - 2.0) + ea
        step = np.where(done, 0.0, h / dh)
        g[active] = ga - step
        sub = active.copy()
        sub[active] = ~done
        active = sub
    if np.any(active):
        # Newton missed the tolerance; bisect the bracket (rho, t_abs).
        _newton_fallbacks += int(np.count_nonzero(active))
        ta = t_abs[active]
        ea = eta[active]
        lo = (2.0 * (1.0 - p) / ea) ** (1.0 / (2.0 - p))
        hi = ta.copy()
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            hm = p * mid ** (p - 1.0) + ea * mid - ea * ta
            lo = np.where(hm < 0.0, mid, lo)
            hi = np.where(hm < 0.0, hi, mid)
        g[active] = 0.5 * (lo + hi)
    return g


def _prox_lp_array(t: np.ndarray, params: ProxParams, eta=None) -> np.ndarray:
    """Elementwise prox; ``eta`` overrides params.eta (may be an array)."""
    eta = params.eta if eta is None else eta
    t = np.asarray(t, dtype=np.float64)
    if params.p == 1.0:
        return np.sign(t) * np.maximum(np.abs(t) - 1.0 / np.asarray(eta), 0.0)
    eta_arr = np.broadcast_to(np.asarray(eta, dtype=np.float64), t.shape)
    rho = (2.0 * (1.0 - params.p) / eta_arr) ** (1.0 / (2.0 - params.p))
    tau = rho + params.p * rho ** (params.p - 1.0) / eta_arr
    out = np.zeros_like(t)
    above = np.abs(t) > tau
    if np.any(above):
        g = _shrink_above_threshold(
            np.abs(t[above]), params.p, eta_arr[above], params.newton_tol, params.newton_max_iter
        )
        out[above] = np.sign(t[above]) * g
    return out


def prox_lp_scalar(t: float, params: ProxParams) -> float:
    """prox_{p,eta} of a single real value."""
    return float(_prox_lp_array(np.array([t]), params)[0])


def prox_lp_coeffs(
    coeffs: FrameCoeffs,
    p: float,
    lam: float,
    gamma,
    newton_tol: float = 1e-12,
    newton_max_iter: int = 50,
) -> FrameCoeffs:
    """Channelwise prox over frame coefficients: the z-update.

    Highpass channel i minimizes lam*|z|^p + (gamma_i/2)(z - t)^2
    elementwise, i.e. prox_{p, gamma_i/lam}; the lowpass channel (when
    present) is not penalized and passes through unchanged.  ``gamma`` is
    a scalar or one positive weight per penalized channel.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    hp = coeffs.highpass_view()
    gamma_arr = np.asarray(gamma, dtype=np.float64)
    if gamma_arr.ndim == 0:
        gamma_arr = np.full(hp.shape[0], float(gamma_arr))
    if gamma_arr.shape != (hp.shape[0],):
        raise ValueError(
            f"gamma must be scalar or length {hp.shape[0]}, got shape {gamma_arr.shape}"
        )
    if np.any(gamma_arr <= 0):
        raise ValueError("all gamma weights must be positive")
    params = ProxParams(p, 1.0, newton_tol, newton_max_iter)  # eta passed per channel
    eta = (gamma_arr / lam)[:, None, None]
    shrunk = _prox_lp_array(hp, params, eta=eta)
    if coeffs.includes_lowpass:
        out = np.concatenate((coeffs.channels[:1], shrunk))
    else:
        out = shrunk
    return coeffs.with_channels(out)
