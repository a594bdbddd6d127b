"""Finite-difference cross-validation of the closed-form prices.

Two tools live here: a backward marcher for the transformed terminal-value
problem

    Theta_t + sigma_bar^2(t) z^2 Theta_zz = 0,   z = V / P(r, t, T),
    Theta(z, T) = (k z - N X)^+ / (N + M k),

whose solution warrant.warrant_value_forward reproduces in closed form, and
pointwise residual evaluators that push a price function through central
differences and report how badly it violates the pricing equation. Both are
consistency instruments: the library's prices come from the closed forms,
not from this solver.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureSpec, gamma
from .processes import ModelParams
from .warrant import WarrantTerms, variance_integral

__all__ = [
    "InstabilityError",
    "GridSpec",
    "EffectiveVols",
    "ThetaSurface",
    "default_grid",
    "solve_theta_pde",
    "residual_warrant_pde",
    "residual_bond_pde",
]

SCHEMES = ("implicit", "crank_nicolson")


class InstabilityError(RuntimeError):
    """The marching produced a non-finite value."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid in (z, t) for the transformed problem."""

    z_min: float
    z_max: float
    n_z: int
    n_t: int
    t_start: float
    maturity: float

    def __post_init__(self):
        if not (0.0 < self.z_min < self.z_max) or not np.isfinite(self.z_max):
            raise ValueError("need 0 < z_min < z_max < inf")
        if self.n_z < 16 or self.n_t < 16:
            raise ValueError("need n_z >= 16 and n_t >= 16")
        if not 0.0 <= self.t_start < self.maturity:
            raise ValueError("need 0 <= t_start < maturity")


def _tilde_sq(sigma: float, t, params: ModelParams):
    """Squared effective volatility H sigma^2 t^(2 alpha H - 1) / Gamma(alpha)^(2H).

    The exponent 2 alpha H - 1 can be negative, so t = 0 is out of domain
    whenever 2 alpha H < 1; callers keep their evaluation points positive.
    """
    expo = 2.0 * params.alpha * params.hurst - 1.0
    return (
        params.hurst * sigma ** 2 * np.asarray(t, dtype=float) ** expo
        / gamma(params.alpha) ** (2.0 * params.hurst)
    )


@dataclass(frozen=True)
class EffectiveVols:
    """Deterministic time-dependent coefficients of the pricing equations."""

    params: ModelParams
    maturity: float

    def sigma_v_tilde_sq(self, t):
        return _tilde_sq(self.params.sigma_v, t, self.params)

    def sigma_r_tilde_sq(self, t):
        return _tilde_sq(self.params.sigma_r, t, self.params)

    def sigma_bar_sq(self, t):
        sv2 = self.sigma_v_tilde_sq(t)
        sr2 = self.sigma_r_tilde_sq(t)
        rem = self.maturity - np.asarray(t, dtype=float)
        return sv2 + 2.0 * self.params.rho * np.sqrt(sr2 * sv2) * rem + sr2 * rem ** 2


@dataclass(frozen=True)
class ThetaSurface:
    """values[m] is the solution at t_grid[m]; row n_t is the payoff."""

    z_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray


def default_grid(
    terms: WarrantTerms,
    params: ModelParams,
    t_start: float = 0.0,
    n_z: int = 400,
    n_t: int = 400,
    spec: QuadratureSpec = None,
) -> GridSpec:
    """Grid sized from the total variance: z_max = 5 (NX/k) exp(3 sqrt(vi))."""
    vi = variance_integral(t_start, terms.maturity, params, spec)
    moneyness = terms.shares_outstanding * terms.strike / terms.shares_per_warrant
    pad = math.exp(3.0 * math.sqrt(vi))
    return GridSpec(
        z_min=moneyness / (5.0 * pad),
        z_max=5.0 * moneyness * pad,
        n_z=n_z,
        n_t=n_t,
        t_start=t_start,
        maturity=terms.maturity,
    )


def _thomas(lower, diag, upper, rhs):
    """Solve a tridiagonal system; lower[0] and upper[-1] are ignored."""
    n = diag.size
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x


def solve_theta_pde(
    grid: GridSpec,
    terms: WarrantTerms,
    params: ModelParams,
    scheme: str = "crank_nicolson",
) -> ThetaSurface:
    """March the transformed problem backward from the payoff.

    Dirichlet boundaries: Theta(z_min, t) = 0 and Theta(z_max, t) =
    (k z_max - N X)^+ / (N + M k), both frozen in time; z_max should sit
    deep enough in the money for that to hold (default_grid arranges this).

    crank_nicolson opens with two fully implicit steps (Rannacher start) to
    damp the oscillations the payoff kink would otherwise excite; implicit
    is first-order in time but obeys a discrete maximum principle.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SCHEMES}")
    if grid.maturity != terms.maturity:
        raise ValueError("grid.maturity must match terms.maturity")
    dil = terms.dilution_factor
    k, nx = terms.shares_per_warrant, terms.shares_outstanding * terms.strike
    z = np.linspace(grid.z_min, grid.z_max, grid.n_z)
    t = np.linspace(grid.t_start, grid.maturity, grid.n_t + 1)
    dz = z[1] - z[0]
    dt = t[1] - t[0]
    vols = EffectiveVols(params, grid.maturity)

    values = np.empty((grid.n_t + 1, grid.n_z))
    values[-1] = dil * np.maximum(k * z - nx, 0.0)
    bc_lo = 0.0
    bc_hi = dil * max(k * grid.z_max - nx, 0.0)

    zsq = z[1:-1] ** 2  # interior nodes only
    for m in range(grid.n_t - 1, -1, -1):
        later = values[m + 1]
        implicit_step = scheme == "implicit" or m >= grid.n_t - 2
        if implicit_step:
            t_eval = t[m] if t[m] > 0.0 else t[m + 1]
            w_new, w_old = 1.0, 0.0
        else:
            t_eval = 0.5 * (t[m] + t[m + 1])
            w_new, w_old = 0.5, 0.5
        c = float(vols.sigma_bar_sq(t_eval))
        lam = dt * c * zsq / dz ** 2

        rhs = later[1:-1] + w_old * lam * (later[2:] - 2.0 * later[1:-1] + later[:-2])
        rhs[0] += w_new * lam[0] * bc_lo
        rhs[-1] += w_new * lam[-1] * bc_hi
        diag = 1.0 + 2.0 * w_new * lam
        off = -w_new * lam
        interior = _thomas(off, diag, off, rhs)
        if not np.all(np.isfinite(interior)):
            raise InstabilityError(f"non-finite solution while stepping to t={t[m]!r}")
        values[m, 0] = bc_lo
        values[m, -1] = bc_hi
        values[m, 1:-1] = interior
    return ThetaSurface(z_grid=z, t_grid=t, values=values)


def _central_steps(steps):
    h = tuple(float(s) for s in steps)
    if any(not np.isfinite(s) or s <= 0.0 for s in h):
        raise ValueError("finite-difference steps must be positive")
    return h


def residual_warrant_pde(price_fn, point, steps, params: ModelParams) -> float:
    """Pricing-equation defect of price_fn(V, r, t) at an interior point:

        W_t + sv~^2 V^2 W_VV + sr~^2 W_rr + 2 rho sr~ sv~ V W_Vr
            + mu_r t^(alpha-1)/Gamma(alpha) W_r + r V W_V - r W.

    Central differences with steps (h_v, h_r, h_t); needs t - h_t > 0 and
    V - h_v > 0 so every stencil point is interior.
    """
    v, r, t = (float(x) for x in point)
    h_v, h_r, h_t = _central_steps(steps)
    if t - h_t <= 0.0:
        raise ValueError("need t - h_t > 0: the coefficients are singular at t = 0")
    if v - h_v <= 0.0:
        raise ValueError("need V - h_v > 0")

    w = price_fn(v, r, t)
    w_t = (price_fn(v, r, t + h_t) - price_fn(v, r, t - h_t)) / (2.0 * h_t)
    w_vp, w_vm = price_fn(v + h_v, r, t), price_fn(v - h_v, r, t)
    w_rp, w_rm = price_fn(v, r + h_r, t), price_fn(v, r - h_r, t)
    w_v = (w_vp - w_vm) / (2.0 * h_v)
    w_vv = (w_vp - 2.0 * w + w_vm) / h_v ** 2
    w_r = (w_rp - w_rm) / (2.0 * h_r)
    w_rr = (w_rp - 2.0 * w + w_rm) / h_r ** 2
    w_vr = (
        price_fn(v + h_v, r + h_r, t)
        - price_fn(v + h_v, r - h_r, t)
        - price_fn(v - h_v, r + h_r, t)
        + price_fn(v - h_v, r - h_r, t)
    ) / (4.0 * h_v * h_r)

    sv2 = float(_tilde_sq(params.sigma_v, t, params))
    sr2 = float(_tilde_sq(params.sigma_r, t, params))
    drift = params.mu_r * t ** (params.alpha - 1.0) / gamma(params.alpha)
    return (
        w_t
        + sv2 * v ** 2 * w_vv
        + sr2 * w_rr
        + 2.0 * params.rho * math.sqrt(sr2 * sv2) * v * w_vr
        + drift * w_r
        + r * v * w_v
        - r * w
    )


def residual_bond_pde(price_fn, point, steps, params: ModelParams) -> float:
    """Pricing-equation defect of price_fn(r, t):

        P_t + mu_r t^(alpha-1)/Gamma(alpha) P_r + sr~^2 P_rr - r P.
    """
    r, t = (float(x) for x in point)
    h_r, h_t = _central_steps(steps)
    if t - h_t <= 0.0:
        raise ValueError("need t - h_t > 0: the coefficients are singular at t = 0")

    p = price_fn(r, t)
    p_t = (price_fn(r, t + h_t) - price_fn(r, t - h_t)) / (2.0 * h_t)
    p_rp, p_rm = price_fn(r + h_r, t), price_fn(r - h_r, t)
    p_r = (p_rp - p_rm) / (2.0 * h_r)
    p_rr = (p_rp - 2.0 * p + p_rm) / h_r ** 2

    sr2 = float(_tilde_sq(params.sigma_r, t, params))
    drift = params.mu_r * t ** (params.alpha - 1.0) / gamma(params.alpha)
    return p_t + drift * p_r + sr2 * p_rr - r * p
