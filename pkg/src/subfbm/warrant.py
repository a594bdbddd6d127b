"""Dilution-adjusted equity warrants in closed form.

A warrant holder receives k shares against the strike X; exercise enlarges
the share count from N to N + Mk, so every payoff carries the dilution
factor 1/(N + Mk). The firm value V is geometric fBm on the inverse-stable
clock and the strike leg is carried at the zero-coupon bond price.

Two discounting variants exist. `derivation_consistent` (default) prices

    W = (k V phi(d1) - N X P(r,t,T) phi(d2)) / (N + M k),

which reduces to Black-Scholes in the classical limit and solves the
pricing PDE. `paper_literal` multiplies the strike leg by an additional
exp(-r (T - t)); it double-discounts (P already discounts) and is kept so
the validation suite can demonstrate the inconsistency.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bond import bond_price
from .numerics import QuadratureSpec, gamma, integrate_adaptive, normal_cdf
from .processes import ModelParams

__all__ = [
    "WARRANT_VARIANTS",
    "WarrantTerms",
    "PriceResult",
    "dilution_payoff",
    "sigma_hat_sq",
    "variance_integral",
    "d_values",
    "warrant_price",
    "warrant_value_forward",
]

WARRANT_VARIANTS = ("derivation_consistent", "paper_literal")


@dataclass(frozen=True)
class WarrantTerms:
    """Contract terms: N shares outstanding, M warrants each for k shares
    at strike X, expiring at `maturity`."""

    shares_outstanding: float = 1.0
    warrants_outstanding: float = 1.0
    shares_per_warrant: float = 1.0
    strike: float = 1.0
    maturity: float = 1.0

    def __post_init__(self):
        vals = (self.shares_outstanding, self.warrants_outstanding,
                self.shares_per_warrant, self.strike, self.maturity)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("warrant terms must be finite")
        if self.shares_outstanding <= 0.0:
            raise ValueError("shares_outstanding must be positive")
        if self.warrants_outstanding < 0.0:
            raise ValueError("warrants_outstanding must be nonnegative")
        if self.shares_per_warrant <= 0.0:
            raise ValueError("shares_per_warrant must be positive")
        if self.strike <= 0.0:
            raise ValueError("strike must be positive")
        if self.maturity < 0.0:
            raise ValueError("maturity must be nonnegative")

    @property
    def dilution_factor(self) -> float:
        return 1.0 / (self.shares_outstanding
                      + self.warrants_outstanding * self.shares_per_warrant)


@dataclass(frozen=True)
class PriceResult:
    price: float
    d1: float
    d2: float
    variance_integral: float
    variant: str


def dilution_payoff(value, terms: WarrantTerms):
    """(k V - N X)^+ / (N + M k); accepts scalar or ndarray V >= 0."""
    v = np.asarray(value, dtype=float)
    if np.any(v < 0.0) or not np.all(np.isfinite(v)):
        raise ValueError("firm value must be finite and nonnegative")
    intrinsic = np.maximum(
        terms.shares_per_warrant * v - terms.shares_outstanding * terms.strike, 0.0
    )
    out = terms.dilution_factor * intrinsic
    return float(out) if np.isscalar(value) else out


def sigma_hat_sq(v, maturity: float, params: ModelParams):
    """Forward variance rate sigma_v^2 + 2 rho sigma_r sigma_v (T-v)
    + sigma_r^2 (T-v)^2; vectorized in v."""
    rem = maturity - np.asarray(v, dtype=float)
    return (
        params.sigma_v ** 2
        + 2.0 * params.rho * params.sigma_r * params.sigma_v * rem
        + params.sigma_r ** 2 * rem ** 2
    )


def variance_integral(
    t: float, maturity: float, params: ModelParams, spec: QuadratureSpec = None
) -> float:
    """Total variance 2H/Gamma(alpha)^(2H) * int_t^T sigma_hat^2(v) v^(2 alpha H - 1) dv.

    The weight v^(beta-1) with beta = 2 alpha H may be singular at v = 0;
    the substitution u = v^beta turns the integrand into
    sigma_hat^2(u^(1/beta)) / beta, bounded for every admissible beta.
    """
    if not (np.isfinite(t) and np.isfinite(maturity)) or t < 0.0:
        raise ValueError(f"need finite 0 <= t < maturity, got t={t!r} maturity={maturity!r}")
    if t >= maturity:
        raise ValueError("variance_integral needs t < maturity")
    beta = 2.0 * params.alpha * params.hurst
    inv = 1.0 / beta

    def transformed(u):
        return sigma_hat_sq(u ** inv, maturity, params)

    q = integrate_adaptive(transformed, t ** beta, maturity ** beta, spec) / beta
    vi = 2.0 * params.hurst / gamma(params.alpha) ** (2.0 * params.hurst) * q
    # roundoff can leave a signed zero when all vols vanish
    return max(vi, 0.0)


def _d_pair(log_moneyness: float, vi: float):
    sq = math.sqrt(vi)
    d1 = (log_moneyness + 0.5 * vi) / sq
    return d1, d1 - sq


def d_values(
    value: float,
    r: float,
    t: float,
    terms: WarrantTerms,
    params: ModelParams,
    spec: QuadratureSpec = None,
):
    """(d1, d2) diagnostics; requires t < maturity and positive variance."""
    if not (np.isfinite(value) and value > 0.0):
        raise ValueError(f"firm value must be positive, got {value!r}")
    vi = variance_integral(t, terms.maturity, params, spec)
    if vi == 0.0:
        raise ValueError("variance integral is zero; the price is the deterministic payoff")
    p = bond_price(r, t, terms.maturity, params, spec).price
    log_m = (
        math.log(terms.shares_per_warrant * value
                 / (terms.shares_outstanding * terms.strike))
        - math.log(p)
    )
    return _d_pair(log_m, vi)


def _degenerate_price(value, p, discount, terms, variant):
    """vi -> 0+ limit: a deterministic in/out-of-the-money decision."""
    kv = terms.shares_per_warrant * value
    nxp = terms.shares_outstanding * terms.strike * p
    if kv > nxp:
        return terms.dilution_factor * (kv - terms.shares_outstanding * terms.strike * discount * p)
    return 0.0


def warrant_price(
    value: float,
    r: float,
    t: float,
    terms: WarrantTerms,
    params: ModelParams,
    spec: QuadratureSpec = None,
    variant: str = "derivation_consistent",
) -> PriceResult:
    """Closed-form warrant value at firm value `value` and short rate r."""
    if variant not in WARRANT_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}, expected one of {WARRANT_VARIANTS}")
    if not (np.isfinite(value) and value > 0.0):
        raise ValueError(f"firm value must be positive, got {value!r}")
    if not np.isfinite(r):
        raise ValueError(f"rate must be finite, got {r!r}")
    if not np.isfinite(t) or t < 0.0 or t > terms.maturity:
        raise ValueError(f"need 0 <= t <= maturity, got t={t!r}")

    if t == terms.maturity:
        payoff = dilution_payoff(value, terms)
        d = math.inf if payoff > 0.0 else -math.inf
        return PriceResult(price=payoff, d1=d, d2=d,
                           variance_integral=0.0, variant=variant)

    vi = variance_integral(t, terms.maturity, params, spec)
    p = bond_price(r, t, terms.maturity, params, spec).price
    discount = math.exp(-r * (terms.maturity - t)) if variant == "paper_literal" else 1.0

    if vi == 0.0:
        price = _degenerate_price(value, p, discount, terms, variant)
        d = math.inf if price > 0.0 else -math.inf
        return PriceResult(price=price, d1=d, d2=d,
                           variance_integral=0.0, variant=variant)

    log_m = (
        math.log(terms.shares_per_warrant * value
                 / (terms.shares_outstanding * terms.strike))
        - math.log(p)
    )
    d1, d2 = _d_pair(log_m, vi)
    price = terms.dilution_factor * (
        terms.shares_per_warrant * value * normal_cdf(d1)
        - terms.shares_outstanding * terms.strike * discount * p * normal_cdf(d2)
    )
    return PriceResult(price=price, d1=d1, d2=d2,
                       variance_integral=vi, variant=variant)


def warrant_value_forward(
    z: float,
    t: float,
    terms: WarrantTerms,
    params: ModelParams,
    spec: QuadratureSpec = None,
) -> float:
    """Warrant value per unit of zero-coupon bond as a function of the
    bond-forward firm value z = V / P(r, t, T).

    This is the closed-form solution of the transformed terminal-value
    problem Theta_t + sigma_bar^2(t) z^2 Theta_zz = 0,
    Theta(z, T) = (k z - N X)^+ / (N + M k); the pde module checks its
    finite-difference solver against it. Multiplying by P recovers the
    default-variant warrant_price.
    """
    if not (np.isfinite(z) and z > 0.0):
        raise ValueError(f"forward value must be positive, got {z!r}")
    if t == terms.maturity:
        return dilution_payoff(z, terms)
    vi = variance_integral(t, terms.maturity, params, spec)
    kz = terms.shares_per_warrant * z
    nx = terms.shares_outstanding * terms.strike
    if vi == 0.0:
        return terms.dilution_factor * max(kz - nx, 0.0)
    d1, d2 = _d_pair(math.log(kz / nx), vi)
    return terms.dilution_factor * (kz * normal_cdf(d1) - nx * normal_cdf(d2))
