"""Zero-coupon bond P(r, t, T) = exp(-r (T - t) + f1) under the fractional
arithmetic short rate run on the inverse-stable clock.

The correction term f1 aggregates the rate's drift and fractional variance
over the remaining life:

    f1(t, T) = H sigma_r^2 / Gamma(alpha)^(2H) * int_0^tau (T-v)^(2 alpha H - 1) v^2 dv
             - mu_r / Gamma(alpha)            * int_0^tau (T-v)^(alpha - 1)    v   dv

with tau = T - t. Both weights can be singular at v = T; the integrals are
taken as [0, T] minus [tau, T] so the power substitution inside
integrate_singular absorbs the singular endpoint exactly.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .numerics import QuadratureSpec, gamma, integrate_adaptive, integrate_singular
from .processes import ModelParams

__all__ = [
    "F1_VARIANTS",
    "BondQuote",
    "f1_general",
    "bond_price",
    "bond_price_fbs_limit",
    "bond_price_classical",
]

# theorem_statement scales the drift term by 2H Gamma(alpha)^(1-2H); it does
# not reproduce the alpha -> 1 limit and exists for diagnostics only.
F1_VARIANTS = ("derivation_consistent", "theorem_statement")

_DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class BondQuote:
    """Price plus the exponent pieces, price = exp(-r * f2 + f1)."""

    price: float
    f1: float
    f2: float
    t: float
    maturity: float


def _check_times(t: float, maturity: float):
    if not (np.isfinite(t) and np.isfinite(maturity)):
        raise ValueError("t and maturity must be finite")
    if t < 0.0 or maturity < t:
        raise ValueError(f"need 0 <= t <= maturity, got t={t!r} maturity={maturity!r}")


def _weighted_integral(g, tau, maturity, exponent, spec):
    """int_0^tau g(v) (maturity - v)^(exponent-1) dv for 0 < tau <= maturity.

    exponent < 1: singular at v = maturity, evaluated as the difference of
    two upper-anchored integrals so the substitution handles the endpoint.
    exponent >= 1: the weight is merely Hoelder at v = maturity, integrate
    directly.
    """
    if exponent >= 1.0:
        power = exponent - 1.0

        def weighted(v):
            return g(v) * (maturity - v) ** power

        return integrate_adaptive(weighted, 0.0, tau, replace(spec, singular_exponent=1.0))
    sub_spec = replace(spec, singular_exponent=exponent)
    full = integrate_singular(g, 0.0, maturity, sub_spec)
    if tau >= maturity:
        return full
    return full - integrate_singular(g, tau, maturity, sub_spec)


def f1_general(
    t: float,
    maturity: float,
    params: ModelParams,
    spec: QuadratureSpec = None,
    variant: str = "derivation_consistent",
) -> float:
    """Exponent correction f1 over [t, maturity]; requires t < maturity."""
    _check_times(t, maturity)
    if t == maturity:
        raise ValueError("f1_general needs t < maturity; the bond is worth 1 at expiry")
    if variant not in F1_VARIANTS:
        raise ValueError(f"unknown f1 variant {variant!r}, expected one of {F1_VARIANTS}")
    spec = spec or _DEFAULT_SPEC
    tau = maturity - t
    g_alpha = gamma(params.alpha)
    out = 0.0
    if params.sigma_r != 0.0:
        beta = 2.0 * params.alpha * params.hurst
        vol_integral = _weighted_integral(np.square, tau, maturity, beta, spec)
        out += params.hurst * params.sigma_r ** 2 / g_alpha ** (2.0 * params.hurst) * vol_integral
    if params.mu_r != 0.0:
        drift_integral = _weighted_integral(
            lambda v: np.asarray(v, dtype=float), tau, maturity, params.alpha, spec
        )
        if variant == "theorem_statement":
            coef = 2.0 * params.hurst * params.mu_r / g_alpha ** (2.0 * params.hurst)
        else:
            coef = params.mu_r / g_alpha
        out -= coef * drift_integral
    return out


def bond_price(
    r: float,
    t: float,
    maturity: float,
    params: ModelParams,
    spec: QuadratureSpec = None,
    variant: str = "derivation_consistent",
) -> BondQuote:
    """Quote the zero-coupon bond; collapses to price 1 at t = maturity."""
    _check_times(t, maturity)
    if not np.isfinite(r):
        raise ValueError(f"rate must be finite, got {r!r}")
    if t == maturity:
        return BondQuote(price=1.0, f1=0.0, f2=0.0, t=t, maturity=maturity)
    f1 = f1_general(t, maturity, params, spec, variant)
    f2 = maturity - t
    return BondQuote(
        price=math.exp(-r * f2 + f1), f1=f1, f2=f2, t=t, maturity=maturity
    )


def bond_price_fbs_limit(r: float, maturity: float, hurst: float, mu_r: float, sigma_r: float) -> float:
    """Full-period price in the alpha -> 1 limit (fBm rate, no trapping):

        f1 = sigma_r^2 T^(2H+2) / ((2H+1)(2H+2)) - mu_r T^2 / 2.
    """
    if not 0.5 <= hurst < 1.0:
        raise ValueError(f"hurst must lie in [1/2, 1), got {hurst!r}")
    if not (np.isfinite(maturity) and maturity > 0.0):
        raise ValueError(f"maturity must be positive, got {maturity!r}")
    if sigma_r < 0.0:
        raise ValueError("sigma_r must be nonnegative")
    h2 = 2.0 * hurst
    f1 = (
        sigma_r ** 2 * maturity ** (h2 + 2.0) / ((h2 + 1.0) * (h2 + 2.0))
        - mu_r * maturity ** 2 / 2.0
    )
    return math.exp(-r * maturity + f1)


def bond_price_classical(r: float, tau: float, mu_r: float, sigma_r: float) -> float:
    """alpha = 1, H = 1/2 limit: exp(-r tau + sigma_r^2 tau^3/6 - mu_r tau^2/2)."""
    if not (np.isfinite(tau) and tau >= 0.0):
        raise ValueError(f"tau must be nonnegative, got {tau!r}")
    if sigma_r < 0.0:
        raise ValueError("sigma_r must be nonnegative")
    return math.exp(-r * tau + sigma_r ** 2 * tau ** 3 / 6.0 - mu_r * tau ** 2 / 2.0)
