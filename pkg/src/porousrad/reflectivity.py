"""Closed-form reflectivity of homogenized porous slabs.

One-sided (semi-infinite, dissipative) media get an approximate reflectivity
``rho_hat`` built from the first-passage transform plus a first-order
dissipation correction, and, in the weakly dissipative regime mu > 2*beta,
a rigorous Cauchy-Schwarz upper bound ``rho_upper``.  Two-sided slabs of
height h with no dissipation have an exact reflectivity.

Throughout, eta = beta/mu is the dissipation per mean free path and theta
is the incidence angle from the slab normal, in radians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cramer_lundberg import (discounted_overshoot_mean, mgf_one_sided,
                              one_sided_coefficients)
from .distributions import StepDistribution

__all__ = [
    "ValidityError", "MediumParams", "EstimateResult",
    "rho_hat_exponential", "rho_upper_exponential", "rho_hat_general",
    "delta_correction", "rho_two_sided", "rho_two_sided_from_overshoots",
    "near_field_validity", "estimate",
]


class ValidityError(ValueError):
    """Raised when a formula is evaluated outside its validity regime."""


@dataclass(frozen=True)
class MediumParams:
    """Physical slab description.

    beta   -- dissipation factor (inverse length), >= 0
    mu     -- free-path rate (inverse length), > 0
    theta  -- incidence angle from the normal, radians, in [0, pi/2)
    height -- slab height; None means semi-infinite (one-sided).  Two-sided
              slabs are non-dissipative, so height requires beta == 0.
    """
    beta: float
    mu: float
    theta: float = 0.0
    height: Optional[float] = None

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("free-path rate mu must be > 0")
        if self.beta < 0:
            raise ValueError("dissipation factor beta must be >= 0")
        if not 0.0 <= self.theta < math.pi / 2:
            raise ValueError("theta must lie in [0, pi/2)")
        if self.height is not None:
            if not self.height > 0:
                raise ValueError("slab height must be > 0")
            if self.beta != 0.0:
                raise ValueError("two-sided slabs are non-dissipative; "
                                 "set beta = 0 when height is given")

    @property
    def eta(self) -> float:
        return self.beta / self.mu

    @property
    def two_sided(self) -> bool:
        return self.height is not None


@dataclass(frozen=True)
class EstimateResult:
    """Packaged estimate for one medium.

    rho_upper is None whenever the bound does not apply (oblique incidence,
    two-sided slab, or mu <= 2*beta).  near_field_required is True when the
    bound was refused because mu <= 2*beta, i.e. the medium violates the
    equivalent wavelength condition lambda > 4*pi*k*L.  clamped records
    whether rho_hat had to be cut back into [0, 1].
    """
    rho_hat: float
    rho_upper: Optional[float]
    upper_valid: bool
    near_field_required: bool
    clamped: bool = False


def _check_one_sided(m: MediumParams, who: str):
    if m.two_sided:
        raise ValidityError(f"{who} applies to one-sided media only (height must be None)")


def rho_hat_exponential(m: MediumParams) -> float:
    """Approximate reflectivity of a one-sided Exp(mu) medium.

    rho_hat = (1 - s) * (1 + eta) / (1 + (eta + s) * cos(theta)),
    s = sqrt(2*eta / (1 + 2*eta)).

    Exact at eta = 0 (returns 1); decreasing in eta.
    """
    _check_one_sided(m, "rho_hat_exponential")
    eta = m.eta
    s = math.sqrt(2.0 * eta / (1.0 + 2.0 * eta))
    return (1.0 - s) * (1.0 + eta) / (1.0 + (eta + s) * math.cos(m.theta))


def rho_upper_exponential(m: MediumParams) -> float:
    """Cauchy-Schwarz upper bound on the reflectivity at normal incidence.

    rho_upper = sqrt(1 - s) * sqrt(1 / (1 - 2*eta)) / (1 + eta + s/2),
    s = sqrt(2*eta / (1 + 2*eta)).

    Only finite for mu > 2*beta; outside that regime the bound does not
    exist and a ValidityError is raised.  The same inequality expressed in
    wave terms is the near-field condition lambda > 4*pi*k*L with
    beta = 2*pi*k/lambda and L = 1/mu.  Derived for normal incidence only;
    oblique angles are refused rather than extrapolated.
    """
    _check_one_sided(m, "rho_upper_exponential")
    if m.theta != 0.0:
        raise ValidityError("rho_upper_exponential is derived for normal "
                            "incidence only (theta = 0)")
    if not m.mu > 2.0 * m.beta:
        raise ValidityError(
            "upper bound requires mu > 2*beta (near-field condition "
            "lambda > 4*pi*k*L); got mu = %g, beta = %g" % (m.mu, m.beta))
    eta = m.eta
    s = math.sqrt(2.0 * eta / (1.0 + 2.0 * eta))
    return (math.sqrt(1.0 - s) * math.sqrt(1.0 / (1.0 - 2.0 * eta))
            / (1.0 + eta + 0.5 * s))


def delta_correction(dist: StepDistribution, beta: float, epsilon: float) -> float:
    """First-order dissipation correction factor at finite expansion scale.

    With f(s) = E[exp(-s*Z/ybar)] the normalized transform of the
    zero-depth discounted overshoot (ybar the mean step), the factor is

        1 - beta * (f(2*eps) - f(eps)) / (eps / ybar).

    For Exp(mu) steps this is 1 + (beta/mu) / ((2*eps + 1)*(eps + 1)), and
    the eps -> 0 limit is 1 + beta/mu.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if beta == 0.0:
        return 1.0
    if dist.is_exponential:
        # f(s) = 1/(1 + s) here, so the difference quotient is exact
        mu = float(dist.rates[0])
        return 1.0 + (beta / mu) / ((2.0 * epsilon + 1.0) * (epsilon + 1.0))
    ybar = dist.mean()
    alpha = dist.laplace(2.0 * beta)
    norm = mgf_one_sided(dist, 0.0, alpha, 0.0)
    f2 = mgf_one_sided(dist, 0.0, alpha, 2.0 * epsilon / ybar) / norm
    f1 = mgf_one_sided(dist, 0.0, alpha, epsilon / ybar) / norm
    return 1.0 - beta * (f2 - f1) * ybar / epsilon


def rho_hat_general(dist: StepDistribution, beta: float, theta: float = 0.0,
                    epsilon: Optional[float] = None) -> float:
    """Approximate reflectivity for a general hyperexponential step law.

    Integrates the first-passage transform over the first scattering depth
    (drawn from the step law along the ray, projected by cos(theta)) and
    applies the dissipation correction.  With epsilon=None the correction
    uses its analytic zero-epsilon limit 1 + beta * E[Z0], which is what
    makes the single-exponential case collapse to rho_hat_exponential
    exactly; pass a positive epsilon to keep the finite difference.
    """
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if not 0.0 <= theta < math.pi / 2:
        raise ValueError("theta must lie in [0, pi/2)")
    if beta == 0.0:
        return 1.0
    alpha = dist.laplace(2.0 * beta)
    sol = one_sided_coefficients(dist, alpha, zeta=0.0)
    c = math.cos(theta)
    a, mus = dist.weights, dist.rates
    integral = 0.0
    for ci, gi in zip(sol.coeffs, sol.roots):
        integral += ci * float(np.sum(a * mus / (mus + (beta - gi) * c)))
    if epsilon is None:
        corr = 1.0 + beta * discounted_overshoot_mean(dist, alpha)
    else:
        corr = delta_correction(dist, beta, epsilon)
    return corr * integral


def rho_two_sided(mu: float, h: float, theta: float = 0.0) -> float:
    """Exact reflectivity of a non-dissipative two-sided slab:

        rho = ((1 - cos(theta)) * (1 - exp(-h*mu/cos(theta))) + h*mu) / (h*mu + 2).

    Transmissivity is 1 - rho; nothing is absorbed.
    """
    if not mu > 0:
        raise ValueError("mu must be > 0")
    if not h > 0:
        raise ValueError("h must be > 0")
    if not 0.0 <= theta < math.pi / 2:
        raise ValueError("theta must lie in [0, pi/2)")
    c = math.cos(theta)
    hmu = h * mu
    return ((1.0 - c) * (1.0 - math.exp(-hmu / c)) + hmu) / (hmu + 2.0)


def rho_two_sided_from_overshoots(x_depth: float, h: float, ez_plus: float,
                                  ez_minus: float, theta: float = 0.0) -> float:
    """Exit-bottom probability of the two-sided walk started at depth
    x_depth*cos(theta), expressed through the mean overshoots:

        (h - x_tilde + E[Z+]) / (E[Z-] + E[Z+] + h).
    """
    if ez_plus <= 0 or ez_minus <= 0:
        raise ValueError("overshoot means must be > 0")
    if not 0.0 <= theta < math.pi / 2:
        raise ValueError("theta must lie in [0, pi/2)")
    x_tilde = x_depth * math.cos(theta)
    if x_tilde < 0:
        raise ValueError("x_depth must be >= 0")
    if x_tilde > h:
        raise ValueError("first scattering lies beyond the slab "
                         f"(x_tilde = {x_tilde} > h = {h}); the ray transmits")
    return (h - x_tilde + ez_plus) / (ez_minus + ez_plus + h)


def near_field_validity(k_index: float, lam: float, mu: float) -> bool:
    """True iff lambda > 4*pi*k*L with L = 1/mu, i.e. mu > 2*beta for
    beta = 2*pi*k/lambda.  This is the regime where the upper bound exists."""
    if k_index < 0 or lam <= 0 or mu <= 0:
        raise ValueError("need k_index >= 0, lam > 0, mu > 0")
    return lam > 4.0 * math.pi * k_index / mu


def estimate(m: MediumParams) -> EstimateResult:
    """One-stop estimate used by the command line front end.

    Two-sided media get the exact slab formula.  One-sided media get
    rho_hat plus the upper bound when it applies (normal incidence and
    mu > 2*beta).  rho_hat is clamped to [0, 1] with the flag set if the
    raw formula strayed outside.
    """
    if m.two_sided:
        rho = rho_two_sided(m.mu, m.height, m.theta)
        return EstimateResult(rho_hat=rho, rho_upper=None, upper_valid=False,
                              near_field_required=False, clamped=False)
    rho = rho_hat_exponential(m)
    clamped = not 0.0 <= rho <= 1.0
    rho = min(1.0, max(0.0, rho))
    near_field_failed = not m.mu > 2.0 * m.beta
    upper = None
    upper_valid = False
    if m.theta == 0.0 and not near_field_failed:
        upper = rho_upper_exponential(m)
        upper_valid = True
    return EstimateResult(rho_hat=rho, rho_upper=upper, upper_valid=upper_valid,
                          near_field_required=near_field_failed, clamped=clamped)
