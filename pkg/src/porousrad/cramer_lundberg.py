"""Analytic first-passage machinery for hyperexponential steps.

The discounted overshoot transform of a stopped walk,
``E[alpha**T * exp(-zeta * Z)]``, is a finite mixture of exponentials in the
starting depth whose decay rates are the nonpositive roots ``gamma_i`` of

    p * L(gamma) + q * L(-gamma) = 1 / alpha,

where ``L`` is the Laplace transform of the step law.  This module finds
those roots, builds the mixture coefficients for the one-sided problem, and
solves the linear system that pins the coefficients of the two-sided
(bottom and top barrier) problem.  Everything here is exact for exponential
mixtures; no sampling is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .distributions import StepDistribution

__all__ = [
    "NumericalError", "CramerLundbergSolution", "cramer_lundberg_roots",
    "mgf_one_sided", "one_sided_coefficients", "two_sided_coefficients",
    "two_sided_mgf", "two_sided_exit_probability", "two_sided_overshoot_means",
    "discounted_overshoot_mean",
]

RESIDUAL_TOL = 1e-10
# Roots closer than this are treated as confluent and rejected: the
# coefficient formulas assume distinct roots.
DEGENERATE_TOL = 1e-8
# alpha == 1 makes the two-sided system singular (the zero root appears on
# both sides); it is solved at 1 - ALPHA_ONE_SHIFT instead, which perturbs
# exit probabilities by O(shift * E[T]).
ALPHA_ONE_SHIFT = 1e-9


class NumericalError(RuntimeError):
    """A root polish or linear solve failed to meet its residual bound."""


def _cl_residual(gamma, dist: StepDistribution, p: float, alpha: float):
    """p*L(gamma) + q*L(-gamma) - 1/alpha, safe at the poles."""
    a, mus = dist.weights, dist.rates
    q = 1.0 - p
    lp = np.sum(a * mus / (mus + gamma))
    lm = np.sum(a * mus / (mus - gamma))
    return p * lp + q * lm - 1.0 / alpha


def _cl_derivative(gamma, dist: StepDistribution, p: float):
    a, mus = dist.weights, dist.rates
    q = 1.0 - p
    return (-p * np.sum(a * mus / (mus + gamma) ** 2)
            + q * np.sum(a * mus / (mus - gamma) ** 2))


def _cleared_polynomial(dist: StepDistribution, p: float, alpha: float):
    """Coefficients (low order first) of the CL equation with denominators
    cleared by prod_j (mu_j + g) * prod_k (mu_k - g)."""
    a, mus = dist.weights, dist.rates
    q = 1.0 - p
    plus = [np.array([m, 1.0]) for m in mus]    # (mu_j + g)
    minus = [np.array([m, -1.0]) for m in mus]  # (mu_k - g)

    def prod(polys):
        out = np.array([1.0])
        for f in polys:
            out = npoly.polymul(out, f)
        return out

    all_plus = prod(plus)
    all_minus = prod(minus)
    poly = npoly.polymul(all_plus, all_minus) * (-1.0 / alpha)
    for i in range(len(mus)):
        term = prod(plus[:i] + plus[i + 1:] + minus)
        poly = npoly.polyadd(poly, p * a[i] * mus[i] * term)
        term = prod(plus + minus[:i] + minus[i + 1:])
        poly = npoly.polyadd(poly, q * a[i] * mus[i] * term)
    return poly


def _polish_root(g0, dist, p, alpha, max_iter=60):
    """Damped Newton on the rational form, starting from a polynomial root."""
    g = float(g0)
    for _ in range(max_iter):
        f = _cl_residual(g, dist, p, alpha)
        if abs(f) < 1e-14:
            return g
        df = _cl_derivative(g, dist, p)
        if df == 0.0:
            return g
        step = f / df
        # keep the iterate away from the transform poles
        trial = g - step
        shrink = 0
        while shrink < 50:
            if abs(trial) < np.min(dist.rates) and (
                    abs(_cl_residual(trial, dist, p, alpha)) <= abs(f)):
                break
            step *= 0.5
            trial = g - step
            shrink += 1
        g = trial
    return g


def cramer_lundberg_roots(dist: StepDistribution, p: float = 0.5,
                          alpha: float = 1.0) -> np.ndarray:
    """All nonpositive roots gamma of p*L(gamma) + q*L(-gamma) = 1/alpha.

    Returned sorted descending (closest to zero first), one root per mixture
    component for the symmetric walk.  For Exp(mu) with p = 1/2 the single
    root is -mu*sqrt(1 - alpha).

    Raises NumericalError if a polished root misses the 1e-10 residual bound
    or two roots collide within 1e-8 (the coefficient formulas need distinct
    roots).
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]; the transform diverges otherwise")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    m = dist.n_components
    poly = _cleared_polynomial(dist, p, alpha)
    raw = npoly.polyroots(poly)
    real = raw[np.abs(raw.imag) <= 1e-7 * (1.0 + np.abs(raw.real))].real
    if p == 0.5:
        # symmetric walk: 2m real roots in +/- pairs; the m most negative
        # are the nonpositive ones (the zero root at alpha=1 included).
        if alpha == 1.0:
            # gamma = 0 solves the equation exactly but reaches polyroots
            # as a double root smeared into a noise pair (sometimes a
            # complex one); pin it and keep the m-1 strictly negative.
            if real.size < 2 * (m - 1):
                raise NumericalError(
                    f"expected {2 * (m - 1)} strictly nonzero real roots "
                    f"for the symmetric walk at alpha=1, found {real.size}")
            cand = np.append(np.sort(real)[: m - 1], 0.0)
        else:
            if real.size < 2 * m:
                raise NumericalError(
                    f"expected {2 * m} real roots for the symmetric walk, "
                    f"found {real.size} (alpha={alpha})")
            cand = np.sort(real)[:m]
    else:
        cand = np.sort(real[real <= 1e-9])
    roots = np.array([_polish_root(g, dist, p, alpha) for g in cand])
    # snap the alpha -> 1 zero root
    tiny = 1e-9 * max(1.0, float(np.max(dist.rates)))
    roots[np.abs(roots) < tiny] = 0.0
    roots = np.sort(roots)[::-1]
    for g in roots:
        res = abs(_cl_residual(g, dist, p, alpha))
        if res > RESIDUAL_TOL:
            raise NumericalError(
                f"root polish failed: residual {res:.3e} at gamma={g!r} "
                f"(alpha={alpha})")
    if m > 1 and np.min(np.abs(np.diff(roots))) < DEGENERATE_TOL:
        raise NumericalError(
            f"near-degenerate roots (closer than {DEGENERATE_TOL}); "
            "confluent mixtures are not supported")
    return roots


@dataclass(frozen=True)
class CramerLundbergSolution:
    """Roots and mixture coefficients of a discounted overshoot transform.

    One-sided: value(x) = sum_i coeffs[i] * exp(roots[i] * x).
    Two-sided: plus sum_i coeffs_pos[i] * exp(roots_pos[i] * (x - h));
    the top-side coefficients are anchored at the top barrier so nothing
    overflows for wide slabs.
    """
    alpha: float
    roots: np.ndarray
    coeffs: np.ndarray
    roots_pos: Optional[np.ndarray] = None
    coeffs_pos: Optional[np.ndarray] = None
    h: Optional[float] = None

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        val = np.sum(self.coeffs * np.exp(self.roots * x[..., None]), axis=-1)
        if self.roots_pos is not None:
            val = val + np.sum(
                self.coeffs_pos * np.exp(self.roots_pos * (x[..., None] - self.h)),
                axis=-1)
        return float(val) if val.ndim == 0 else val


def one_sided_coefficients(dist: StepDistribution, alpha: float,
                           zeta: float = 0.0) -> CramerLundbergSolution:
    """Coefficients c_i of E[alpha**T exp(-zeta Z)] = sum c_i exp(gamma_i x).

    c_i = R(gamma_i)/R(zeta) * prod_{j != i} (zeta - gamma_j)/(gamma_i - gamma_j)
    with R(v) = prod_k (mu_k + v).  For a single exponential this collapses
    to (gamma + mu)/(zeta + mu).
    """
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    gam = cramer_lundberg_roots(dist, 0.5, alpha)
    mus = dist.rates
    r_zeta = np.prod(mus + zeta)
    cs = np.empty_like(gam)
    for i, g in enumerate(gam):
        num = np.prod(mus + g)
        for j, gj in enumerate(gam):
            if j != i:
                num *= (zeta - gj) / (g - gj)
        cs[i] = num / r_zeta
    return CramerLundbergSolution(alpha=alpha, roots=gam, coeffs=cs)


def mgf_one_sided(dist: StepDistribution, x: float, alpha: float,
                  zeta: float = 0.0) -> float:
    """E[alpha**T * exp(-zeta * Z)] for the symmetric one-sided walk from x."""
    if x < 0:
        raise ValueError("starting depth x must be >= 0")
    return one_sided_coefficients(dist, alpha, zeta).evaluate(x)


def two_sided_coefficients(dist: StepDistribution, h: float, alpha: float,
                           zeta: float = 0.0, xi: float = 0.0,
                           A: float = 1.0, B: float = 0.0) -> CramerLundbergSolution:
    """Solve the two-sided barrier system for
    value(x) = A*E[alpha**T exp(-zeta Z-); exit bottom]
             + B*E[alpha**T exp(-xi Z+); exit top].

    The unknowns are the mixture coefficients on the m decaying and m
    growing exponentials; matching the transform on each side of the slab
    gives 2m linear equations.  The growing-side coefficients are solved in
    the basis exp(delta_i * (x - h)) so wide slabs stay well conditioned.

    alpha = 1 is handled as the limit alpha -> 1 (shift 1e-9): at exactly 1
    the zero root appears among both the gammas and the deltas and the
    system is singular.
    """
    if not h > 0:
        raise ValueError("barrier height h must be > 0")
    if zeta < 0 or xi < 0:
        raise ValueError("zeta and xi must be >= 0")
    alpha_eff = alpha
    if alpha >= 1.0:
        alpha_eff = 1.0 - ALPHA_ONE_SHIFT
    gam = cramer_lundberg_roots(dist, 0.5, alpha_eff)
    dlt = -gam  # symmetric walk: growing roots mirror the decaying ones
    m = dist.n_components
    mus = dist.rates
    M = np.zeros((2 * m, 2 * m))
    rhs = np.zeros(2 * m)
    eg = np.exp(gam * h)   # decaying: fine for any h
    ed = np.exp(-dlt * h)  # anchored top-side basis evaluated at x = 0
    for t in range(m):
        mt = mus[t]
        M[t, :m] = 1.0 / (mt + gam)
        M[t, m:] = ed / (mt + dlt)
        rhs[t] = A / (mt + zeta)
        M[m + t, :m] = eg / (mt - gam)
        M[m + t, m:] = 1.0 / (mt - dlt)
        rhs[m + t] = B / (mt + xi)
    try:
        sol = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"two-sided coefficient system is singular at h={h}, alpha={alpha}") from exc
    resid = np.max(np.abs(M @ sol - rhs))
    if resid > RESIDUAL_TOL * max(1.0, np.max(np.abs(rhs))):
        raise NumericalError(
            f"two-sided coefficient solve residual {resid:.3e} exceeds "
            f"{RESIDUAL_TOL} at h={h}, alpha={alpha}")
    return CramerLundbergSolution(alpha=alpha, roots=gam, coeffs=sol[:m],
                                  roots_pos=dlt, coeffs_pos=sol[m:], h=h)


def two_sided_mgf(dist: StepDistribution, x: float, h: float, alpha: float,
                  zeta: float = 0.0, xi: float = 0.0,
                  A: float = 1.0, B: float = 0.0) -> float:
    if not 0.0 <= x <= h:
        raise ValueError("need 0 <= x <= h")
    return two_sided_coefficients(dist, h, alpha, zeta, xi, A, B).evaluate(x)


def two_sided_exit_probability(dist: StepDistribution, x: float, h: float) -> float:
    """P(exit through the bottom barrier) for the symmetric walk from x."""
    return two_sided_mgf(dist, x, h, alpha=1.0, A=1.0, B=0.0)


def two_sided_overshoot_means(dist: StepDistribution, x: float, h: float,
                              step: float = 1e-5):
    """(E[Z- | exit bottom], E[Z+ | exit top], P(exit bottom)) by central
    differencing the two-sided transform at zero argument.

    A slightly negative transform argument is fine here: the system only
    needs mu_t + zeta != 0.
    """
    p_bot = two_sided_exit_probability(dist, x, h)
    p_top = two_sided_mgf(dist, x, h, 1.0, A=0.0, B=1.0)
    g_hi = _signed_mgf(dist, x, h, zeta=step, A=1.0, B=0.0)
    g_lo = _signed_mgf(dist, x, h, zeta=-step, A=1.0, B=0.0)
    ez_bot = (g_lo - g_hi) / (2.0 * step)
    t_hi = _signed_mgf(dist, x, h, xi=step, A=0.0, B=1.0)
    t_lo = _signed_mgf(dist, x, h, xi=-step, A=0.0, B=1.0)
    ez_top = (t_lo - t_hi) / (2.0 * step)
    return ez_bot / p_bot, ez_top / p_top, p_bot


def _signed_mgf(dist, x, h, zeta=0.0, xi=0.0, A=1.0, B=0.0, alpha=1.0):
    """Two-sided transform without the zeta/xi >= 0 guard (for differencing)."""
    alpha_eff = min(alpha, 1.0 - ALPHA_ONE_SHIFT)
    gam = cramer_lundberg_roots(dist, 0.5, alpha_eff)
    dlt = -gam
    m = dist.n_components
    mus = dist.rates
    M = np.zeros((2 * m, 2 * m))
    rhs = np.zeros(2 * m)
    eg = np.exp(gam * h)
    ed = np.exp(-dlt * h)
    for t in range(m):
        mt = mus[t]
        M[t, :m] = 1.0 / (mt + gam)
        M[t, m:] = ed / (mt + dlt)
        rhs[t] = A / (mt + zeta)
        M[m + t, :m] = eg / (mt - gam)
        M[m + t, m:] = 1.0 / (mt - dlt)
        rhs[m + t] = B / (mt + xi)
    sol = np.linalg.solve(M, rhs)
    val = np.sum(sol[:m] * np.exp(gam * x)) + np.sum(sol[m:] * np.exp(dlt * (x - h)))
    return float(val)


def discounted_overshoot_mean(dist: StepDistribution, alpha: float) -> float:
    """E[alpha**T * Z] / E[alpha**T] for the one-sided walk started at 0.

    This is -f'(0) for f(zeta) = M(0, alpha, zeta)/M(0, alpha, 0), evaluated
    analytically from the coefficient products:

        d/dzeta log c_i(zeta) |_0 = -sum_k 1/mu_k - sum_{j != i} 1/gamma_j.

    For a single exponential it is exactly 1/mu; used by the dissipation
    correction in its zero-epsilon limit.  Requires alpha < 1 (at alpha = 1
    the zero root makes the discounted mean degenerate).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("discounted overshoot mean needs 0 < alpha < 1")
    sol = one_sided_coefficients(dist, alpha, zeta=0.0)
    gam, cs = sol.roots, sol.coeffs
    inv_mu = float(np.sum(1.0 / dist.rates))
    total = float(np.sum(cs))
    acc = 0.0
    for i in range(gam.size):
        others = np.delete(gam, i)
        extra = float(np.sum(1.0 / others)) if others.size else 0.0
        acc += cs[i] * (inv_mu + extra)
    return acc / total
