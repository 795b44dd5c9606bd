"""Step-length distributions for the renewal walk: exponential and finite
mixtures of exponentials (hyperexponential).

Everything downstream only ever needs three things from a step law: random
variates, the one-sided Laplace transform E[exp(-s*Y)], and the mean.  The
hyperexponential family keeps all three closed-form, which is what makes the
analytic machinery in :mod:`porousrad.cramer_lundberg` possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["StepDistribution", "exponential", "hyperexponential"]

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class StepDistribution:
    """A hyperexponential step-length law: with probability ``weights[i]``
    the step is Exp(``rates[i]``).

    A plain exponential is the one-component special case; use the
    :func:`exponential` helper.  Weights must be strictly positive and sum
    to 1 within 1e-12, rates strictly positive.
    """

    weights: np.ndarray
    rates: np.ndarray
    # Cumulative weights, precomputed for the samplers.
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        r = np.atleast_1d(np.asarray(self.rates, dtype=np.float64))
        if w.ndim != 1 or r.ndim != 1 or w.size != r.size or w.size == 0:
            raise ValueError("weights and rates must be 1-d arrays of equal, nonzero length")
        if np.any(r <= 0.0) or not np.all(np.isfinite(r)):
            raise ValueError("all rates must be strictly positive and finite")
        if np.any(w <= 0.0) or not np.all(np.isfinite(w)):
            raise ValueError("all weights must be strictly positive and finite")
        if abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 within {_WEIGHT_TOL}; got sum {w.sum()!r}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "rates", r)
        object.__setattr__(self, "_cum", np.cumsum(w))

    @property
    def n_components(self) -> int:
        return self.rates.size

    @property
    def is_exponential(self) -> bool:
        return self.rates.size == 1

    def mean(self) -> float:
        """E[Y] = sum_i a_i / mu_i."""
        return float(np.sum(self.weights / self.rates))

    def laplace(self, s) -> float:
        """One-sided Laplace transform E[exp(-s*Y)] = sum_i a_i mu_i/(mu_i + s).

        Defined for s > -min(rates); accepts scalars or arrays.
        """
        s = np.asarray(s, dtype=np.float64)
        if np.any(s <= -np.min(self.rates)):
            raise ValueError("laplace transform diverges at s <= -min(rates)")
        out = np.sum(self.weights * self.rates / (self.rates + s[..., None]), axis=-1)
        return float(out) if out.ndim == 0 else out

    def pdf(self, y):
        y = np.asarray(y, dtype=np.float64)
        out = np.sum(self.weights * self.rates * np.exp(-self.rates * y[..., None]), axis=-1)
        return float(out) if out.ndim == 0 else out

    def cdf(self, y):
        y = np.asarray(y, dtype=np.float64)
        out = 1.0 - np.sum(self.weights * np.exp(-self.rates * y[..., None]), axis=-1)
        return float(out) if out.ndim == 0 else out


def exponential(mu: float) -> StepDistribution:
    """Exp(mu) step law, i.e. the one-component mixture."""
    if mu <= 0:
        raise ValueError("rate mu must be strictly positive")
    return StepDistribution(np.array([1.0]), np.array([float(mu)]))


def hyperexponential(weights, rates) -> StepDistribution:
    """Mixture of exponentials with the given weights and rates."""
    return StepDistribution(np.asarray(weights, dtype=np.float64),
                            np.asarray(rates, dtype=np.float64))


def sample_step(dist: StepDistribution, rng: np.random.Generator) -> float:
    """Draw one step length by inverse CDF.

    One-component laws consume a single uniform (magnitude only); mixtures
    consume two (component pick, then magnitude).  The magnitude draw is
    -log(u)/mu with u clamped away from 0, so a given uniform maps to the
    same length on every platform.
    """
    rates = dist.rates
    if rates.size == 1:
        k = 0
    else:
        uc = rng.random()
        # rightmost component whose cumulative weight exceeds uc
        k = int(np.searchsorted(dist._cum, uc, side="right"))
        if k >= rates.size:  # guard uc == 1.0 edge
            k = rates.size - 1
    u = rng.random()
    if u < 1e-300:
        u = 1e-300
    return -np.log(u) / rates[k]
