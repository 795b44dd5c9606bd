import numpy as np
import pytest

from porousrad import exponential, hyperexponential, sample_step
from porousrad.distributions import StepDistribution


def test_exponential_moments():
    d = exponential(2.0)
    assert d.is_exponential
    assert d.mean() == pytest.approx(0.5)
    assert d.laplace(0.0) == pytest.approx(1.0)
    # E[e^{-sY}] = mu/(mu+s)
    assert d.laplace(3.0) == pytest.approx(2.0 / 5.0)


def test_hyperexponential_mean_and_laplace():
    d = hyperexponential([0.4, 0.6], [1.0, 3.0])
    assert not d.is_exponential
    assert d.mean() == pytest.approx(0.4 / 1.0 + 0.6 / 3.0)
    s = 1.7
    want = 0.4 * 1.0 / (1.0 + s) + 0.6 * 3.0 / (3.0 + s)
    assert d.laplace(s) == pytest.approx(want, rel=1e-14)


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        hyperexponential([0.5, 0.4], [1.0, 2.0])
    with pytest.raises(ValueError):
        hyperexponential([0.5, 0.5], [1.0, -2.0])
    with pytest.raises(ValueError):
        exponential(0.0)


def test_single_component_collapses_to_exponential():
    d = hyperexponential([1.0], [2.5])
    assert d.is_exponential
    assert d.laplace(1.0) == pytest.approx(2.5 / 3.5)


def test_sample_step_law():
    # KS test of the sampler against its own Laplace-implied CDF
    d = hyperexponential([0.3, 0.7], [0.5, 2.0])
    rng = np.random.default_rng(1234)
    n = 200_000
    xs = np.sort([sample_step(d, rng) for _ in range(n)])
    cdf = 1.0 - 0.3 * np.exp(-0.5 * xs) - 0.7 * np.exp(-2.0 * xs)
    steps = np.arange(1, n + 1) / n
    dks = max(np.max(steps - cdf), np.max(cdf - (steps - 1.0 / n)))
    # 3x the asymptotic 1% critical value 1.63/sqrt(n)
    assert dks < 3 * 1.63 / np.sqrt(n)
    assert xs[0] > 0.0


def test_sampler_mean_matches():
    d = exponential(4.0)
    rng = np.random.default_rng(77)
    xs = np.array([sample_step(d, rng) for _ in range(50_000)])
    assert xs.mean() == pytest.approx(0.25, abs=4 * 0.25 / np.sqrt(50_000))


def test_dist_is_frozen():
    d = exponential(1.0)
    assert isinstance(d, StepDistribution)
    with pytest.raises(Exception):
        d.rates = np.array([2.0])
