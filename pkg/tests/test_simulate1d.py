"""Weighted 1-D transport tallies.

The record path re-derives every tally from per-ray outcomes; the tally
and record kernels share their inner loop, so the two aggregations must
agree to summation-order noise.
"""

import numpy as np
import pytest

from porousrad import (
    MediumParams,
    exponential,
    hyperexponential,
    one_sided_record,
    rho_two_sided,
    simulate_1d_one_sided,
    simulate_1d_two_sided,
)

EXP1 = exponential(1.0)


def test_conservation_one_sided():
    m = MediumParams(beta=0.3, mu=1.0, theta=0.0)
    t = simulate_1d_one_sided(m, EXP1, 50_000, seed=1)
    assert t.n_rays == 50_000
    assert t.tau == 0.0
    assert abs(t.rho + t.tau + t.absorbed - 1.0) < 1e-9
    assert 0.0 < t.rho < 1.0


def test_zero_absorption_shortcut():
    m = MediumParams(beta=0.0, mu=2.0, theta=0.0)
    t = simulate_1d_one_sided(m, exponential(2.0), 1000, seed=4)
    assert t.rho == 1.0
    assert t.rho_stderr == 0.0


def test_worker_determinism_one_sided():
    m = MediumParams(beta=0.2, mu=1.0, theta=0.3)
    a = simulate_1d_one_sided(m, EXP1, 80_000, seed=9, workers=1)
    b = simulate_1d_one_sided(m, EXP1, 80_000, seed=9, workers=4)
    assert a.rho == b.rho
    assert a.rho_stderr == b.rho_stderr
    assert a.censored == b.censored


def test_two_sided_tally_matches_closed_form():
    mu, h, theta = 1.0, 2.0, 0.0
    t = simulate_1d_two_sided(mu, h, theta, 200_000, seed=12)
    want = rho_two_sided(mu, h, theta)
    se = np.sqrt(want * (1 - want) / t.n_rays)
    assert abs(t.rho - want) < 4 * se
    assert abs(t.rho + t.tau + t.absorbed - 1.0) < 1e-9
    assert t.absorbed == 0.0  # no dissipation in the slab


def test_two_sided_oblique():
    t = simulate_1d_two_sided(2.0, 1.0, np.radians(60), 200_000, seed=13)
    want = rho_two_sided(2.0, 1.0, np.radians(60))
    assert abs(t.rho - want) < 4 * np.sqrt(want * (1 - want) / t.n_rays)


def test_record_reproduces_tally():
    m = MediumParams(beta=0.25, mu=1.0, theta=0.2)
    dist = hyperexponential([0.5, 0.5], [0.8, 3.0])
    n = 30_000
    tally = simulate_1d_one_sided(m, dist, n, seed=77)
    w, first, t, travel, zm, status = one_sided_record(m, dist, n, seed=77)
    assert w.shape == (n,)
    # same seeds, same rays: the tally is the record's mean, two code paths
    assert np.mean(w) == pytest.approx(tally.rho, abs=1e-12)
    var = np.mean(w**2) - np.mean(w) ** 2
    assert np.sqrt(var / n) == pytest.approx(tally.rho_stderr, abs=1e-12)
    assert int(np.sum(status == 1)) == tally.censored


def test_record_weight_decomposition():
    # each exited ray's weight is the Beer factor over its in-slab path,
    # exp(-beta * (first + travel - z_minus))
    m = MediumParams(beta=0.4, mu=1.0, theta=0.0)
    w, first, t, travel, zm, status = one_sided_record(m, EXP1, 2000, seed=5)
    ok = status == 0
    assert np.count_nonzero(ok) > 1500
    np.testing.assert_allclose(
        w[ok], np.exp(-0.4 * (first[ok] + travel[ok] - zm[ok])), rtol=1e-12)
    # floored rays carry exactly zero weight
    assert np.all(w[status == 2] == 0.0)


def test_bad_args():
    m = MediumParams(beta=0.1, mu=1.0, theta=0.0)
    with pytest.raises(ValueError):
        simulate_1d_one_sided(m, EXP1, 0, seed=1)
    with pytest.raises(ValueError):
        simulate_1d_one_sided(m, EXP1, 10, seed=1, workers=0)
    with pytest.raises(ValueError):
        simulate_1d_two_sided(1.0, -2.0, 0.0, 10, seed=1)
