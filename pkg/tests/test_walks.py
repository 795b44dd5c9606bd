import math

import numpy as np
import pytest

from porousrad import (
    OneSided,
    TwoSided,
    WalkConfig,
    empirical_mgf,
    exponential,
    hyperexponential,
    mgf_one_sided,
    sample_walk,
    sample_walk_batch,
)
from porousrad.walks import ExitSide


def test_walk_takes_at_least_one_step():
    # start exactly on the barrier: the first step still happens
    cfg = WalkConfig(x0=0.0, p=0.0, step=exponential(1.0))
    out = sample_walk(cfg, np.random.default_rng(0))
    assert out.t == 1
    assert out.exit_side is ExitSide.BOTTOM
    assert out.z_minus > 0.0
    assert out.z_plus == 0.0


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(x0=-1.0, p=0.5, step=exponential(1.0))
    with pytest.raises(ValueError):
        WalkConfig(x0=0.0, p=1.5, step=exponential(1.0))
    with pytest.raises(ValueError):
        WalkConfig(x0=3.0, p=0.5, step=exponential(1.0), barrier=TwoSided(2.0))


def test_all_down_walk_is_one_step():
    cfg = WalkConfig(x0=0.5, p=0.0, step=exponential(2.0))
    rng = np.random.default_rng(42)
    for _ in range(20):
        out = sample_walk(cfg, rng)
        if out.t == 1:
            assert out.travel_l == pytest.approx(out.z_minus + 0.5)
        assert out.exit_side is ExitSide.BOTTOM


def test_censoring_reports_partial_walk():
    cfg = WalkConfig(x0=5.0, p=0.5, step=exponential(1.0))
    out = sample_walk(cfg, np.random.default_rng(3), max_steps=3)
    if out.exit_side is None:
        assert out.censored
        assert out.t == 3
        assert out.z_minus == 0.0 and out.z_plus == 0.0
    # batch version agrees on the same stream
    batch = sample_walk_batch(cfg, 64, seed=17, max_steps=3)
    assert batch.n == 64
    assert batch.n_censored > 0
    assert np.all(batch.t <= 3)


def test_batch_matches_scalar_walks_on_shard_stream():
    from porousrad.seeding import shard_rng

    cfg = WalkConfig(x0=1.0, p=0.5, step=hyperexponential([0.3, 0.7], [1.0, 4.0]))
    batch = sample_walk_batch(cfg, 50, seed=2024)
    rng = shard_rng(2024, 0)
    for i in range(50):
        out = sample_walk(cfg, rng)
        assert out.t == batch.t[i]
        assert out.travel_l == pytest.approx(float(batch.travel_l[i]), rel=1e-15)
        assert out.z_minus == pytest.approx(float(batch.z_minus[i]), rel=1e-15)


def test_batch_worker_count_is_invisible():
    cfg = WalkConfig(x0=0.7, p=0.5, step=exponential(1.0), barrier=TwoSided(2.0))
    n = 70_000  # crosses a shard boundary
    a = sample_walk_batch(cfg, n, seed=5, workers=1)
    b = sample_walk_batch(cfg, n, seed=5, workers=3)
    assert np.array_equal(a.t, b.t)
    assert np.array_equal(a.travel_l, b.travel_l)
    assert np.array_equal(a.z_minus, b.z_minus)
    assert np.array_equal(a.z_plus, b.z_plus)
    assert np.array_equal(a.side, b.side)


def test_two_sided_exits_on_both_sides():
    cfg = WalkConfig(x0=1.0, p=0.5, step=exponential(1.0), barrier=TwoSided(2.0))
    batch = sample_walk_batch(cfg, 20_000, seed=11)
    bottom = np.sum(batch.side == 0)
    top = np.sum(batch.side == 1)
    assert bottom + top + batch.n_censored == batch.n
    # symmetric start: both sides roughly even
    assert abs(bottom - top) < 5 * math.sqrt(batch.n)
    out = batch.outcomes()[0]
    assert out.exit_side in (ExitSide.BOTTOM, ExitSide.TOP)


def test_empirical_mgf_against_transform():
    dist = exponential(1.0)
    cfg = WalkConfig(x0=1.0, p=0.5, step=dist)
    batch = sample_walk_batch(cfg, 200_000, seed=99, max_steps=10_000)
    for alpha, zeta in [(0.5, 0.0), (0.8, 1.0)]:
        est, se = empirical_mgf(batch, alpha, zeta)
        want = mgf_one_sided(dist, 1.0, alpha, zeta)
        assert abs(est - want) < 4 * se
        assert se < 0.01


def test_empirical_mgf_handles_list_input():
    cfg = WalkConfig(x0=0.5, p=0.5, step=exponential(1.0))
    rng = np.random.default_rng(8)
    outs = [sample_walk(cfg, rng) for _ in range(500)]
    est, se = empirical_mgf(outs, 0.6)
    hand = np.mean([0.6 ** o.t for o in outs])
    assert est == pytest.approx(hand, rel=1e-12)
