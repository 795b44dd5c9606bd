"""Geometric ray tracing over disc beds.

The empty-bed cases have exact Beer-law answers, which pins the flux
tally, the attenuation bookkeeping, and the exit classification all at
once; the disc cases then only need conservation and determinism.
"""

import math

import numpy as np
import pytest

from porousrad import (
    BedSpec,
    EmissionModel,
    build_bed,
    simulate_2d,
    trace_ray,
)
from porousrad.seeding import shard_rng

EMPTY = build_bed(BedSpec(radius=0.05, width=4.0, depth=1.5, seed=1, n=0))


def test_empty_bed_transmits_beer_exactly():
    sim = simulate_2d(EMPTY, beta=1.0, theta=0.0, n_rays=200, seed=2)
    t = sim.tally
    assert t.tau == pytest.approx(math.exp(-1.5), abs=1e-13)
    assert t.rho == 0.0
    assert t.censored == 0
    assert sim.free_paths.size == 0


def test_empty_bed_oblique():
    theta = math.radians(60)
    sim = simulate_2d(EMPTY, beta=1.0, theta=theta, n_rays=50, seed=3)
    assert sim.tally.tau == pytest.approx(math.exp(-3.0), abs=1e-13)


def test_empty_bed_flux_profile():
    beta = 0.7
    sim = simulate_2d(EMPTY, beta=beta, theta=0.0, n_rays=64, seed=4, flux_bins=12)
    mids = 0.5 * (sim.flux.bin_edges[:-1] + sim.flux.bin_edges[1:])
    np.testing.assert_allclose(sim.flux.flux, np.exp(-beta * mids), atol=1e-12)
    assert sim.flux.bin_edges[0] == 0.0
    assert sim.flux.bin_edges[-1] == pytest.approx(EMPTY.depth)


def test_single_disc_hit_conserves_at_beta_zero():
    # one disc dead ahead of the beam; no absorption, so rho + tau = 1
    bed = build_bed(BedSpec(radius=0.5, width=4.0, depth=3.0, seed=1, n=1))
    object.__setattr__(bed, "centers", np.array([[2.0, 1.5]]))
    sim = simulate_2d(bed, beta=0.0, theta=0.0, n_rays=20_000, seed=8)
    t = sim.tally
    assert t.rho + t.tau == pytest.approx(1.0, abs=1e-12)
    assert t.absorbed == pytest.approx(0.0, abs=1e-12)
    # beam of width 4 meets a disc of diameter 1: about a quarter interacts
    hit_fraction = sim.first_flights.size and np.mean(np.isfinite(sim.first_flights))
    assert hit_fraction == pytest.approx(0.25, abs=0.02)


def test_trace_ray_record():
    rec = trace_ray(EMPTY, beta=0.2, theta=0.0, rng=shard_rng(7, 0))
    assert rec.exit == "transmitted_top"
    assert rec.free_paths == []
    assert rec.final_weight == pytest.approx(math.exp(-0.2 * 1.5), rel=1e-12)

    bed = build_bed(BedSpec(radius=0.05, width=6.0, depth=8.0, seed=42,
                            volume_fraction=0.2))
    rng = shard_rng(123, 0)
    rec = trace_ray(bed, beta=0.01, theta=0.0, rng=rng)
    assert rec.exit in ("reflected_bottom", "transmitted_top", "absorbed")
    assert len(rec.free_paths) >= 1
    assert all(fp >= 0.0 for fp in rec.free_paths)
    assert 0.0 <= rec.final_weight <= 1.0


def test_worker_count_invisible_2d():
    bed = build_bed(BedSpec(radius=0.05, width=6.0, depth=8.0, seed=11,
                            volume_fraction=0.15))
    n = 70_000  # crosses a shard boundary
    a = simulate_2d(bed, beta=0.5, theta=0.0, n_rays=n, seed=19, workers=1)
    b = simulate_2d(bed, beta=0.5, theta=0.0, n_rays=n, seed=19, workers=3)
    assert a.tally.rho == b.tally.rho
    assert a.tally.tau == b.tally.tau
    assert a.tally.rho_stderr == b.tally.rho_stderr
    assert np.array_equal(a.free_paths, b.free_paths)
    assert np.array_equal(a.flux.flux, b.flux.flux)


def test_conservation_with_discs_and_no_absorption():
    bed = build_bed(BedSpec(radius=0.05, width=6.0, depth=4.0, seed=5,
                            volume_fraction=0.2))
    sim = simulate_2d(bed, beta=0.0, theta=0.0, n_rays=30_000, seed=21)
    t = sim.tally
    assert abs(t.rho + t.tau + t.absorbed - 1.0) < 1e-9
    assert t.absorbed == pytest.approx(t.censored / t.n_rays, abs=1e-12)


def test_emission_models_differ():
    bed = build_bed(BedSpec(radius=0.05, width=6.0, depth=4.0, seed=5,
                            volume_fraction=0.2))
    hemi = simulate_2d(bed, beta=0.2, theta=0.0, n_rays=30_000, seed=33,
                       emission=EmissionModel.HEMISPHERIC)
    lamb = simulate_2d(bed, beta=0.2, theta=0.0, n_rays=30_000, seed=33,
                       emission=EmissionModel.LAMBERTIAN)
    assert hemi.tally.rho != lamb.tally.rho
    # both are sane reflectivities
    for t in (hemi.tally, lamb.tally):
        assert 0.0 < t.rho < 1.0


def test_free_paths_feed_the_fit():
    from porousrad import fit_free_paths

    bed = build_bed(BedSpec(radius=0.05, width=6.0, depth=8.0, seed=42,
                            volume_fraction=0.2))
    sim = simulate_2d(bed, beta=0.002, theta=0.0, n_rays=4_000, seed=55)
    fit = fit_free_paths(sim.free_paths)
    # transport mean free path of an opaque-disc bed is 1/(2 r lambda)
    lam = bed.n / (bed.width * bed.depth)
    mu_geom = 2 * bed.radius * lam
    assert fit.mu_mle == pytest.approx(mu_geom, rel=0.1)
    assert fit.ks_stat < 0.05
