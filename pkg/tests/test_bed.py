import math

import numpy as np
import pytest

from porousrad import BedGeometry, BedSpec, acceleration_grid, build_bed, coverage_fraction, load_bed, save_bed


def test_spec_validation():
    with pytest.raises(ValueError):
        BedSpec(radius=0.0, width=1.0, depth=1.0, seed=1, volume_fraction=0.2)
    with pytest.raises(ValueError):
        BedSpec(radius=0.3, width=1.0, depth=1.0, seed=1, volume_fraction=0.2)
    with pytest.raises(ValueError):
        BedSpec(radius=0.05, width=1.0, depth=1.0, seed=1)  # neither n nor vf
    with pytest.raises(ValueError):
        BedSpec(radius=0.05, width=1.0, depth=1.0, seed=1, n=5, volume_fraction=0.2)
    with pytest.raises(ValueError):
        BedSpec(radius=0.05, width=1.0, depth=1.0, seed=1, volume_fraction=1.0)


def test_center_count_boolean_model():
    spec = BedSpec(radius=1.0, width=10.0, depth=10.0, seed=1, volume_fraction=0.2)
    lam = -math.log(0.8) / math.pi
    assert spec.center_count() == int(round(lam * 100.0))
    spec_n = BedSpec(radius=1.0, width=10.0, depth=10.0, seed=1, n=7)
    assert spec_n.center_count() == 7


def test_build_bed_is_deterministic():
    spec = BedSpec(radius=0.05, width=4.0, depth=5.0, seed=123, volume_fraction=0.15)
    a = build_bed(spec)
    b = build_bed(spec)
    assert np.array_equal(a.centers, b.centers)
    assert a.n == spec.center_count()
    assert np.all(a.centers[:, 0] >= 0) and np.all(a.centers[:, 0] <= 4.0)
    assert np.all(a.centers[:, 1] >= 0) and np.all(a.centers[:, 1] <= 5.0)
    c = build_bed(BedSpec(radius=0.05, width=4.0, depth=5.0, seed=124,
                          volume_fraction=0.15))
    assert not np.array_equal(a.centers, c.centers)


def test_save_load_round_trip(tmp_path):
    bed = build_bed(BedSpec(radius=0.07, width=3.0, depth=2.0, seed=9, n=40))
    p = tmp_path / "bed.txt"
    save_bed(bed, p)
    back = load_bed(p)
    assert back.radius == bed.radius
    assert back.width == bed.width and back.depth == bed.depth
    assert back.periodic == bed.periodic
    assert back.seed == bed.seed
    # %.17g round-trips float64 exactly
    assert np.array_equal(back.centers, bed.centers)


def test_load_rejects_malformed_header(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("0.05 4.0 5.0 1\n")  # missing seed field
    with pytest.raises(ValueError):
        load_bed(p)


def test_empty_bed_is_legal():
    bed = build_bed(BedSpec(radius=0.05, width=2.0, depth=2.0, seed=3, n=0))
    assert bed.n == 0
    cell, nx, ny, y_lo, starts, items = acceleration_grid(bed)
    assert starts[-1] == 0  # no disc memberships anywhere
    assert items.size == 0


def test_expected_coverage_matches_probe():
    bed = build_bed(BedSpec(radius=0.08, width=6.0, depth=6.0, seed=21,
                            volume_fraction=0.3))
    want = bed.expected_coverage()
    got = coverage_fraction(bed, n_probes=200_000, seed=5)
    # Boolean model: realized coverage concentrates near 1 - e^{-lam pi r^2}
    assert got == pytest.approx(want, abs=0.01)


def test_acceleration_grid_indexes_every_disc():
    bed = build_bed(BedSpec(radius=0.06, width=3.0, depth=4.0, seed=8, n=300))
    cell, nx, ny, y_lo, starts, items = acceleration_grid(bed)
    # every disc id appears at least once; all ids valid
    assert set(np.unique(items)) == set(range(300))
    # cells tile the padded bounding box
    assert nx * cell >= bed.width - 1e-12
    assert y_lo <= -bed.radius
    assert y_lo + ny * cell >= bed.depth + bed.radius
    # membership is honest: each listed disc's bounding box meets its cell
    for k in range(nx * ny):
        iy, ix = divmod(k, nx)
        for disc in items[starts[k]:starts[k + 1]]:
            cx, cy = bed.centers[disc]
            assert cy + 0.06 >= y_lo + iy * cell - 1e-12
            assert cy - 0.06 <= y_lo + (iy + 1) * cell + 1e-12
