"""Random 2-D beds of overlapping opaque discs.

Centers are dropped uniformly i.i.d. in [0, W) x [0, D) (a Boolean model),
so a target covered-area fraction phi maps to the center density
lambda = -ln(1 - phi) / (pi r^2).  Discs may overlap and may protrude past
the bottom (y < 0) and top (y > D) edges.  The bed is immutable once built
and can be serialized to a plain text format: a header line

    radius W D periodic seed

followed by one "cx cy" pair per line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

__all__ = ["BedSpec", "BedGeometry", "build_bed", "save_bed", "load_bed",
           "coverage_fraction", "acceleration_grid"]


@dataclass(frozen=True)
class BedSpec:
    """Recipe for a random bed.  Give exactly one of n / volume_fraction."""
    radius: float
    width: float
    depth: float
    seed: int
    periodic: bool = True
    n: Optional[int] = None
    volume_fraction: Optional[float] = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("particle radius must be > 0")
        if not self.width > 4 * self.radius:
            raise ValueError("domain width must exceed 4 particle radii")
        if not self.depth > 0:
            raise ValueError("domain depth must be > 0")
        if (self.n is None) == (self.volume_fraction is None):
            raise ValueError("give exactly one of n or volume_fraction")
        if self.n is not None and self.n < 0:
            raise ValueError("n must be >= 0")
        if self.volume_fraction is not None:
            if self.volume_fraction >= 1.0:
                raise ValueError("volume fraction >= 1 is unattainable for "
                                 "a Boolean disc bed")
            if self.volume_fraction < 0.0:
                raise ValueError("volume fraction must be >= 0")
            if self.volume_fraction > 0.9:
                warnings.warn("volume fraction targets above 0.9 need "
                              "enormous center densities; realized coverage "
                              "will converge slowly", stacklevel=2)

    def center_count(self) -> int:
        if self.n is not None:
            return self.n
        lam = -math.log(1.0 - self.volume_fraction) / (math.pi * self.radius ** 2)
        return int(round(lam * self.width * self.depth))


@dataclass(frozen=True)
class BedGeometry:
    radius: float
    width: float
    depth: float
    periodic: bool
    seed: int
    centers: np.ndarray  # shape (n, 2)

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    def center_density(self) -> float:
        return self.n / (self.width * self.depth)

    def expected_coverage(self) -> float:
        """Boolean-model coverage 1 - exp(-lambda pi r^2) at the realized
        center density."""
        return 1.0 - math.exp(-self.center_density() * math.pi * self.radius ** 2)


def build_bed(spec: BedSpec) -> BedGeometry:
    """Drop the centers.  Deterministic given spec.seed."""
    n = spec.center_count()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    centers = rng.random((n, 2))
    centers[:, 0] *= spec.width
    centers[:, 1] *= spec.depth
    return BedGeometry(radius=spec.radius, width=spec.width, depth=spec.depth,
                       periodic=spec.periodic, seed=spec.seed, centers=centers)


def save_bed(bed: BedGeometry, path) -> None:
    with open(path, "w") as f:
        f.write("%.17g %.17g %.17g %d %d\n"
                % (bed.radius, bed.width, bed.depth, int(bed.periodic), bed.seed))
        for cx, cy in bed.centers:
            f.write("%.17g %.17g\n" % (cx, cy))


def load_bed(path) -> BedGeometry:
    with open(path) as f:
        header = f.readline().split()
        if len(header) != 5:
            raise ValueError(f"{path}: malformed bed header (want 'radius W D "
                             "periodic seed')")
        radius, width, depth = (float(v) for v in header[:3])
        periodic = bool(int(header[3]))
        seed = int(header[4])
        rows = []
        for line in f:
            line = line.strip()
            if line:
                cx, cy = line.split()
                rows.append((float(cx), float(cy)))
    centers = np.array(rows, dtype=np.float64).reshape(-1, 2)
    return BedGeometry(radius=radius, width=width, depth=depth,
                       periodic=periodic, seed=seed, centers=centers)


def acceleration_grid(bed: BedGeometry, cell: Optional[float] = None):
    """Uniform-cell index of disc membership for the ray tracer.

    Returns (cell, nx, ny, y_lo, starts, items): the grid covers
    x in [0, W) (wrapping if periodic) and y in [y_lo, y_lo + ny*cell],
    which pads one radius past both slab faces; cell (i, j) holds the discs
    whose bounding boxes touch it, as items[starts[k] : starts[k+1]] for
    flat index k = j * nx + i.
    """
    r = bed.radius
    if cell is None:
        cell = max(r, bed.width / 2048)
    nx = max(1, int(math.ceil(bed.width / cell)))
    y_lo = -r - 1e-3 * r
    y_hi = bed.depth + r + 1e-3 * r
    ny = max(1, int(math.ceil((y_hi - y_lo) / cell)))
    buckets: list[list[int]] = [[] for _ in range(nx * ny)]
    for idx in range(bed.n):
        cx = bed.centers[idx, 0]
        cy = bed.centers[idx, 1]
        ix0 = int(math.floor((cx - r) / cell))
        ix1 = int(math.floor((cx + r) / cell))
        iy0 = max(0, int(math.floor((cy - r - y_lo) / cell)))
        iy1 = min(ny - 1, int(math.floor((cy + r - y_lo) / cell)))
        for iy in range(iy0, iy1 + 1):
            for ix in range(ix0, ix1 + 1):
                if bed.periodic:
                    jx = ix % nx
                else:
                    if ix < 0 or ix >= nx:
                        continue
                    jx = ix
                buckets[iy * nx + jx].append(idx)
    counts = np.array([len(b) for b in buckets], dtype=np.int64)
    starts = np.zeros(nx * ny + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    items = np.empty(int(starts[-1]), dtype=np.int64)
    for k, b in enumerate(buckets):
        items[starts[k]:starts[k + 1]] = b
    return cell, nx, ny, y_lo, starts, items


@njit(cache=True)
def _count_covered(px, py, cell, nx, y_lo, starts, items, cxs, cys, r2,
                   width, periodic):
    covered = 0
    for i in range(px.size):
        x = px[i]
        y = py[i]
        ix = int(x / cell) % nx
        iy = int((y - y_lo) / cell)
        k = iy * nx + ix
        for jj in range(starts[k], starts[k + 1]):
            j = items[jj]
            ddx = cxs[j] - x
            if periodic:
                ddx -= width * np.rint(ddx / width)
            ddy = cys[j] - y
            if ddx * ddx + ddy * ddy <= r2:
                covered += 1
                break
    return covered


def coverage_fraction(bed: BedGeometry, n_probes: int = 200_000,
                      seed: int = 0) -> float:
    """Monte Carlo estimate of the covered-area fraction of [0,W) x [0,D)."""
    if bed.n == 0:
        return 0.0
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    px = rng.random(n_probes) * bed.width
    py = rng.random(n_probes) * bed.depth
    cell, nx, ny, y_lo, starts, items = acceleration_grid(bed)
    covered = _count_covered(px, py, cell, nx, y_lo, starts, items,
                             np.ascontiguousarray(bed.centers[:, 0]),
                             np.ascontiguousarray(bed.centers[:, 1]),
                             bed.radius ** 2, bed.width, bed.periodic)
    return covered / n_probes
