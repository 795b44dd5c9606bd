"""Geometric Monte Carlo ray tracing over 2-D disc beds.

Rays enter from below the slab face (y = 0 plane), tilted by theta from the
normal, and bounce around the disc bed by exact ray-circle intersection on
a uniform acceleration grid (no pixel marching).  Discs are opaque with
perfectly reflecting surfaces; every hit re-emits the ray from the hit
point into the half-plane of the outward surface normal.  All dissipation
lives in the matrix: along every flight segment the weight decays by
exp(-beta * segment length inside y in [0, D]).

Exit through the bottom face is a reflection, exit past the top of the bed
a transmission; a ray whose weight falls under the cutoff is terminated and
booked as absorbed, and runaway rays (bounce or traversal caps) are counted
as censored.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .bed import BedGeometry, acceleration_grid
from .seeding import SHARD_SIZE, shard_plan
from .simulate1d import TallyResult

__all__ = ["EmissionModel", "TraceRecord", "FluxProfile", "Simulation2D",
           "trace_ray", "simulate_2d", "WEIGHT_CUTOFF"]

WEIGHT_CUTOFF = 1e-8
MAX_BOUNCES = 1_000_000
# DDA cells per flight segment before the ray is declared runaway.  Real
# segments cross a handful of cells; only a near-horizontal flight through
# a void bed can approach this.
MAX_SEGMENT_CELLS = 2_000_000

EXIT_REFLECTED = 0
EXIT_TRANSMITTED = 1
EXIT_ABSORBED = 2
EXIT_CENSORED = 3


class EmissionModel(enum.Enum):
    """Re-emission law at an opaque surface, about the outward normal."""
    HEMISPHERIC = "hemispheric"
    LAMBERTIAN = "lambertian"


@dataclass(frozen=True)
class TraceRecord:
    """One traced ray.  free_paths[0] is the entry flight (face to first
    hit); the rest are distances between consecutive scattering events.
    Weights only decrease along the trace."""
    free_paths: list
    exit: str  # "reflected_bottom" | "transmitted_top" | "absorbed"
    final_weight: float


@dataclass(frozen=True)
class FluxProfile:
    """Net upward weighted crossings of each depth bin's midpoint,
    normalized per ray."""
    bin_edges: np.ndarray
    flux: np.ndarray


@dataclass(frozen=True)
class Simulation2D:
    tally: TallyResult
    free_paths: np.ndarray    # inter-scattering distances, fitting sample
    first_flights: np.ndarray  # entry flight per ray that hit (NaN = no hit)
    flux: FluxProfile


@njit(inline="always")
def _circle_hit(x, y, ddx, ddy, ux, uy, r2, t_min, t_best):
    """Nearest intersection parameter with a circle at offset (ddx, ddy)
    from the ray origin, or t_best if none improves it."""
    b = -(ddx * ux + ddy * uy)
    c0 = ddx * ddx + ddy * ddy - r2
    disc = b * b - c0
    if disc <= 0.0:
        return t_best
    t = -b - math.sqrt(disc)
    if t_min < t < t_best:
        return t
    return t_best


@njit(inline="always")
def _clip_medium(ya, yb, depth):
    """y-extent of the segment [ya, yb] clipped to the slab [0, depth]."""
    lo = min(ya, yb)
    hi = max(ya, yb)
    if lo < 0.0:
        lo = 0.0
    if hi > depth:
        hi = depth
    return hi - lo if hi > lo else 0.0


@njit(inline="always")
def _tally_flux(flux, flux_bins, db, beta, w, ya, yb, uy):
    """Add this segment's signed, attenuated crossings of bin midpoints.
    w is the weight at the segment start; attenuation accrues only over
    the in-slab part of the flight."""
    if uy > 0.0:
        j0 = int(math.floor(ya / db - 0.5)) + 1
        j1 = int(math.floor(yb / db - 0.5))
        if j0 < 0:
            j0 = 0
        if j1 > flux_bins - 1:
            j1 = flux_bins - 1
        y_in = ya if ya > 0.0 else 0.0
        for jb in range(j0, j1 + 1):
            mj = (jb + 0.5) * db
            flux[jb] += w * math.exp(-beta * (mj - y_in) / uy)
    elif uy < 0.0:
        j0 = int(math.floor(yb / db - 0.5)) + 1
        j1 = int(math.floor(ya / db - 0.5))
        if j0 < 0:
            j0 = 0
        if j1 > flux_bins - 1:
            j1 = flux_bins - 1
        y_in = ya if ya < db * flux_bins else db * flux_bins
        for jb in range(j0, j1 + 1):
            mj = (jb + 0.5) * db
            flux[jb] -= w * math.exp(-beta * (y_in - mj) / (-uy))


@njit(cache=True, nogil=True)
def _trace_batch(rng, n_rays, cxs, cys, radius, width, depth, periodic,
                 beta, sin_t, cos_t, cell, nx, ny, y_lo, starts, items,
                 emission_code, w_cutoff, max_bounces, flux_bins,
                 exit_code, final_w, first_flight):
    """Trace one shard of rays.  Returns (sum_wr, sum_wr2, sum_wt,
    n_censored, free_paths, flux, n_scatter)."""
    r2 = radius * radius
    t_min = 1e-7 * radius
    y_hi = y_lo + ny * cell
    y_start = y_lo + 1e-9 * cell
    db = depth / flux_bins
    flux = np.zeros(flux_bins)
    fp_buf = np.empty(4096, np.float64)
    n_fp = 0
    sum_wr = 0.0
    sum_wr2 = 0.0
    sum_wt = 0.0
    n_cens = 0
    n_scatter = 0

    for i in range(n_rays):
        x = rng.random() * width
        y = y_start
        ux = sin_t
        uy = cos_t
        w = 1.0
        bounces = 0
        code = EXIT_ABSORBED
        first_flight[i] = np.nan
        # distance from the launch point up to the slab face
        face_lead = (0.0 - y) / uy

        while True:
            # --- next disc hit along (ux, uy), by grid traversal ---
            if periodic:
                x -= width * math.floor(x / width)
                if x >= width:  # folding x == width lands back on the edge
                    x = 0.0
            # ix may sit outside [0, nx) for a non-periodic bed when the
            # segment starts on a disc bulging past a lateral face
            ix = int(math.floor(x / cell))
            if periodic and ix >= nx:
                ix = nx - 1
            iy = int((y - y_lo) / cell)
            if iy < 0:
                iy = 0
            if iy >= ny:
                iy = ny - 1
            if ux > 0.0:
                step_x = 1
                t_max_x = ((ix + 1) * cell - x) / ux
                t_dx = cell / ux
            elif ux < 0.0:
                step_x = -1
                t_max_x = (ix * cell - x) / ux
                t_dx = -cell / ux
            else:
                step_x = 0
                t_max_x = np.inf
                t_dx = np.inf
            if uy > 0.0:
                step_y = 1
                t_max_y = ((iy + 1) * cell + y_lo - y) / uy
                t_dy = cell / uy
            elif uy < 0.0:
                step_y = -1
                t_max_y = (iy * cell + y_lo - y) / uy
                t_dy = -cell / uy
            else:
                step_y = 0
                t_max_y = np.inf
                t_dy = np.inf

            t_best = np.inf
            j_best = -1
            boundary = 0  # 0 none, 1 bottom, 2 top, 3 side, 4 runaway
            t_enter = 0.0
            n_cells = 0
            while True:
                if t_enter > t_best:
                    break
                if 0 <= ix < nx:
                    k = iy * nx + ix
                    for p in range(starts[k], starts[k + 1]):
                        j = items[p]
                        ddx = cxs[j] - x
                        if periodic:
                            ddx -= width * np.rint(ddx / width)
                        ddy = cys[j] - y
                        t = _circle_hit(x, y, ddx, ddy, ux, uy, r2, t_min,
                                        t_best)
                        if t < t_best:
                            t_best = t
                            j_best = j
                n_cells += 1
                if n_cells > MAX_SEGMENT_CELLS:
                    boundary = 4
                    break
                if t_max_x < t_max_y:
                    t_enter = t_max_x
                    ix += step_x
                    t_max_x += t_dx
                    if periodic:
                        if ix < 0:
                            ix += nx
                        elif ix >= nx:
                            ix -= nx
                    elif ix < 0 or ix >= nx:
                        boundary = 3
                        break
                else:
                    t_enter = t_max_y
                    iy += step_y
                    t_max_y += t_dy
                    if iy < 0:
                        boundary = 1
                        break
                    if iy >= ny:
                        boundary = 2
                        break

            if j_best >= 0 and np.isfinite(t_best):
                # --- scattering event ---
                x2 = x + t_best * ux
                y2 = y + t_best * uy
                _tally_flux(flux, flux_bins, db, beta, w, y, y2, uy)
                if beta > 0.0:
                    seg_med = _clip_medium(y, y2, depth)
                    if uy != 0.0:
                        seg_med /= abs(uy)
                    elif not (0.0 <= y <= depth):
                        seg_med = 0.0
                    else:
                        seg_med = t_best
                    w *= math.exp(-beta * seg_med)
                if bounces == 0:
                    ff = t_best - face_lead
                    first_flight[i] = ff if ff > 0.0 else 0.0
                else:
                    if n_fp == fp_buf.size:
                        grown = np.empty(fp_buf.size * 2, np.float64)
                        grown[:n_fp] = fp_buf[:n_fp]
                        fp_buf = grown
                    fp_buf[n_fp] = t_best
                    n_fp += 1
                n_scatter += 1
                bounces += 1
                if w < w_cutoff:
                    code = EXIT_ABSORBED
                    break
                if bounces >= max_bounces:
                    code = EXIT_CENSORED
                    n_cens += 1
                    break
                # re-emit about the outward normal of the hit disc
                ddx = x2 - cxs[j_best]
                if periodic:
                    ddx -= width * np.rint(ddx / width)
                ddy = y2 - cys[j_best]
                inv = 1.0 / math.sqrt(ddx * ddx + ddy * ddy)
                nxv = ddx * inv
                nyv = ddy * inv
                u = rng.random()
                if emission_code == 0:
                    psi = (u - 0.5) * math.pi
                else:
                    psi = math.asin(2.0 * u - 1.0)
                cpsi = math.cos(psi)
                spsi = math.sin(psi)
                ux = nxv * cpsi - nyv * spsi
                uy = nxv * spsi + nyv * cpsi
                x = x2
                y = y2
                continue

            # --- no hit: the ray leaves the bed ---
            if boundary == 4:
                code = EXIT_CENSORED
                n_cens += 1
                break
            if uy < 0.0 and boundary != 2:
                # downward exit: finish the in-slab descent, then vacuum
                _tally_flux(flux, flux_bins, db, beta, w, y, y_lo - radius,
                            uy)
                if beta > 0.0:
                    w *= math.exp(-beta * _clip_medium(y, y_lo - radius,
                                                       depth) / (-uy))
                code = EXIT_REFLECTED
                sum_wr += w
                sum_wr2 += w * w
                break
            if uy > 0.0:
                _tally_flux(flux, flux_bins, db, beta, w, y, y_hi + radius,
                            uy)
                if beta > 0.0:
                    w *= math.exp(-beta * _clip_medium(y, y_hi + radius,
                                                       depth) / uy)
                code = EXIT_TRANSMITTED
                sum_wt += w
                break
            # horizontal flight with no disc ahead (side exit or runaway
            # guard tripping first): book the ray as censored
            code = EXIT_CENSORED
            n_cens += 1
            break

        exit_code[i] = code
        final_w[i] = w

    return sum_wr, sum_wr2, sum_wt, n_cens, fp_buf[:n_fp].copy(), flux, \
        n_scatter


def _prepare(bed: BedGeometry):
    cell, nx, ny, y_lo, starts, items = acceleration_grid(bed)
    cxs = np.ascontiguousarray(bed.centers[:, 0])
    cys = np.ascontiguousarray(bed.centers[:, 1])
    return cell, nx, ny, y_lo, starts, items, cxs, cys


_EXIT_NAMES = {EXIT_REFLECTED: "reflected_bottom",
               EXIT_TRANSMITTED: "transmitted_top",
               EXIT_ABSORBED: "absorbed",
               EXIT_CENSORED: "absorbed"}


def trace_ray(bed: BedGeometry, beta: float, theta: float, rng,
              emission: EmissionModel = EmissionModel.HEMISPHERIC,
              weight_cutoff: float = WEIGHT_CUTOFF,
              max_bounces: int = MAX_BOUNCES) -> TraceRecord:
    """Trace a single ray and keep its full free-path history."""
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if not 0.0 <= theta < math.pi / 2:
        raise ValueError("theta must be in [0, pi/2)")
    cell, nx, ny, y_lo, starts, items, cxs, cys = _prepare(bed)
    exit_code = np.empty(1, np.int8)
    final_w = np.empty(1, np.float64)
    first = np.empty(1, np.float64)
    out = _trace_batch(rng, 1, cxs, cys, bed.radius, bed.width, bed.depth,
                       bed.periodic, beta, math.sin(theta), math.cos(theta),
                       cell, nx, ny, y_lo, starts, items,
                       0 if emission is EmissionModel.HEMISPHERIC else 1,
                       weight_cutoff, max_bounces, 16,
                       exit_code, final_w, first)
    paths = [] if math.isnan(first[0]) else [float(first[0])]
    paths.extend(float(v) for v in out[4])
    return TraceRecord(free_paths=paths,
                       exit=_EXIT_NAMES[int(exit_code[0])],
                       final_weight=float(final_w[0]))


def simulate_2d(bed: BedGeometry, beta: float, theta: float, n_rays: int,
                seed: int, workers: int = 1,
                emission: EmissionModel = EmissionModel.HEMISPHERIC,
                weight_cutoff: float = WEIGHT_CUTOFF,
                max_bounces: int = MAX_BOUNCES,
                flux_bins: int = 64) -> Simulation2D:
    """Trace n_rays through the bed and aggregate exit statistics.

    Results are bit-identical for any worker count: work is split into
    fixed-size shards with per-shard seeded generators and merged in shard
    order.
    """
    if n_rays <= 0:
        raise ValueError("n_rays must be positive")
    if beta < 0.0:
        raise ValueError("beta must be >= 0")
    if not 0.0 <= theta < math.pi / 2:
        raise ValueError("theta must be in [0, pi/2)")
    if flux_bins <= 0:
        raise ValueError("flux_bins must be positive")
    cell, nx, ny, y_lo, starts, items, cxs, cys = _prepare(bed)
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    ecode = 0 if emission is EmissionModel.HEMISPHERIC else 1
    exit_code = np.empty(n_rays, np.int8)
    final_w = np.empty(n_rays, np.float64)
    first = np.empty(n_rays, np.float64)

    def run(args):
        i, m, rng = args
        lo = i * SHARD_SIZE
        return _trace_batch(rng, m, cxs, cys, bed.radius, bed.width,
                            bed.depth, bed.periodic, beta, sin_t, cos_t,
                            cell, nx, ny, y_lo, starts, items, ecode,
                            weight_cutoff, max_bounces, flux_bins,
                            exit_code[lo:lo + m], final_w[lo:lo + m],
                            first[lo:lo + m])

    plan = list(shard_plan(n_rays, seed))
    if workers > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, plan))
    else:
        parts = [run(p) for p in plan]

    sum_wr = 0.0
    sum_wr2 = 0.0
    sum_wt = 0.0
    n_cens = 0
    n_scatter = 0
    fp_parts = []
    flux = np.zeros(flux_bins)
    for wr, wr2, wt, nc, fp, fl, ns in parts:
        sum_wr += wr
        sum_wr2 += wr2
        sum_wt += wt
        n_cens += nc
        n_scatter += ns
        fp_parts.append(fp)
        flux += fl
    rho = sum_wr / n_rays
    tau = sum_wt / n_rays
    var = max(sum_wr2 / n_rays - rho * rho, 0.0)
    tally = TallyResult(n_rays=n_rays, rho=rho, tau=tau,
                        absorbed=1.0 - rho - tau,
                        rho_stderr=math.sqrt(var / n_rays),
                        censored=n_cens)
    edges = np.linspace(0.0, bed.depth, flux_bins + 1)
    return Simulation2D(tally=tally,
                        free_paths=np.concatenate(fp_parts) if fp_parts
                        else np.empty(0),
                        first_flights=first,
                        flux=FluxProfile(bin_edges=edges, flux=flux / n_rays))
