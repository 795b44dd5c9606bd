"""Pack-free 1-D Monte Carlo: the homogenized slab without explicit
geometry.

One-sided runs weight every reflected ray by the Beer factor over its
in-slab optical path, exp(-beta * (first_flight + travel - z_minus));
two-sided runs are pure counting (no dissipation).  Both shard work into
fixed-size blocks with per-shard derived seeds and merge partial sums in
shard order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .distributions import StepDistribution
from .reflectivity import MediumParams
from .seeding import shard_plan
from .walks import DEFAULT_MAX_STEPS

__all__ = ["TallyResult", "simulate_1d_one_sided", "simulate_1d_two_sided",
           "one_sided_record"]

CONSERVATION_TOL = 1e-9


@dataclass(frozen=True)
class TallyResult:
    """Monte Carlo power split for one run.

    rho + tau + absorbed = 1 within 1e-9 always; censored rays (aborted at
    the max step count) have their remaining weight folded into absorbed
    and are also counted here separately.
    """
    n_rays: int
    rho: float
    tau: float
    absorbed: float
    rho_stderr: float
    censored: int

    def __post_init__(self):
        total = self.rho + self.tau + self.absorbed
        if abs(total - 1.0) > CONSERVATION_TOL:
            raise ValueError(f"tally does not conserve power: "
                             f"rho+tau+absorbed = {total!r}")


def _run_shards(n, seed, workers, shard_fn):
    """Run shard_fn(m, rng) over the shard plan, merging results in shard
    order regardless of completion order."""
    jobs = list(shard_plan(n, seed))
    results = [None] * len(jobs)

    def run(k):
        _i, m, rng = jobs[k]
        results[k] = shard_fn(m, rng)

    if workers == 1:
        for k in range(len(jobs)):
            run(k)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(len(jobs))))
    return results


def simulate_1d_one_sided(m: MediumParams, dist: StepDistribution, n: int,
                          seed: int, workers: int = 1,
                          max_steps: int = DEFAULT_MAX_STEPS) -> TallyResult:
    """Reflectivity of a semi-infinite dissipative slab by weighted walks.

    Per ray: first flight along the ray from the step law, renewal walk in
    depth from first*cos(theta), reflected weight exp(-beta * in-slab path).
    tau is 0 (nothing comes out the far side of a half space); whatever is
    not reflected was dissipated.

    With beta = 0 every ray exits with weight exactly 1 (the walk is
    recurrent and the weight does not depend on the path), so the tally is
    returned directly without sampling.
    """
    if m.two_sided:
        raise ValueError("one-sided simulator got a two-sided medium")
    if n <= 0:
        raise ValueError("n must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if m.beta == 0.0:
        return TallyResult(n_rays=n, rho=1.0, tau=0.0, absorbed=0.0,
                           rho_stderr=0.0, censored=0)
    costheta = math.cos(m.theta)
    cum = dist._cum
    rates = dist.rates

    def shard(mm, rng):
        return _kernels.sim1d_one_sided(rng, mm, m.beta, costheta, cum, rates,
                                        max_steps, _kernels.LN_FLOOR)

    parts = _run_shards(n, seed, workers, shard)
    sw = 0.0
    sw2 = 0.0
    censored = 0
    for psw, psw2, pc in parts:
        sw += psw
        sw2 += psw2
        censored += pc
    rho = sw / n
    var = max(sw2 / n - rho * rho, 0.0)
    stderr = math.sqrt(var / n)
    return TallyResult(n_rays=n, rho=rho, tau=0.0, absorbed=1.0 - rho,
                       rho_stderr=stderr, censored=censored)


def simulate_1d_two_sided(mu: float, h: float, theta: float, n: int,
                          seed: int, workers: int = 1,
                          max_steps: int = DEFAULT_MAX_STEPS) -> TallyResult:
    """Reflectivity of a finite non-dissipative slab by exit counting.

    First flight from Exp(mu) along the ray; rays whose projected depth
    exceeds h pass straight through (transmitted), the rest run the
    two-sided walk.  rho is the bottom-exit fraction; absorbed is zero up
    to censoring.
    """
    # validates mu/h/theta ranges
    MediumParams(beta=0.0, mu=mu, theta=theta, height=h)
    if n <= 0:
        raise ValueError("n must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    costheta = math.cos(theta)

    def shard(mm, rng):
        return _kernels.sim1d_two_sided(rng, mm, mu, h, costheta, max_steps)

    parts = _run_shards(n, seed, workers, shard)
    n_bot = sum(p[0] for p in parts)
    n_top = sum(p[1] for p in parts)
    censored = sum(p[2] for p in parts)
    rho = n_bot / n
    tau = n_top / n
    stderr = math.sqrt(max(rho * (1.0 - rho), 0.0) / n)
    return TallyResult(n_rays=n, rho=rho, tau=tau, absorbed=censored / n,
                       rho_stderr=stderr, censored=censored)


def one_sided_record(m: MediumParams, dist: StepDistribution, n: int,
                     seed: int, max_steps: int = DEFAULT_MAX_STEPS):
    """Per-ray records of the one-sided run: the same draws and floor logic
    as simulate_1d_one_sided, but keeping (weight, first flight, stopping
    time, travel, overshoot, status) per ray.  Used by the validation suite
    to cross-check the tally against an outcome-level recomputation and to
    audit the stopped-walk factorization.
    """
    if n <= 0:
        raise ValueError("n must be >= 1")
    costheta = math.cos(m.theta)
    w = np.empty(n)
    first = np.empty(n)
    t = np.empty(n, np.int64)
    travel = np.empty(n)
    zm = np.empty(n)
    status = np.empty(n, np.int8)
    lo = 0
    for _i, mm, rng in shard_plan(n, seed):
        sl = slice(lo, lo + mm)
        _kernels.sim1d_one_sided_record(rng, mm, m.beta, costheta, dist._cum,
                                        dist.rates, max_steps, _kernels.LN_FLOOR,
                                        w[sl], first[sl], t[sl], travel[sl],
                                        zm[sl], status[sl])
        lo += mm
    return w, first, t, travel, zm, status
