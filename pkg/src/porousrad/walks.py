"""Stopped-random-walk sampling.

A walk starts at depth ``x0 >= 0``, takes i.i.d. positive step lengths with
independent up/down signs (up with probability ``p``), and stops the first
time the position leaves the allowed region: below 0 for a one-sided
barrier, below 0 or above ``h`` for a two-sided one.  The outcome records
the stopping time, total travelled length, and the overshoot past the
barrier that was crossed.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import _kernels
from .distributions import StepDistribution, sample_step
from .seeding import shard_plan

__all__ = [
    "OneSided", "TwoSided", "ExitSide", "WalkConfig", "WalkOutcome",
    "WalkBatch", "sample_walk", "sample_walk_batch", "empirical_mgf",
    "DEFAULT_MAX_STEPS",
]

DEFAULT_MAX_STEPS = 10 ** 7


@dataclass(frozen=True)
class OneSided:
    """Absorbing barrier at 0 only."""


@dataclass(frozen=True)
class TwoSided:
    """Absorbing barriers at 0 and at h."""
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("two-sided barrier height h must be > 0")


Barrier = Union[OneSided, TwoSided]


class ExitSide(enum.Enum):
    BOTTOM = "bottom"
    TOP = "top"


@dataclass(frozen=True)
class WalkConfig:
    x0: float
    p: float
    step: StepDistribution
    barrier: Barrier = OneSided()

    def __post_init__(self):
        if not self.x0 >= 0:
            raise ValueError("starting depth x0 must be >= 0")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("up-step probability p must lie in [0, 1]")
        if isinstance(self.barrier, TwoSided) and self.x0 > self.barrier.h:
            raise ValueError("two-sided walk requires 0 <= x0 <= h")


@dataclass(frozen=True)
class WalkOutcome:
    """One stopped walk.

    Exactly one of z_minus / z_plus is nonzero for an exited walk (an exact
    boundary hit counts as an exit with zero overshoot).  ``exit_side`` is
    None when the walk was censored at the max step count, in which case
    both overshoots are zero and the fields describe the walk as of the
    abort.
    """
    t: int
    travel_l: float
    z_minus: float
    z_plus: float
    exit_side: Optional[ExitSide]

    @property
    def censored(self) -> bool:
        return self.exit_side is None


def sample_walk(cfg: WalkConfig, rng: np.random.Generator,
                max_steps: int = DEFAULT_MAX_STEPS) -> WalkOutcome:
    """Run one walk to its barrier crossing (or censoring).

    Consumes draws in the same order as the batch kernels: sign, then step
    magnitude (one or two uniforms depending on the step law).
    """
    two_sided = isinstance(cfg.barrier, TwoSided)
    h = cfg.barrier.h if two_sided else math.inf
    pos = cfg.x0
    travel = 0.0
    t = 0
    while t < max_steps:
        up = rng.random() < cfg.p
        y = sample_step(cfg.step, rng)
        travel += y
        pos = pos + y if up else pos - y
        t += 1
        if pos <= 0.0:
            return WalkOutcome(t, travel, -pos, 0.0, ExitSide.BOTTOM)
        if two_sided and pos >= h:
            return WalkOutcome(t, travel, 0.0, pos - h, ExitSide.TOP)
    return WalkOutcome(t, travel, 0.0, 0.0, None)


@dataclass(frozen=True)
class WalkBatch:
    """Column-wise outcomes of a batch run (one row per walk).

    side uses the kernel codes: 0 bottom, 1 top, 2 censored.
    """
    t: np.ndarray
    travel_l: np.ndarray
    z_minus: np.ndarray
    z_plus: np.ndarray
    side: np.ndarray

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def n_censored(self) -> int:
        return int(np.sum(self.side == _kernels.SIDE_CENSORED))

    def outcomes(self) -> list[WalkOutcome]:
        sides = {_kernels.SIDE_BOTTOM: ExitSide.BOTTOM,
                 _kernels.SIDE_TOP: ExitSide.TOP,
                 _kernels.SIDE_CENSORED: None}
        return [WalkOutcome(int(self.t[i]), float(self.travel_l[i]),
                            float(self.z_minus[i]), float(self.z_plus[i]),
                            sides[int(self.side[i])])
                for i in range(self.n)]


def sample_walk_batch(cfg: WalkConfig, n: int, seed: int, workers: int = 1,
                      max_steps: int = DEFAULT_MAX_STEPS) -> WalkBatch:
    """Run n walks on fixed-size shards of a deterministic seed tree.

    The result is bit-identical for any ``workers`` value: shard i always
    simulates the same walks, and rows are laid out in shard order.
    """
    if n <= 0:
        raise ValueError("n must be >= 1")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    two_sided = isinstance(cfg.barrier, TwoSided)
    h = cfg.barrier.h if two_sided else 0.0
    t = np.empty(n, np.int64)
    travel = np.empty(n, np.float64)
    zm = np.empty(n, np.float64)
    zp = np.empty(n, np.float64)
    side = np.empty(n, np.int8)
    cum = cfg.step._cum
    rates = cfg.step.rates

    def run(args):
        lo, m, rng = args
        _kernels.walk_batch(rng, m, cfg.x0, cfg.p, cum, rates, two_sided, h,
                            max_steps, t[lo:lo + m], travel[lo:lo + m],
                            zm[lo:lo + m], zp[lo:lo + m], side[lo:lo + m])

    jobs = []
    lo = 0
    for _i, m, rng in shard_plan(n, seed):
        jobs.append((lo, m, rng))
        lo += m
    if workers == 1:
        for job in jobs:
            run(job)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, jobs))
    return WalkBatch(t, travel, zm, zp, side)


def empirical_mgf(outcomes: Union[WalkBatch, Sequence[WalkOutcome]],
                  alpha: float, zeta: float = 0.0) -> tuple[float, float]:
    """Sample mean and standard error of alpha**t * exp(-zeta * z_minus).

    Censored walks contribute alpha**t_abort * exp(0).  For alpha < 1 at the
    default abort threshold that value underflows to exactly the true
    contribution (0.0 in double precision), and at alpha = 1, zeta = 0 the
    contribution of an eventually-exiting walk is exactly 1 either way; the
    one combination that is biased by censoring is alpha = 1 with zeta > 0,
    and only by P(censor).
    """
    if isinstance(outcomes, WalkBatch):
        t = outcomes.t
        zm = outcomes.z_minus
    else:
        if len(outcomes) == 0:
            raise ValueError("need at least one walk outcome")
        t = np.array([o.t for o in outcomes], dtype=np.float64)
        zm = np.array([o.z_minus for o in outcomes], dtype=np.float64)
    if t.size == 0:
        raise ValueError("need at least one walk outcome")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    with np.errstate(under="ignore"):
        w = np.power(float(alpha), t.astype(np.float64)) * np.exp(-zeta * zm)
    est = float(np.mean(w))
    if w.size == 1:
        return est, 0.0
    stderr = float(np.std(w, ddof=1) / math.sqrt(w.size))
    return est, stderr
