"""End-to-end validation suite.

Each criterion function runs one family of checks (closed forms vs Monte
Carlo, distribution laws, determinism) at its stated sample sizes and
returns a CriterionResult; run_all collects them into a report with a
plain-text and a CSV rendering.  The CLI's `validate` subcommand is a thin
wrapper around run_all.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy.integrate import quad

from ._kernels import SIDE_BOTTOM, SIDE_TOP
from .bed import BedSpec, build_bed
from .cramer_lundberg import mgf_one_sided, two_sided_exit_probability
from .distributions import StepDistribution, exponential, hyperexponential
from .fitting import fit_free_paths
from .reflectivity import (MediumParams, ValidityError, rho_hat_exponential,
                           rho_two_sided, rho_two_sided_from_overshoots,
                           rho_upper_exponential)
from .simulate1d import simulate_1d_one_sided, simulate_1d_two_sided
from .tracer import simulate_2d
from .walks import OneSided, TwoSided, WalkConfig, empirical_mgf, \
    sample_walk_batch

__all__ = ["Check", "CriterionResult", "ValidationReport", "run_all",
           "DEFAULT_SEED", "CRITERIA", "BED_DEFAULTS"]

DEFAULT_SEED = 20260819

# 2-D pipeline defaults (criterion 7 runs exactly this configuration).
# beta is deliberately weak-dissipation: the closed-form estimate is only
# asymptotically tight, see the criterion-2 error curve in the report.
BED_DEFAULTS = dict(radius=0.05, width=6.0, depth=8.0, volume_fraction=0.2,
                    bed_seed=42, beta=0.002, theta=0.0, n_rays=100_000)


def _sub_seed(seed: int, *key: int) -> int:
    """Stable per-point master seed derived from the suite seed."""
    ss = np.random.SeedSequence(seed, spawn_key=key)
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class Check:
    label: str
    value: float
    limit: float
    passed: bool


@dataclass
class CriterionResult:
    index: int
    title: str
    checks: List[Check]
    notes: List[str] = field(default_factory=list)
    info: List[tuple] = field(default_factory=list)  # (label, value) rows

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def summary(self) -> str:
        ok = sum(1 for c in self.checks if c.passed)
        return (f"criterion {self.index}: "
                f"{'PASS' if self.passed else 'FAIL'}  {self.title} "
                f"[{ok}/{len(self.checks)} checks]")


@dataclass
class ValidationReport:
    seed: int
    results: List[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def text(self) -> str:
        lines = [f"acceptance validation (seed {self.seed})", ""]
        for r in self.results:
            lines.append(r.summary())
            for c in r.checks:
                mark = "ok  " if c.passed else "FAIL"
                lines.append(f"  {mark} {c.label}: value={c.value:.6g} "
                             f"limit={c.limit:.6g}")
            for label, value in r.info:
                lines.append(f"  info {label}: {value:.6g}"
                             if isinstance(value, float)
                             else f"  info {label}: {value}")
            for note in r.notes:
                lines.append(f"  note {note}")
            lines.append("")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        failed = [str(r.index) for r in self.results if not r.passed]
        if failed:
            lines[-1] += " (criteria " + ", ".join(failed) + ")"
        return "\n".join(lines) + "\n"

    def csv(self) -> str:
        rows = ["criterion,label,value,limit,passed"]
        for r in self.results:
            for c in r.checks:
                rows.append(f"{r.index},\"{c.label}\",{c.value:.12g},"
                            f"{c.limit:.12g},{str(c.passed).lower()}")
            for label, value in r.info:
                val = f"{value:.12g}" if isinstance(value, float) else value
                rows.append(f"{r.index},\"{label}\",{val},,")
        return "\n".join(rows) + "\n"


def criterion_two_sided_exact(seed: int = DEFAULT_SEED, workers: int = 1,
                              n: int = 10**6) -> CriterionResult:
    """Finite-slab MC reflectivity against the closed form, over an
    (h*mu, theta) grid."""
    checks = []
    censored = 0
    for i, hmu in enumerate((0.5, 1.0, 2.0, 5.0, 10.0)):
        for j, deg in enumerate((0, 30, 60)):
            theta = math.radians(deg)
            res = simulate_1d_two_sided(mu=1.0, h=hmu, theta=theta, n=n,
                                        seed=_sub_seed(seed, 1, i, j),
                                        workers=workers)
            exact = rho_two_sided(1.0, hmu, theta)
            err = abs(res.rho - exact)
            tol = max(3.0 * res.rho_stderr, 0.003)
            checks.append(Check(f"h*mu={hmu:g} theta={deg}deg |err|",
                                err, tol, err < tol))
            censored += res.censored
    return CriterionResult(1, "two-sided slab MC matches the closed form",
                           checks, info=[("censored walks", censored)])


def criterion_estimate_quality(seed: int = DEFAULT_SEED, workers: int = 1,
                               n: int = 10**7, n_curve: int = 10**6,
                               n_audit: int = 10**7) -> CriterionResult:
    """One-sided estimate vs weighted pack-free MC at the 1% gate, plus the
    full relative-error curve and the stopped-walk factorization audit."""
    checks = []
    info = []
    for i, eta in enumerate((0.05, 0.1, 0.2, 0.5, 1.0)):
        m = MediumParams(beta=eta, mu=1.0, theta=0.0)
        res = simulate_1d_one_sided(m, exponential(1.0), n=n,
                                    seed=_sub_seed(seed, 2, i),
                                    workers=workers)
        rel = abs(res.rho - rho_hat_exponential(m)) / res.rho
        checks.append(Check(f"eta={eta:g} |rho_mc-rho_hat|/rho_mc",
                            rel, 0.01, rel < 0.01))
    for k, eta in enumerate(np.arange(0.01, 2.0, 0.05)):
        m = MediumParams(beta=float(eta), mu=1.0, theta=0.0)
        res = simulate_1d_one_sided(m, exponential(1.0), n=n_curve,
                                    seed=_sub_seed(seed, 2, 100 + k),
                                    workers=workers)
        rel = (rho_hat_exponential(m) - res.rho) / res.rho
        info.append((f"error curve eta={eta:.2f} rel_err", rel))
    # stopped-walk factorization audit: E[exp(-2*beta*sum|Y|)] vs
    # E[alpha**T] over the same symmetric walks from x0 = 1/mu
    batch = sample_walk_batch(
        WalkConfig(x0=1.0, p=0.5, step=exponential(1.0), barrier=OneSided()),
        n=n_audit, seed=_sub_seed(seed, 2, 999), workers=workers,
        max_steps=10**4)
    travel = batch.travel_l
    t = batch.t
    for eta in (0.1, 0.5, 1.0):
        beta = eta
        alpha = 1.0 / (1.0 + 2.0 * beta)
        lhs = float(np.mean(np.exp(-2.0 * beta * travel)))
        with np.errstate(under="ignore"):
            rhs = float(np.mean(np.power(alpha, t.astype(np.float64))))
        info.append((f"factorization audit eta={eta:g} "
                     f"E[e^-2bL]={lhs:.6g} E[a^T]={rhs:.6g} rel gap",
                     (rhs - lhs) / lhs))
    info.append(("audit censored walks", int(np.sum(batch.side != 0))))
    return CriterionResult(
        2, "one-sided estimate within 1% of pack-free MC", checks,
        notes=["the closed-form estimate carries an O(sqrt(eta)) deficit "
               "against the exact weighted model; see the error curve"],
        info=info)


def criterion_upper_bound(seed: int = DEFAULT_SEED, workers: int = 1,
                          n: int = 10**6) -> CriterionResult:
    """Upper-bound dominance below eta = 0.5 and refusal at and above."""
    checks = []
    for i, eta in enumerate((0.05, 0.1, 0.2, 0.3, 0.4, 0.45)):
        m = MediumParams(beta=eta, mu=1.0, theta=0.0)
        upper = rho_upper_exponential(m)
        res = simulate_1d_one_sided(m, exponential(1.0), n=n,
                                    seed=_sub_seed(seed, 3, i),
                                    workers=workers)
        slack_mc = upper + 3.0 * res.rho_stderr - res.rho
        checks.append(Check(f"eta={eta:g} rho_mc <= rho_upper+3se (slack)",
                            slack_mc, 0.0, slack_mc >= 0.0))
        slack_hat = upper - rho_hat_exponential(m)
        checks.append(Check(f"eta={eta:g} rho_hat <= rho_upper (slack)",
                            slack_hat, 0.0, slack_hat >= 0.0))
    for eta in (0.5, 0.75):
        m = MediumParams(beta=eta, mu=1.0, theta=0.0)
        try:
            rho_upper_exponential(m)
            refused = False
        except ValidityError:
            refused = True
        checks.append(Check(f"eta={eta:g} upper bound refused",
                            1.0 if refused else 0.0, 1.0, refused))
    return CriterionResult(3, "upper bound dominates and refuses past "
                              "eta=0.5", checks)


def criterion_mgf(seed: int = DEFAULT_SEED, workers: int = 1,
                  n: int = 10**6) -> CriterionResult:
    """Analytic exit-transform values against empirical walk averages."""
    checks = []
    info = []
    cases = [("exp", exponential(1.0)),
             ("hyper", hyperexponential([0.4, 0.6], [1.0, 3.0]))]
    for d, (name, dist) in enumerate(cases):
        for i, x in enumerate((0.0, 0.5, 1.0, 2.0)):
            batch = sample_walk_batch(
                WalkConfig(x0=x, p=0.5, step=dist, barrier=OneSided()),
                n=n, seed=_sub_seed(seed, 4, d, i), workers=workers,
                max_steps=10**5)
            info.append((f"{name} x={x:g} censored walks",
                         int(np.sum(batch.side != 0))))
            for alpha in (0.3, 0.6, 0.9):
                for zeta in (0.0, 1.0):
                    est, se = empirical_mgf(batch, alpha, zeta)
                    exact = mgf_one_sided(dist, x, alpha, zeta)
                    err = abs(est - exact)
                    checks.append(Check(
                        f"{name} x={x:g} a={alpha:g} z={zeta:g} |err|",
                        err, 3.0 * se, err < 3.0 * se))
    return CriterionResult(4, "exit transform matches simulation", checks,
                           info=info)


def criterion_two_sided_overshoots(seed: int = DEFAULT_SEED,
                                   workers: int = 1,
                                   n: int = 10**6) -> CriterionResult:
    """Two-sided overshoot means and exit-side probability."""
    checks = []
    dist = exponential(1.0)
    for i, (x0, h) in enumerate(((0.5, 2.0), (1.0, 2.0), (2.5, 5.0),
                                 (5.0, 10.0))):
        batch = sample_walk_batch(
            WalkConfig(x0=x0, p=0.5, step=dist, barrier=TwoSided(h)),
            n=n, seed=_sub_seed(seed, 5, i), workers=workers,
            max_steps=10**5)
        bot = batch.side == SIDE_BOTTOM
        top = batch.side == SIDE_TOP
        zb = batch.z_minus[bot]
        zt = batch.z_plus[top]
        for tag, z in (("Z-", zb), ("Z+", zt)):
            dev = abs(float(z.mean()) - 1.0)
            tol = 3.0 * float(z.std()) / math.sqrt(z.size)
            checks.append(Check(f"x0={x0:g} h={h:g} E[{tag}] dev",
                                dev, tol, dev < tol))
        p_hat = bot.sum() / batch.n
        p_exact = two_sided_exit_probability(dist, x0, h)
        dev = abs(p_hat - p_exact)
        tol = 3.0 * math.sqrt(p_exact * (1.0 - p_exact) / batch.n)
        checks.append(Check(f"x0={x0:g} h={h:g} P(bottom) dev",
                            dev, tol, dev < tol))
    return CriterionResult(5, "two-sided overshoot means and exit "
                              "probabilities", checks)


def criterion_overshoot_law(seed: int = DEFAULT_SEED, workers: int = 1,
                            n: int = 10**6) -> CriterionResult:
    """One-sided overshoot distribution: exponential mean and variance.

    The symmetric walk is null-recurrent, so the run caps the step count
    and excludes capped walks; for memoryless steps the exit overshoot is
    independent of that event, so the exclusion is unbiased.
    """
    mu = 1.0
    batch = sample_walk_batch(
        WalkConfig(x0=1.0, p=0.5, step=exponential(mu), barrier=OneSided()),
        n=n, seed=_sub_seed(seed, 6, 0), workers=workers, max_steps=10**5)
    done = batch.side == SIDE_BOTTOM
    z = batch.z_minus[done]
    m = z.size
    mean_dev = abs(float(z.mean()) - 1.0 / mu)
    mean_tol = 3.0 / (mu * math.sqrt(m))
    var_dev = abs(float(z.var()) - 1.0 / mu**2)
    var_tol = 3.0 * math.sqrt(8.0) / (mu**2 * math.sqrt(m))
    checks = [Check("overshoot mean dev", mean_dev, mean_tol,
                    mean_dev < mean_tol),
              Check("overshoot variance dev", var_dev, var_tol,
                    var_dev < var_tol)]
    return CriterionResult(
        6, "one-sided overshoot is Exp(mu)", checks,
        info=[("censored walks (excluded)", int(batch.n - m))])


def criterion_pipeline_2d(seed: Optional[int] = None, workers: int = 1,
                          n_rays: Optional[int] = None) -> CriterionResult:
    """Full 2-D pipeline at the declared defaults: trace, fit, estimate."""
    cfg = BED_DEFAULTS
    bed = build_bed(BedSpec(radius=cfg["radius"], width=cfg["width"],
                            depth=cfg["depth"], seed=cfg["bed_seed"],
                            volume_fraction=cfg["volume_fraction"]))
    sim = simulate_2d(bed, beta=cfg["beta"], theta=cfg["theta"],
                      n_rays=n_rays or cfg["n_rays"],
                      seed=DEFAULT_SEED if seed is None else seed,
                      workers=workers)
    fit = fit_free_paths(sim.free_paths)
    rho_mc = sim.tally.rho
    est_mle = rho_hat_exponential(MediumParams(beta=cfg["beta"],
                                               mu=fit.mu_mle, theta=0.0))
    est_ls = rho_hat_exponential(MediumParams(beta=cfg["beta"],
                                              mu=fit.mu_ls, theta=0.0))
    gap = abs(est_mle - rho_mc) / rho_mc
    checks = [Check("free-path KS stat vs Exp(mu_mle)", fit.ks_stat, 0.05,
                    fit.ks_stat < 0.05),
              Check("|rho_hat(mu_mle)-rho_mcrt|/rho_mcrt", gap, 0.05,
                    gap < 0.05)]
    info = [("discs in bed", bed.n),
            ("mu_mle", fit.mu_mle), ("mu_ls", fit.mu_ls),
            ("free-path samples", fit.n_samples),
            ("rho_mcrt", rho_mc), ("rho_mcrt stderr", sim.tally.rho_stderr),
            ("tau_mcrt", sim.tally.tau),
            ("rho_hat(mu_mle)", est_mle), ("rho_hat(mu_ls)", est_ls),
            ("censored rays", sim.tally.censored)]
    return CriterionResult(7, "2-D bed pipeline closes within 5%", checks,
                           info=info)


def criterion_determinism(seed: int = DEFAULT_SEED,
                          workers: int = 1) -> CriterionResult:
    """Power conservation of every tally kind and worker-count-independent
    CSV bytes."""
    checks = []
    m = MediumParams(beta=0.3, mu=1.0, theta=0.0)
    tallies = [
        ("one-sided", simulate_1d_one_sided(m, exponential(1.0), n=10**5,
                                            seed=_sub_seed(seed, 8, 0))),
        ("two-sided", simulate_1d_two_sided(1.0, 2.0, 0.0, n=10**5,
                                            seed=_sub_seed(seed, 8, 1))),
    ]
    bed = build_bed(BedSpec(radius=0.05, width=6.0, depth=4.0, seed=11,
                            volume_fraction=0.15))
    tallies.append(("2-D", simulate_2d(bed, beta=0.5, theta=0.0,
                                       n_rays=20_000,
                                       seed=_sub_seed(seed, 8, 2)).tally))
    for name, t in tallies:
        gap = abs(t.rho + t.tau + t.absorbed - 1.0)
        checks.append(Check(f"{name} conservation |rho+tau+abs-1|",
                            gap, 1e-9, gap <= 1e-9))
    # identical seeds and configs must give byte-identical sweep CSV for
    # any worker count
    from .cli import sweep_csv_text
    one = sweep_csv_text(kind="eta", start=0.1, stop=0.31, step=0.1,
                         mu=1.0, theta=0.0, n=10**5,
                         seed=_sub_seed(seed, 8, 3), workers=1, mc=True)
    three = sweep_csv_text(kind="eta", start=0.1, stop=0.31, step=0.1,
                           mu=1.0, theta=0.0, n=10**5,
                           seed=_sub_seed(seed, 8, 3), workers=3, mc=True)
    same = one == three
    checks.append(Check("sweep CSV bytes, workers 1 vs 3",
                        1.0 if same else 0.0, 1.0, same))
    return CriterionResult(8, "conservation and seeded determinism", checks)


def criterion_quadrature(seed: int = DEFAULT_SEED,
                         n_pairs: int = 10) -> CriterionResult:
    """Depth-law quadrature of the per-depth exit probability reproduces
    the closed-form slab reflectivity."""
    rng = np.random.default_rng(seed)
    mu = 1.0
    checks = []
    for _ in range(n_pairs):
        h = float(rng.uniform(0.3, 12.0))
        theta = float(rng.uniform(0.0, math.radians(75.0)))
        c = math.cos(theta)

        def integrand(x):
            # pre-project the depth so endpoint rounding cannot push the
            # projected depth past h
            xt = min(x * c, h)
            return rho_two_sided_from_overshoots(
                xt, h, 1.0 / mu, 1.0 / mu, 0.0) * mu * math.exp(-mu * x)

        val, _err = quad(integrand, 0.0, h / c, epsabs=1e-13, epsrel=1e-12,
                         limit=200)
        exact = rho_two_sided(mu, h, theta)
        diff = abs(val - exact)
        checks.append(Check(f"h={h:.3f} theta={math.degrees(theta):.1f}deg "
                            f"|quad-closed|", diff, 1e-10, diff < 1e-10))
    return CriterionResult(9, "depth quadrature reproduces the slab "
                              "closed form", checks)


CRITERIA = [criterion_two_sided_exact, criterion_estimate_quality,
            criterion_upper_bound, criterion_mgf,
            criterion_two_sided_overshoots, criterion_overshoot_law,
            criterion_pipeline_2d, criterion_determinism,
            criterion_quadrature]


def run_all(seed: int = DEFAULT_SEED, workers: int = 1) -> ValidationReport:
    """Run the full suite at the stated sample sizes (takes a few
    minutes)."""
    results = []
    for fn in CRITERIA:
        if fn is criterion_quadrature:
            results.append(fn(seed=seed))
        else:
            results.append(fn(seed=seed, workers=workers))
    return ValidationReport(seed=seed, results=results)
