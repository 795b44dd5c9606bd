"""Command-line front end.

Subcommands map one-to-one onto the library layers: closed-form estimates,
1-D weighted renewal simulation, 2-D disc-bed ray tracing, free-path
fitting, parameter sweeps to CSV, the chained 2-D pipeline, and the
self-validation suite.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .bed import BedSpec, build_bed, load_bed, save_bed
from .cramer_lundberg import NumericalError
from .distributions import exponential
from .fitting import FitError, fit_free_paths
from .reflectivity import (
    MediumParams,
    ValidityError,
    rho_hat_exponential,
    rho_hat_general,
    rho_two_sided,
    rho_upper_exponential,
)
from .simulate1d import simulate_1d_one_sided, simulate_1d_two_sided
from .tracer import EmissionModel, simulate_2d
from .validation import BED_DEFAULTS, DEFAULT_SEED, _sub_seed, run_all

_G = "%.12g"


def _fmt(x) -> str:
    return _G % x


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class ConfigError(Exception):
    pass


def _fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % (2**63))


def _require(args, *names) -> None:
    """Enforce flags that must be set by command line or config file."""
    missing = [n for n in names if getattr(args, n.lstrip("-").replace("-", "_")) is None]
    if missing:
        args._parser.error(f"the following arguments are required: {', '.join(missing)}")


def _resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = _fresh_seed()
    print(f"seed = {args.seed}")
    return args.seed


# ---------------------------------------------------------------------------
# config files


def _parse_config_lines(path):
    entries = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if not sep or not key or not val:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            entries.append((lineno, key, val))
    return entries


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _apply_config(args, parser: argparse.ArgumentParser, argv) -> None:
    """Fill parsed args from a config file; explicit flags always win."""
    path = args.config
    for lineno, key, val in _parse_config_lines(path):
        flag = "--" + key.replace("_", "-")
        action = parser._option_string_actions.get(flag)
        if action is None or flag == "--config":
            raise ConfigError(f"{path}:{lineno}: unknown option '{key}'")
        if any(a == flag or a.startswith(flag + "=") for a in argv):
            continue  # command line takes precedence
        if isinstance(
            action, (argparse._StoreTrueAction, argparse._StoreFalseAction)
        ):
            low = val.lower()
            if low in _TRUE:
                value = isinstance(action, argparse._StoreTrueAction)
            elif low in _FALSE:
                value = not isinstance(action, argparse._StoreTrueAction)
            else:
                raise ConfigError(
                    f"{path}:{lineno}: expected a boolean for '{key}', got '{val}'"
                )
        else:
            try:
                value = (action.type or str)(val)
            except (TypeError, ValueError):
                raise ConfigError(
                    f"{path}:{lineno}: bad value for '{key}': '{val}'"
                ) from None
            if action.choices is not None and value not in action.choices:
                raise ConfigError(
                    f"{path}:{lineno}: bad value for '{key}': '{val}'"
                )
        setattr(args, action.dest, value)


# ---------------------------------------------------------------------------
# estimate


def cmd_estimate(args) -> int:
    parser = args._parser
    _require(args, "--mu")
    if args.h is not None and args.beta is not None:
        parser.error("--beta and --h are mutually exclusive")
    if args.h is not None:
        if args.h <= 0.0:
            parser.error("--h must be positive")
        rho = rho_two_sided(args.mu, args.h, args.theta)
        print("case = two-sided")
        print(f"h_mu = {_fmt(args.h * args.mu)}")
        print(f"rho = {_fmt(rho)}")
        print(f"tau = {_fmt(1.0 - rho)}")
        return 0
    if args.beta is None:
        parser.error("one of --beta or --h is required")
    m = MediumParams(beta=args.beta, mu=args.mu, theta=args.theta)
    print(f"case = one-sided")
    print(f"eta = {_fmt(m.eta)}")
    if args.epsilon is not None:
        rho = rho_hat_general(
            exponential(args.mu), args.beta, args.theta, epsilon=args.epsilon
        )
        print(f"rho_hat = {_fmt(rho)}  (delta-corrected, epsilon = {_fmt(args.epsilon)})")
    else:
        print(f"rho_hat = {_fmt(rho_hat_exponential(m))}")
    try:
        print(f"rho_upper = {_fmt(rho_upper_exponential(m))}")
    except ValidityError as exc:
        print(f"rho_upper = refused: {exc}")
    return 0


# ---------------------------------------------------------------------------
# simulate-1d


def cmd_simulate_1d(args) -> int:
    parser = args._parser
    _require(args, "--mu")
    if args.h is not None and args.beta not in (None, 0.0):
        parser.error("two-sided slab transport is non-dissipative; drop --beta")
    if args.h is None and args.beta is None:
        parser.error("one of --beta or --h is required")
    seed = _resolve_seed(args)
    if args.h is not None:
        tally = simulate_1d_two_sided(
            args.mu, args.h, args.theta, args.n, seed, workers=args.workers
        )
        print(f"case = two-sided  h_mu = {_fmt(args.h * args.mu)}")
        print(f"rho_ref = {_fmt(rho_two_sided(args.mu, args.h, args.theta))}")
    else:
        m = MediumParams(beta=args.beta, mu=args.mu, theta=args.theta)
        tally = simulate_1d_one_sided(
            m, exponential(args.mu), args.n, seed, workers=args.workers
        )
        print(f"case = one-sided  eta = {_fmt(m.eta)}")
        print(f"rho_ref = {_fmt(rho_hat_exponential(m))}")
    print(f"n = {tally.n_rays}")
    print(f"rho_mc = {_fmt(tally.rho)} +- {_fmt(tally.rho_stderr)}")
    print(f"tau_mc = {_fmt(tally.tau)}")
    print(f"absorbed = {_fmt(tally.absorbed)}")
    print(f"censored = {tally.censored}")
    return 0


# ---------------------------------------------------------------------------
# simulate-2d


def _bed_from_args(args):
    if args.bed_in:
        return load_bed(args.bed_in)
    kw = dict(
        radius=args.bed_radius,
        width=args.bed_width,
        depth=args.bed_depth,
        periodic=not args.no_periodic,
        seed=args.bed_seed,
    )
    if args.bed_n is not None:
        spec = BedSpec(n=args.bed_n, **kw)
    else:
        spec = BedSpec(volume_fraction=args.bed_vf, **kw)
    return build_bed(spec)


def _add_bed_flags(p):
    p.add_argument("--bed-in", metavar="FILE", help="load a saved bed instead of packing one")
    p.add_argument("--bed-out", metavar="FILE", help="save the packed bed")
    p.add_argument("--bed-radius", type=float, default=BED_DEFAULTS["radius"])
    p.add_argument("--bed-vf", type=float, default=BED_DEFAULTS["volume_fraction"],
                   help="target disc area fraction")
    p.add_argument("--bed-n", type=int, default=None,
                   help="exact disc count (overrides --bed-vf)")
    p.add_argument("--bed-width", type=float, default=BED_DEFAULTS["width"])
    p.add_argument("--bed-depth", type=float, default=BED_DEFAULTS["depth"])
    p.add_argument("--bed-seed", type=int, default=BED_DEFAULTS["bed_seed"])
    p.add_argument("--no-periodic", action="store_true",
                   help="reflecting lateral faces instead of periodic wrap")
    p.add_argument("--emission", choices=["hemispheric", "lambertian"],
                   default="hemispheric")


def cmd_simulate_2d(args) -> int:
    seed = _resolve_seed(args)
    bed = _bed_from_args(args)
    if args.bed_out:
        save_bed(bed, args.bed_out)
    emission = EmissionModel[args.emission.upper()]
    sim = simulate_2d(
        bed,
        args.beta,
        args.theta,
        args.n,
        seed,
        workers=args.workers,
        emission=emission,
        flux_bins=args.flux_bins,
    )
    t = sim.tally
    print(f"discs = {bed.centers.shape[0]}")
    print(f"n = {t.n_rays}")
    print(f"rho_mcrt = {_fmt(t.rho)} +- {_fmt(t.rho_stderr)}")
    print(f"tau_mcrt = {_fmt(t.tau)}")
    print(f"absorbed = {_fmt(t.absorbed)}")
    print(f"censored = {t.censored}")
    print(f"free_paths = {sim.free_paths.size}")
    if args.paths_out:
        np.savetxt(args.paths_out, sim.free_paths, fmt="%.17g")
        print(f"wrote {sim.free_paths.size} free-path samples to {args.paths_out}")
    if args.flux_out:
        mids = 0.5 * (sim.flux.bin_edges[:-1] + sim.flux.bin_edges[1:])
        with open(args.flux_out, "w") as fh:
            fh.write("depth,flux\n")
            for d, f in zip(mids, sim.flux.flux):
                fh.write(f"{_fmt(d)},{_fmt(f)}\n")
        print(f"wrote flux profile to {args.flux_out}")
    return 0


# ---------------------------------------------------------------------------
# fit


def cmd_fit(args) -> int:
    samples = np.loadtxt(args.infile, ndmin=1)
    fit = fit_free_paths(samples, n_bins=args.bins)
    print(f"n_samples = {fit.n_samples}")
    print(f"mu_mle = {_fmt(fit.mu_mle)}")
    print(f"mu_ls = {_fmt(fit.mu_ls)}")
    print(f"ks_stat = {_fmt(fit.ks_stat)}")
    return 0


# ---------------------------------------------------------------------------
# sweep


def sweep_csv_text(kind, start, stop, step, mu, theta, n, seed, workers, mc):
    """Render a parameter sweep as CSV text.

    ``kind`` selects the swept variable: ``"eta"`` walks the one-sided
    scattering ratio, ``"hmu"`` the two-sided optical thickness. With
    ``mc`` each row also carries a simulation estimate; rows derive their
    substream from the master seed and the row index, so the text is
    byte-identical for any worker count.
    """
    if kind not in ("eta", "hmu"):
        raise ValueError(f"unknown sweep kind: {kind!r}")
    if step <= 0.0 or stop < start:
        raise ValueError("need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    values = start + step * np.arange(count)

    lines = [
        "case,eta,beta,mu,theta_deg,h,rho_hat,rho_upper,"
        "rho_mc,rho_mc_stderr,n_rays,seed"
    ]
    theta_deg = math.degrees(theta)
    for i, v in enumerate(values):
        v = float(v)
        if kind == "eta":
            beta = v * mu
            m = MediumParams(beta=beta, mu=mu, theta=theta)
            rho = rho_hat_exponential(m)
            try:
                upper = _fmt(rho_upper_exponential(m))
            except ValidityError:
                upper = ""
            row = ["one-sided", _fmt(v), _fmt(beta), _fmt(mu),
                   _fmt(theta_deg), "", _fmt(rho), upper]
            if mc:
                tally = simulate_1d_one_sided(
                    m, exponential(mu), n, _sub_seed(seed, i), workers=workers
                )
                row += [_fmt(tally.rho), _fmt(tally.rho_stderr),
                        str(tally.n_rays), str(seed)]
            else:
                row += ["", "", "", ""]
        else:
            h = v / mu
            rho = rho_two_sided(mu, h, theta)
            row = ["two-sided", "", "", _fmt(mu), _fmt(theta_deg),
                   _fmt(h), _fmt(rho), ""]
            if mc:
                tally = simulate_1d_two_sided(
                    mu, h, theta, n, _sub_seed(seed, i), workers=workers
                )
                row += [_fmt(tally.rho), _fmt(tally.rho_stderr),
                        str(tally.n_rays), str(seed)]
            else:
                row += ["", "", "", ""]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> int:
    _require(args, "--kind", "--start", "--stop", "--step")
    if args.mc:
        seed = _resolve_seed(args)
    else:
        seed = args.seed if args.seed is not None else 0
    text = sweep_csv_text(
        kind=args.kind,
        start=args.start,
        stop=args.stop,
        step=args.step,
        mu=args.mu,
        theta=args.theta,
        n=args.n,
        seed=seed,
        workers=args.workers,
        mc=args.mc,
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {text.count(chr(10)) - 1} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# pipeline-2d


def cmd_pipeline_2d(args) -> int:
    seed = _resolve_seed(args)
    stage = "build-bed"
    try:
        bed = _bed_from_args(args)
        if args.bed_out:
            save_bed(bed, args.bed_out)
        print(f"[{stage}] discs = {bed.centers.shape[0]}")

        stage = "trace"
        emission = EmissionModel[args.emission.upper()]
        sim = simulate_2d(
            bed, args.beta, args.theta, args.n, seed,
            workers=args.workers, emission=emission,
        )
        t = sim.tally
        print(f"[{stage}] rho_mcrt = {_fmt(t.rho)} +- {_fmt(t.rho_stderr)}")
        print(f"[{stage}] tau_mcrt = {_fmt(t.tau)}  censored = {t.censored}")
        print(f"[{stage}] free_paths = {sim.free_paths.size}")
        if sim.free_paths.size < 100:
            print("[fit] non-scattering medium: too few interactions to fit "
                  "a free-path law; stopping after the trace stage")
            return 0

        stage = "fit"
        fit = fit_free_paths(sim.free_paths, n_bins=args.bins)
        print(f"[{stage}] mu_mle = {_fmt(fit.mu_mle)}  mu_ls = {_fmt(fit.mu_ls)}  "
              f"ks_stat = {_fmt(fit.ks_stat)}")

        stage = "estimate"
        rho_mle = rho_hat_exponential(
            MediumParams(beta=args.beta, mu=fit.mu_mle, theta=args.theta)
        )
        rho_ls = rho_hat_exponential(
            MediumParams(beta=args.beta, mu=fit.mu_ls, theta=args.theta)
        )
        print(f"[{stage}] rho_hat(mu_mle) = {_fmt(rho_mle)}")
        print(f"[{stage}] rho_hat(mu_ls) = {_fmt(rho_ls)}")

        stage = "pack-free-mc"
        m = MediumParams(beta=args.beta, mu=fit.mu_mle, theta=args.theta)
        ref = simulate_1d_one_sided(
            m, exponential(fit.mu_mle), args.mc_n,
            _sub_seed(seed, 1), workers=args.workers,
        )
        print(f"[{stage}] rho_1d = {_fmt(ref.rho)} +- {_fmt(ref.rho_stderr)}")
    except NumericalError as exc:
        print(f"[{stage}] numerical failure: {exc}", file=sys.stderr)
        return 2
    except (FitError, ValidityError, ValueError, OSError) as exc:
        print(f"[{stage}] error: {exc}", file=sys.stderr)
        return 1

    gap_mle = rho_mle / t.rho - 1.0
    gap_1d = rho_mle / ref.rho - 1.0
    print(f"rel_gap rho_hat(mu_mle) vs rho_mcrt = {_fmt(gap_mle)}")
    print(f"rel_gap rho_hat(mu_mle) vs rho_1d   = {_fmt(gap_1d)}")
    return 0


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    report = run_all(seed=args.seed, workers=args.workers)
    print(report.text())
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(report.csv())
        print(f"wrote machine-readable report to {args.out}")
    return 0 if report.passed else 3


# ---------------------------------------------------------------------------
# parser assembly


class _Degrees:
    """argparse type: degrees on the command line, radians in args."""

    def __call__(self, text):
        return math.radians(float(text))

    def __repr__(self):  # shown in argparse error messages
        return "degrees"


def _add_common(p, *, seed=True, workers=True):
    p.add_argument("--config", metavar="FILE",
                   help="key = value file supplying defaults; flags win")
    if seed:
        p.add_argument("--seed", type=int, default=None)
    if workers:
        p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="porousrad",
                     description="Renewal-theory radiative estimates for "
                                 "porous media, with Monte Carlo checks.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)
    deg = _Degrees()

    p = sub.add_parser("estimate", help="closed-form reflectivity estimates")
    p.add_argument("--mu", type=float, default=None, help="inverse mean free path")
    p.add_argument("--beta", type=float, default=None, help="absorption coefficient")
    p.add_argument("--h", type=float, default=None, help="slab thickness (two-sided)")
    p.add_argument("--theta-deg", dest="theta", type=deg, default=0.0)
    p.add_argument("--epsilon", type=float, default=None,
                   help="perturbation scale for the non-exponential correction")
    _add_common(p, seed=False, workers=False)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate-1d", help="weighted renewal-walk transport")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--theta-deg", dest="theta", type=deg, default=0.0)
    p.add_argument("--n", type=int, default=10**6)
    _add_common(p)
    p.set_defaults(func=cmd_simulate_1d)

    p = sub.add_parser("simulate-2d", help="ray tracing over a packed disc bed")
    p.add_argument("--beta", type=float, default=BED_DEFAULTS["beta"])
    p.add_argument("--theta-deg", dest="theta", type=deg, default=0.0)
    p.add_argument("--n", type=int, default=10**4)
    p.add_argument("--flux-bins", type=int, default=64)
    p.add_argument("--paths-out", metavar="FILE",
                   help="write free-path samples, one value per line")
    p.add_argument("--flux-out", metavar="FILE", help="write the depth flux profile")
    _add_bed_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_simulate_2d)

    p = sub.add_parser("fit", help="fit an exponential free-path law to samples")
    p.add_argument("infile", help="sample file, one value per line")
    p.add_argument("--bins", type=int, default=50)
    _add_common(p, seed=False, workers=False)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="CSV sweep of estimates vs simulation")
    p.add_argument("--kind", choices=["eta", "hmu"], default=None)
    p.add_argument("--start", type=float, default=None)
    p.add_argument("--stop", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--theta-deg", dest="theta", type=deg, default=0.0)
    p.add_argument("--mc", action="store_true", help="add Monte Carlo columns")
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--out", metavar="FILE", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("pipeline-2d",
                       help="trace a bed, fit the free-path law, compare estimates")
    p.add_argument("--beta", type=float, default=BED_DEFAULTS["beta"])
    p.add_argument("--theta-deg", dest="theta", type=deg, default=0.0)
    p.add_argument("--n", type=int, default=BED_DEFAULTS["n_rays"])
    p.add_argument("--mc-n", type=int, default=10**6,
                   help="rays for the pack-free 1-D reference")
    p.add_argument("--bins", type=int, default=50)
    _add_bed_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_pipeline_2d)

    p = sub.add_parser("validate", help="run the full acceptance suite")
    p.add_argument("--out", metavar="FILE", help="also write the CSV report")
    _add_common(p, seed=False)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_validate)

    for name, sp in sub.choices.items():
        sp.set_defaults(_parser=sp)
    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            _apply_config(args, args._parser, argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"porousrad: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"porousrad: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (FitError, ValidityError, ValueError, OSError) as exc:
        print(f"porousrad: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
