"""Command-line behavior: exit codes, output round trips, config layering.

Commands run in-process through main(argv) so assertions see stdout via
capsys and real return codes without subprocess overhead.
"""

import numpy as np
import pytest

from porousrad.cli import main, sweep_csv_text


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_estimate_round_trip(capsys):
    code, out, _ = run(capsys, "estimate", "--mu", "2", "--beta", "0.2")
    assert code == 0
    vals = dict(line.split(" = ") for line in out.strip().splitlines())
    # 12 significant digits survive a parse -> format cycle
    rho = float(vals["rho_hat"])
    code2, out2, _ = run(capsys, "estimate", "--mu", "2", "--beta", "0.2")
    assert f"{rho:.12g}" in out2
    assert float(vals["eta"]) == 0.1


def test_estimate_usage_errors(capsys):
    code, _, err = run(capsys, "estimate", "--mu", "1", "--beta", "0.1", "--h", "2")
    assert code == 1
    assert "mutually exclusive" in err
    code, _, err = run(capsys, "estimate", "--mu", "1")
    assert code == 1
    code, _, _ = run(capsys, "estimate", "--beta", "0.1")
    assert code == 1


def test_estimate_refusal_is_not_an_error(capsys):
    code, out, _ = run(capsys, "estimate", "--mu", "1", "--beta", "0.6")
    assert code == 0
    assert "refused" in out
    assert "rho_hat" in out


def test_unknown_command_and_flag(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "estimate", "--mu", "1", "--beta", "0.1", "--nope")[0] == 1


def test_simulate_1d_deterministic_output(capsys):
    args = ("simulate-1d", "--mu", "1", "--beta", "0.3", "--n", "20000",
            "--seed", "7")
    code, out1, _ = run(capsys, *args)
    assert code == 0
    code, out2, _ = run(capsys, *args, "--workers", "3")
    assert code == 0
    # identical tallies regardless of worker count
    assert out1 == out2.replace("workers", "workers")  # same text entirely
    assert "rho_mc" in out1


def test_simulate_1d_generates_and_prints_seed(capsys):
    code, out, _ = run(capsys, "simulate-1d", "--mu", "1", "--beta", "0.5",
                       "--n", "1000")
    assert code == 0
    seed_line = [l for l in out.splitlines() if l.startswith("seed = ")]
    assert len(seed_line) == 1
    int(seed_line[0].split(" = ")[1])  # parses as an integer


def test_sweep_csv_header_and_roundtrip(tmp_path, capsys):
    out_file = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--kind", "eta", "--start", "0.1",
                     "--stop", "0.4", "--step", "0.1", "--out", str(out_file))
    assert code == 0
    lines = out_file.read_text().strip().splitlines()
    assert lines[0] == ("case,eta,beta,mu,theta_deg,h,rho_hat,rho_upper,"
                        "rho_mc,rho_mc_stderr,n_rays,seed")
    assert len(lines) == 5
    row = lines[1].split(",")
    assert row[0] == "one-sided"
    assert row[5] == ""  # h undefined for the one-sided family
    assert row[8] == ""  # no MC columns without --mc
    # estimates in the file round-trip against the library to 12 digits
    from porousrad import MediumParams, rho_hat_exponential

    for line in lines[1:]:
        c = line.split(",")
        eta = float(c[1])
        want = rho_hat_exponential(MediumParams(beta=eta, mu=1.0, theta=0.0))
        assert c[6] == f"{want:.12g}"


def test_sweep_csv_text_is_worker_invariant():
    kw = dict(kind="hmu", start=0.5, stop=1.5, step=0.5, mu=1.0, theta=0.0,
              n=20_000, seed=99, mc=True)
    a = sweep_csv_text(workers=1, **kw)
    b = sweep_csv_text(workers=3, **kw)
    assert a == b
    assert a.count("\n") == 4  # header + 3 rows
    # two-sided rows leave eta/beta empty and fill h
    row = a.splitlines()[1].split(",")
    assert row[0] == "two-sided"
    assert row[1] == "" and row[2] == ""
    assert float(row[5]) == 0.5


def test_sweep_rejects_bad_grid():
    with pytest.raises(ValueError):
        sweep_csv_text(kind="eta", start=0.5, stop=0.1, step=0.1, mu=1.0,
                       theta=0.0, n=10, seed=1, workers=1, mc=False)
    with pytest.raises(ValueError):
        sweep_csv_text(kind="nope", start=0.1, stop=0.2, step=0.1, mu=1.0,
                       theta=0.0, n=10, seed=1, workers=1, mc=False)


def test_fit_command(tmp_path, capsys):
    xs = -np.log(1.0 - (np.arange(5000) + 0.5) / 5000) / 2.0
    f = tmp_path / "paths.txt"
    np.savetxt(f, xs, fmt="%.17g")
    code, out, _ = run(capsys, "fit", str(f))
    assert code == 0
    vals = dict(line.split(" = ") for line in out.strip().splitlines())
    assert float(vals["mu_mle"]) == pytest.approx(2.0, rel=1e-3)
    assert float(vals["ks_stat"]) < 0.01
    assert int(vals["n_samples"]) == 5000


def test_config_file_supplies_and_flags_override(tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("mu = 2.0\nbeta = 0.2  # inline comment\n\n# full comment\n")
    code, out, _ = run(capsys, "estimate", "--config", str(conf))
    assert code == 0
    assert "eta = 0.1" in out
    code, out, _ = run(capsys, "estimate", "--config", str(conf), "--beta", "0.4")
    assert code == 0
    assert "eta = 0.2" in out  # flag beat the file


def test_config_file_errors_carry_line_numbers(tmp_path, capsys):
    conf = tmp_path / "bad.conf"
    conf.write_text("mu = 2.0\nwidgets = 9\n")
    code, _, err = run(capsys, "estimate", "--config", str(conf))
    assert code == 1
    assert "bad.conf:2" in err
    conf2 = tmp_path / "bad2.conf"
    conf2.write_text("mu\n")
    code, _, err = run(capsys, "estimate", "--config", str(conf2))
    assert code == 1
    assert "bad2.conf:1" in err


def test_simulate_2d_paths_out(tmp_path, capsys):
    paths = tmp_path / "fp.txt"
    code, out, _ = run(capsys, "simulate-2d", "--n", "500", "--seed", "3",
                       "--bed-n", "300", "--bed-width", "4", "--bed-depth", "3",
                       "--paths-out", str(paths))
    assert code == 0
    xs = np.loadtxt(paths)
    assert xs.size > 100
    assert np.all(xs >= 0)
    # file feeds straight back into the fit command
    code, out, _ = run(capsys, "fit", str(paths))
    assert code == 0
    assert "mu_mle" in out
