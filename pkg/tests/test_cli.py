import csv

import numpy as np
import pytest

import hcgs.cli as cli
import hcgs.oracles as oracles
from hcgs.errors import SolverDivergenceError
from hcgs.solvers import TRACE_COLUMNS, read_trace_csv


def read_csv_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_selftest_passes(capsys):
    assert cli.main(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.strip().endswith("selftest passed")


def test_selftest_catches_broken_prox(monkeypatch, capsys):
    real = oracles.soft_threshold

    def flipped(X, gamma):
        # expands instead of shrinking
        return real(X, 0.0) + np.sign(X) * gamma

    monkeypatch.setattr(oracles, "soft_threshold", flipped)
    assert cli.main(["selftest"]) == 1
    out = capsys.readouterr().out
    assert "[FAIL] Moreau sandwich" in out


def test_usage_errors_exit_2(tmp_path, capsys):
    assert cli.main([]) == 2
    assert cli.main(["recover", "--solvers", "hcgs,foo", "--out", str(tmp_path)]) == 2
    assert cli.main(["recover", "--N", "abc"]) == 2
    assert cli.main(["recover", "--obs-frac", "1.5"]) == 2
    assert cli.main(["spca", "--n", "5"]) == 2
    assert cli.main(["qp", "--workers", "0"]) == 2
    assert cli.main(["recover", "--config", str(tmp_path / "missing.ini")]) == 2
    # nothing was computed or written
    assert not (tmp_path / "summary.csv").exists()


def test_unknown_config_key_exit_2(tmp_path, capsys):
    ini = tmp_path / "c.ini"
    ini.write_text("[qp]\nd = 20\nbogus = 1\n")
    assert cli.main(["qp", "--config", str(ini)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_config_file_and_flag_override(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text(f"[qp]\nd = 20\nmax-iters = 7\nout = {tmp_path / 'from_ini'}\n")
    assert cli.main(["qp", "--config", str(ini), "--max-iters", "9"]) == 0
    rows = read_csv_rows(tmp_path / "from_ini" / "summary.csv")
    assert rows[0]["d"] == "20" and rows[0]["iterations"] == "9"


def test_divergence_exit_1(tmp_path, monkeypatch, capsys):
    def boom(*a, **k):
        raise SolverDivergenceError("gfb: objective increased 10 evaluations in a row")

    monkeypatch.setattr(cli, "gfb_solve", boom)
    assert cli.main(["recover", "--N", "10", "--solvers", "gfb", "--out", str(tmp_path)]) == 1
    assert "diverged" in capsys.readouterr().err


def test_io_failure_exit_1(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["qp", "--d", "10", "--out", str(blocker / "sub")]) == 1


@pytest.fixture(scope="module")
def recover_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("rec")
    args = ["recover", "--N", "12,16", "--seeds", "1,2", "--tol", "1e-5", "--max-iters", "3000",
            "--out", str(out)]
    assert cli.main(args) == 0
    return out, args


def test_recover_outputs(recover_run):
    out, _ = recover_run
    assert (out / "manifest.txt").exists()
    for N in (12, 16):
        for solver in cli.RECOVER_SOLVERS:
            for seed in (1, 2):
                path = out / f"N{N}" / f"trace_{solver}_{seed}.csv"
                header = path.read_text().splitlines()[0].split(",")
                assert header == list(TRACE_COLUMNS)


def test_summary_means_match_traces(recover_run):
    out, _ = recover_run
    rows = read_csv_rows(out / "summary.csv")
    assert list(rows[0]) == list(cli.SUMMARY_COLUMNS)
    per_seed = [r for r in rows if r["seed"] != "mean"]
    means = [r for r in rows if r["seed"] == "mean"]
    assert len(per_seed) == 12 and len(means) == 6
    for m in means:
        finals, times = [], []
        for seed in (1, 2):
            trace = read_trace_csv(out / f"N{m['N']}" / f"trace_{m['solver']}_{seed}.csv")
            times.append(trace[-1]["elapsed_seconds"])
            finals.append(trace[-1]["objective"])
        assert float(m["time_seconds"]) == pytest.approx(np.mean(times), rel=1e-12)
        if m["solver"] != "hcgs":
            # the splitting methods trace J itself
            assert float(m["J_final"]) == pytest.approx(np.mean(finals), rel=1e-12)


def test_replay_is_deterministic(recover_run, tmp_path):
    out, args = recover_run
    args = list(args)
    args[args.index("--out") + 1] = str(tmp_path)
    assert cli.main(args) == 0
    for path in out.glob("N*/trace_*.csv"):
        a = read_csv_rows(path)
        b = read_csv_rows(tmp_path / path.parent.name / path.name)
        for rows in (a, b):
            for r in rows:
                del r["elapsed_seconds"]
        assert a == b


def test_recover_fixed_tau_hcgs_only(tmp_path):
    assert cli.main(["recover", "--N", "10", "--solvers", "hcgs", "--tau", "1.0",
                     "--max-iters", "50", "--out", str(tmp_path)]) == 0
    rows = read_csv_rows(tmp_path / "summary.csv")
    assert [r["solver"] for r in rows] == ["hcgs", "hcgs"]


def test_spca_command(tmp_path):
    assert cli.main(["spca", "--n", "20", "--max-iters", "50", "--out", str(tmp_path)]) == 0
    rows = read_csv_rows(tmp_path / "summary.csv")
    assert 0.0 <= float(rows[0]["overlap_with_planted"]) <= 1.0
    assert (tmp_path / "n20" / "trace_hcgs_1.csv").exists()


def test_qp_command_parallel_matches_serial(tmp_path):
    base = ["qp", "--d", "30,40", "--seeds", "1,2", "--max-iters", "40"]
    assert cli.main(base + ["--out", str(tmp_path / "a")]) == 0
    assert cli.main(base + ["--workers", "2", "--out", str(tmp_path / "b")]) == 0
    ra = read_csv_rows(tmp_path / "a" / "summary.csv")
    rb = read_csv_rows(tmp_path / "b" / "summary.csv")
    assert [r["objective"] for r in ra] == [r["objective"] for r in rb]
    assert all(r["nnz_bound_holds"] in ("1", "1.0") for r in ra)
    header = (tmp_path / "a" / "d30" / "trace_hcgs_1.csv").read_text().splitlines()[0]
    assert header.split(",") == list(TRACE_COLUMNS) + ["nnz"]
