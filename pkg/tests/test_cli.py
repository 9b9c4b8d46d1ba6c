import json
import subprocess
import sys
from fractions import Fraction as F

import numpy as np
import pytest

from qmnbinom.cli import main
from qmnbinom.distribution import pmf_table, pmf_table_infinite
from qmnbinom.qseries import DeformParams
from qmnbinom.serialize import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_pmf_exact_rows(capsys):
    code, out, _ = run(capsys, "pmf", "--q", "1/2", "--mu", "1/2", "--nu", "1/4", "--m", "1",
                       "--backend", "exact", "--format", "csv")
    assert code == 0
    header, rows = read_csv(out)
    assert header == ["j", "weight", "cumulative"]
    assert rows == [["0", "2/3", "2/3"], ["1", "1/3", "1"]]


def test_pmf_m0_table(capsys):
    code, out, _ = run(capsys, "pmf", "--m", "0")
    assert code == 0
    assert out.splitlines()[1].split() == ["0", "1", "1"]


def test_pmf_decimal_flags_are_exact(capsys):
    _, out, _ = run(capsys, "pmf", "--q", "0.5", "--mu", "0.5", "--nu", "0.25", "--m", "1", "--format", "csv")
    assert read_csv(out)[1][0][1] == "2/3"


def test_pmf_constraint_violation(capsys):
    code, out, err = run(capsys, "pmf", "--q", "1/2", "--mu", "1/4", "--nu", "1/2")
    assert code == 2 and out == ""
    assert "requires nu <= mu" in err and len(err.strip().splitlines()) == 1


@pytest.mark.parametrize("argv", [["pmf", "--m", "-1"], ["pmf", "--m", "x"], ["pmf", "--q", "abc"], ["nope"]])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_pmf_csv_round_trip_exact(tmp_path, capsys):
    path = tmp_path / "pmf.csv"
    assert run(capsys, "pmf", "--q", "9/10", "--mu", "3/4", "--nu", "1/10", "--m", "12",
               "--format", "csv", "--out", str(path))[0] == 0
    header, rows = read_csv(path.read_text(encoding="utf-8"))
    expected = pmf_table(DeformParams("9/10", "3/4", "1/10"), 12).weights
    assert [F(r[1]) for r in rows] == list(expected)
    assert F(rows[-1][2]) == 1


def test_pmf_csv_round_trip_float(tmp_path, capsys):
    path = tmp_path / "pmf.csv"
    run(capsys, "pmf", "--q", "0.3", "--mu", "0.7", "--nu", "0.2", "--m", "inf",
        "--backend", "float", "--format", "csv", "--out", str(path))
    _, rows = read_csv(path.read_text())
    expected = pmf_table_infinite(DeformParams(0.3, 0.7, 0.2)).weights
    assert tuple(float(r[1]) for r in rows) == expected


def test_pmf_json(capsys):
    _, out, _ = run(capsys, "pmf", "--m", "1", "--format", "json")
    assert json.loads(out) == [{"j": 0, "weight": "2/3", "cumulative": "2/3"},
                               {"j": 1, "weight": "1/3", "cumulative": "1"}]


def test_verify_symmetry_report_shape(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, _, _ = run(capsys, "verify", "--checks", "symmetry", "--max-n", "12",
                     "--q-values", "1/2", "--mu-values", "1/2,1/4", "--nu-values", "1/4", "--out", str(path))
    assert code == 0
    records = json.loads(path.read_text())
    assert len(records) == 2 * 13 * 13
    assert set(records[0]) == {"check_name", "params", "indices", "lhs", "rhs", "equal", "tolerance", "note"}
    assert records[0]["params"] == {"q": "1/2", "mu": "1/2", "nu": "1/4"}
    assert all(r["equal"] for r in records)


def test_verify_mc_duality_reproducible(capsys):
    argv = ["verify", "--checks", "mc-duality", "--x", "2", "--y", "3", "--samples", "100000", "--seed", "7"]
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert code == 0 and first == second
    records = json.loads(first)
    assert len(records) == 2 and all(r["equal"] for r in records)


def test_verify_single_triple_all_checks(capsys):
    code, out, _ = run(capsys, "verify", "--q", "1/4", "--mu", "3/4", "--nu", "1/2", "--max-n", "6",
                       "--max-m", "10", "--lemma-max-m", "4", "--samples", "2000", "--format", "table")
    assert code == 0
    for name in ("normalization", "symmetry", "recurrence", "routes", "lemma-recursion", "mc-duality"):
        assert name in out


def test_verify_failure_exit_1(capsys, monkeypatch):
    from qmnbinom import identities
    from qmnbinom.identities import CheckRecord, Report

    def broken(params, max_n, tolerance=None):
        return Report([CheckRecord("symmetry", params, (0, 1), 1, 2, False)])

    monkeypatch.setattr(identities, "verify_symmetry", broken)
    code, out, _ = run(capsys, "verify", "--checks", "symmetry", "--q", "1/2", "--format", "table")
    assert code == 1 and "FAIL" in out


@pytest.mark.parametrize("argv", [
    ["verify", "--checks", "bogus"],
    ["verify", "--q-values", "1/2,zz"],
    ["verify", "--q-values", "2"],
    ["verify", "--max-n", "-1"],
])
def test_verify_malformed_grid(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_verify_csv_format(capsys):
    _, out, _ = run(capsys, "verify", "--checks", "recurrence", "--q", "1/2", "--recurrence-max-n", "2",
                    "--format", "csv")
    header, rows = read_csv(out)
    assert header[0] == "check_name" and len(rows) == 9
    assert all(r[7] == "true" for r in rows)


def test_simulate_zero_steps(capsys):
    code, out, _ = run(capsys, "simulate", "tasep", "--particles", "10,7,3", "--steps", "0")
    assert code == 0
    _, rows = read_csv(out)
    assert rows == [["0", "0.0", "0.0", "0.0;0.0;1.0;1.0"]]


def test_simulate_boson_deterministic_files(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        assert run(capsys, "simulate", "boson", "--ring", "8", "--init", "2,0,1,0,0,0,0,0",
                   "--steps", "1000", "--seed", "1", "--out", str(path))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    _, rows = read_csv(a.read_text())
    assert len(rows) == 1001
    assert all(sum(float(h) * k for k, h in enumerate(r[3].split(";"))) == 3 for r in rows)


def test_simulate_tasep_leader_mean(tmp_path, capsys):
    path = tmp_path / "t.csv"
    run(capsys, "simulate", "tasep", "--particles", "0", "--steps", "100000",
        "--q", "0.5", "--mu", "0.5", "--nu", "0.25", "--seed", "3", "--out", str(path))
    _, rows = read_csv(path.read_text())
    currents = np.array([float(r[1]) for r in rows[1:]])
    se = currents.std(ddof=1) / np.sqrt(currents.size)
    assert abs(currents.mean() - pmf_table_infinite(DeformParams(0.5, 0.5, 0.25)).mean()) <= 3 * se


def test_simulate_json(capsys):
    _, out, _ = run(capsys, "simulate", "boson", "--init", "1,1", "--steps", "2", "--format", "json")
    records = json.loads(out)
    assert [r["time"] for r in records] == [0, 1, 2]
    assert set(records[0]) == {"time", "current", "mean_displacement", "occupancy_histogram"}


@pytest.mark.parametrize("argv", [
    ["simulate", "tasep", "--particles", "3,7,10"],
    ["simulate", "tasep", "--particles", "3,3"],
    ["simulate", "tasep"],
    ["simulate", "boson", "--ring", "3", "--init", "1,0"],
    ["simulate", "boson", "--init", "1,-1"],
    ["simulate", "boson", "--init", "1", "--replicas", "0"],
    ["simulate", "tasep", "--particles", "0", "--mu", "2"],
])
def test_simulate_invalid_geometry(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"q": "1/2", "mu": "1/2", "nu": "1/4", "m": "1", "format": "csv"}))
    code, out, _ = run(capsys, "pmf", "--config", str(cfg))
    assert code == 0 and read_csv(out)[1][1][1] == "1/3"
    code, out, _ = run(capsys, "pmf", "--config", str(cfg), "--m", "0")
    assert read_csv(out)[1] == [["0", "1", "1"]]
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(capsys, "pmf", "--config", str(cfg))[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qmnbinom", "pmf", "--m", "1", "--format", "csv"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "0,2/3,2/3"


def test_verify_default_grid_passes(capsys):
    code, out, _ = run(capsys, "verify", "--format", "table")
    assert code == 0
    assert "FAIL" not in out
