import math
import statistics

import pytest

from budgetdiv.cli import main
from budgetdiv.core import parse_profile, read_profile_file
from budgetdiv.constructions import construct

FIG2_TEXT = """candidates: a b c
2: a
3: a b
voter: b c
voter: c
"""


@pytest.fixture
def fig2_path(tmp_path):
    path = tmp_path / "fig2.profile"
    path.write_text(FIG2_TEXT)
    return str(path)


def test_solve_egal_output(fig2_path, capsys):
    assert main(["solve", "egal", fig2_path]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "a=1/2 c=1/2"
    assert out[1].startswith("utilities: 1/2 1/2")


def test_solve_nash_output(fig2_path, capsys):
    assert main(["solve", "nash", fig2_path]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("a=0.666666666")
    assert "b=0.0833333" in out[0]


def test_solve_mode_flags(fig2_path, capsys):
    assert main(["solve", "egal", "--float", fig2_path]) == 0
    out = capsys.readouterr().out.splitlines()[0]
    assert out.startswith("a=0.5")
    assert main(["solve", "nash", "--exact", fig2_path]) == 1  # no exact engine


def test_solve_missing_file(capsys):
    assert main(["solve", "mp", "/nonexistent/path.profile"]) == 2


def test_solve_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.profile"
    bad.write_text("candidates: a b\nvoter:\n")
    assert main(["solve", "mp", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main(["solve"]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["solve", "plurality", "x.profile"]) == 1


def test_ir_egal_fig2(fig2_path, capsys):
    assert main(["ir", "egal", fig2_path]) == 0
    out = capsys.readouterr().out
    assert "IR = 4/3" in out
    assert "manipulable: yes" in out
    # the paper's manipulator: voter 6 deviates to {b}
    assert "voter 6: best deviation {b}" in out


def test_ir_single_voter(tmp_path, capsys):
    path = tmp_path / "one.profile"
    path.write_text("candidates: a b\nvoter: a\n")
    assert main(["ir", "nash", str(path)]) == 0
    out = capsys.readouterr().out
    assert "manipulable: no" in out


def test_axioms_nash_fig2(fig2_path, capsys):
    assert main(["axioms", "nash", fig2_path]) == 0
    out = capsys.readouterr().out
    for name in ("PS", "GFS", "AFS", "efficiency"):
        assert f"{name}: satisfied" in out


def test_axioms_mp_fig2(fig2_path, capsys):
    assert main(["axioms", "mp", fig2_path]) == 0
    out = capsys.readouterr().out
    assert "PS: satisfied" in out and "GFS: satisfied" in out


def test_construct_writes_pair(tmp_path, capsys):
    assert main(["construct", "fut-lb:6", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "manipulator: voter 1" in out
    truthful = read_profile_file(tmp_path / "fut-lb-6.truthful.profile")
    manipulated = read_profile_file(tmp_path / "fut-lb-6.manipulated.profile")
    built = construct("fut-lb:6")
    assert truthful == built.profile
    assert manipulated == built.manipulated
    assert truthful.n == 19 and truthful.m == 4


def test_construct_stdout_roundtrip(capsys):
    assert main(["construct", "fig2", "--stdout"]) == 0
    out = capsys.readouterr().out
    body = out.split("# manipulated")[0].split("# truthful")[1]
    assert parse_profile(body) == construct("fig2").profile


def test_construct_bad_parameter(capsys):
    assert main(["construct", "mp-lb:1"]) == 1


def _read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(";")
    rows = [dict(zip(header, line.split(";"))) for line in lines[1:] if not line.startswith("#")]
    return header, rows


def test_experiment_csv_schema_and_stats(tmp_path):
    out = tmp_path / "exp.csv"
    dump = tmp_path / "exp.dump"
    rc = main(["experiment", "--model", "ic", "--n-list", "4,5", "--m", "3",
               "--trials", "8", "--rules", "mp,fut", "--seed", "11",
               "--out", str(out), "--dump", str(dump)])
    assert rc == 0
    header, rows = _read_csv(out)
    assert header[:11] == [
        "n",
        "mp_avg", "mp_max", "mp_per90", "mp_std", "mp_freq",
        "fut_avg", "fut_max", "fut_per90", "fut_std", "fut_freq",
    ]
    assert header[11:] == ["mp_inf_count", "fut_inf_count"]
    assert [r["n"] for r in rows] == ["4", "5"]
    for row in rows:
        assert 1.0 <= float(row["mp_avg"]) <= float(row["mp_max"])
        assert 0.0 <= float(row["mp_freq"]) <= 1.0
        assert float(row["mp_per90"]) <= float(row["mp_max"])

    # independent recomputation of avg/std/per90 from the dump sidecar
    irs = {}
    for line in dump.read_text().strip().splitlines()[1:]:
        n, trial, rule, ir, flag = line.split(";")
        irs.setdefault((n, rule), []).append(float(ir))
    for (n, rule), values in irs.items():
        finite = [v for v in values if math.isfinite(v)]
        row = next(r for r in rows if r["n"] == n)
        assert abs(float(row[f"{rule}_avg"]) - statistics.fmean(finite)) < 1e-12
        assert abs(float(row[f"{rule}_std"]) - statistics.pstdev(finite)) < 1e-12
        rank = max(math.ceil(0.9 * len(finite)), 1)
        per90 = sorted(finite)[rank - 1]
        assert abs(float(row[f"{rule}_per90"]) - per90) < 1e-12
        assert abs(float(row[f"{rule}_max"]) - max(finite)) < 1e-12


def test_experiment_jobs_independence(tmp_path):
    args = ["experiment", "--model", "euclidean", "--n-list", "4", "--m", "3",
            "--trials", "6", "--rules", "mp,nash", "--seed", "3"]
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(args + ["--out", str(out1), "--jobs", "1"]) == 0
    assert main(args + ["--out", str(out2), "--jobs", "2"]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_experiment_rejects_zero_trials(tmp_path, capsys):
    rc = main(["experiment", "--model", "ic", "--n-list", "4", "--m", "3",
               "--trials", "0", "--rules", "mp", "--seed", "1",
               "--out", str(tmp_path / "x.csv")])
    assert rc == 1


def test_experiment_interrupt_leaves_partial_file(tmp_path, monkeypatch):
    import budgetdiv.experiment as exp

    real = exp._task_ir
    calls = {"count": 0}

    def flaky(args):
        calls["count"] += 1
        if calls["count"] > 3:  # let the first n-group finish, kill the second
            raise KeyboardInterrupt
        return real(args)

    monkeypatch.setattr(exp, "_task_ir", flaky)
    out = tmp_path / "partial.csv"
    config = exp.ExperimentConfig(model="ic", n_list=(3, 4), m=3, trials=3,
                                  rules=("mp",), seed=5, jobs=1)
    with pytest.raises(KeyboardInterrupt):
        exp.run_experiment(config, str(out))
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n;mp_avg")
    assert lines[1].startswith("3;")     # finished group is intact
    assert lines[-1].startswith("#")     # trailing comment marker
