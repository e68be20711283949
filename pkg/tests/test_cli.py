import json
import math

import pytest

from bjortho.cli import main, parse_eps_mode, parse_space, remark_operator


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


@pytest.fixture
def mats(tmp_path):
    return {
        "T": write(tmp_path, "T.txt", "rows: 2\ncols: 2\nentries: 2 0\n 0 1\n"),
        "N": write(tmp_path, "N.txt", "rows: 2\ncols: 2\nentries: 0 1 0 0\n"),
        "I": write(tmp_path, "I.txt", "rows: 2\ncols: 2\nentries: 1 0 0 1\n"),
        "Z": write(tmp_path, "Z.txt", "rows: 2\ncols: 2\nentries: 0 0 0 0\n"),
        "bad": write(tmp_path, "bad.txt", "rows: 2\ncols: 2\nentries: 1 2 3\n"),
        "L1": write(tmp_path, "L1.txt", "rows: 2\ncols: 2\ndomain: 1\nentries: 1 0 0 1\n"),
    }


def test_check_exit_codes(capsys):
    assert main(["check", "--pred", "bj", "--space", "2:2", "--x", "1,0", "--y", "0,1"]) == 3
    assert "Marginal" in capsys.readouterr().out
    assert main(["check", "--pred", "eps-b", "--space", "2:2", "--x", "1,0", "--y", "0.5,0.8660254", "--eps", "0.5"]) == 3
    assert main(["check", "--pred", "eps-d", "--space", "2:2", "--x", "1,0", "--y", "0.5,0.8660254", "--eps", "0.6"]) == 0
    assert main(["check", "--pred", "bj", "--space", "2:2", "--x", "1,0", "--y", "1,0"]) == 1
    assert main(["check", "--pred", "plus", "--space", "1:2", "--x", "1,0", "--y", "1,1"]) == 0
    assert main(["check", "--pred", "minus", "--space", "2:2", "--x", "-1,0", "--y", "1,0"]) == 0


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "--pred", "bj", "--space", "2:2", "--x", "1", "--y", "0,1"],
        ["check", "--pred", "bj", "--space", "2", "--x", "1,0", "--y", "0,1"],
        ["check", "--pred", "bj", "--space", "2:2", "--x", "1,a", "--y", "0,1"],
        ["check", "--pred", "eps-b", "--space", "2:2", "--x", "1,0", "--y", "0,1", "--eps", "1.5"],
        ["check", "--pred", "ip-eps", "--space", "1:2", "--x", "1,0", "--y", "0,1"],
        ["check", "--pred", "nope", "--space", "2:2", "--x", "1,0", "--y", "0,1"],
        ["check", "--pred", "bj", "--space", "2:2", "--x", "inf,0", "--y", "0,1"],
    ],
)
def test_malformed_input_exits_2(argv, capsys):
    with pytest.raises(SystemExit) as e:
        raise SystemExit(main(argv))
    assert e.value.code == 2


def test_check_with_oracle_and_report(tmp_path, capsys):
    out = tmp_path / "r.json"
    argv = ["check", "--pred", "eps-d", "--space", "2:2", "--x", "1,0", "--y", "0.5,0.8660254", "--eps", "0.6",
            "--oracle", "--oracle-points", "2001", "--oracle-zoom", "3", "--out", str(out)]
    assert main(argv) == 0
    text = capsys.readouterr().out
    assert "oracle: Holds" in text
    rep = json.loads(out.read_text())
    assert rep["details"]["verdict"]["outcome"] == "Holds"
    assert rep["details"]["oracle"]["outcome"] == "Holds"


def test_op_check(mats, capsys):
    assert main(["op-check", "--pred", "bj", "--T", mats["T"], "--A", mats["N"]]) in (0, 3)
    out = capsys.readouterr().out
    assert "||T|| = 2" in out and "Subsphere(dim=1" in out
    assert main(["op-check", "--pred", "eps-b", "--T", mats["T"], "--A", mats["I"], "--eps", "0.5"]) == 1
    for pred in ("bj", "eps-d", "eps-b"):
        assert main(["op-check", "--pred", pred, "--T", mats["T"], "--A", mats["Z"], "--eps", "0.3"]) == 0
    assert main(["op-check", "--pred", "bj", "--T", mats["T"], "--A", mats["bad"]]) == 2
    assert main(["op-check", "--pred", "bj", "--T", mats["T"], "--A", mats["L1"]]) == 2
    assert main(["op-check", "--pred", "bj", "--T", mats["T"], "--A", "/nonexistent/file"]) == 2


def test_op_check_oracle(mats, capsys):
    argv = ["op-check", "--pred", "bj", "--T", mats["I"], "--A", mats["I"], "--oracle",
            "--oracle-lambda-points", "21", "--oracle-samples", "200"]
    assert main(argv) == 1
    assert "oracle: Fails" in capsys.readouterr().out


def test_curve_vectors(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["curve", "--space", "2:2", "--x", "1,0", "--y", "0,1", "--range", "-2:2", "--points", "5", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "lambda,norm"
    rows = [tuple(map(float, l.split(","))) for l in lines[1:]]
    assert [r[0] for r in rows] == [-2, -1, 0, 1, 2]
    expect = [math.sqrt(5), math.sqrt(2), 1, math.sqrt(2), math.sqrt(5)]
    assert all(abs(r[1] - e) < 1e-12 for r, e in zip(rows, expect))


def test_curve_operators(mats, capsys):
    assert main(["curve", "--T", mats["T"], "--A", mats["I"], "--range", "-3:0", "--points", "7"]) == 0
    rows = [tuple(map(float, l.split(","))) for l in capsys.readouterr().out.splitlines()[1:]]
    t, v = min(rows, key=lambda r: r[1])
    assert t == -1.5 and abs(v - 0.5) < 1e-12
    vals = [r[1] for r in rows]
    k = vals.index(min(vals))
    assert all(a >= b for a, b in zip(vals[:k], vals[1 : k + 1]))
    assert all(a <= b for a, b in zip(vals[k:], vals[k + 1 :]))


def test_curve_errors(mats):
    assert main(["curve", "--range", "1:0", "--space", "2:2", "--x", "1,0", "--y", "0,1"]) == 2
    assert main(["curve", "--T", mats["T"]]) == 2
    assert main(["curve", "--x", "1,0"]) == 2
    assert main(["curve", "--space", "2:2", "--x", "1,0", "--y", "0,1", "--points", "1"]) == 2


def test_verify_deterministic_and_exit(tmp_path):
    # the report echoes argv, so both runs write to the same path
    out = tmp_path / "r.json"
    argv = ["verify", "--theorem", "bj", "--trials", "30", "--dim", "3", "--space", "1", "--seed", "7", "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    assert main(argv) == 0
    assert out.read_bytes() == first
    rep = json.loads(first)
    t = rep["tallies"]["bj"]
    assert sum(t.values()) == rep["instances"] == 30
    assert len(rep["disagreements"]) == t["disagree"] == 0
    assert "wall_time" not in rep


def test_verify_parallel_matches_serial(tmp_path, monkeypatch):
    out = tmp_path / "r.json"
    argv = ["verify", "--theorem", "compact", "--trials", "12", "--dim", "3", "--space", "inf", "--seed", "3", "--out", str(out)]
    assert main(argv) == 0
    first = out.read_bytes()
    monkeypatch.setenv("BJORTHO_THREADS", "2")
    assert main(argv) == 0
    assert out.read_bytes() == first


def test_verify_edge_cases(tmp_path, capsys):
    assert main(["verify", "--theorem", "bj", "--trials", "0"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["instances"] == 0 and rep["tallies"]["bj"] == {"agree": 0, "disagree": 0, "skipped": 0}
    assert main(["verify", "--theorem", "hilbert", "--space", "1", "--trials", "2"]) == 2
    assert main(["verify", "--theorem", "bj", "--eps-mode", "fixed:2"]) == 2
    assert main(["verify", "--theorem", "bj", "--eps-mode", "sometimes"]) == 2
    out = tmp_path / "t.json"
    assert main(["verify", "--theorem", "hilbert", "--trials", "3", "--eps-mode", "fixed:0.4", "--timing", "--out", str(out)]) == 0
    assert "wall_time" in json.loads(out.read_text())
    assert main(["verify", "--theorem", "compact", "--trials", "3", "--space", "3", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["tallies"]["compact"]["skipped"] == 3


def test_fixture_remark(tmp_path):
    out = tmp_path / "r.json"
    assert main(["fixture-remark", "--dim", "50", "--trials", "5", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    d = rep["details"]
    assert d["norm"] == 1.0
    assert abs(d["restricted_norm"] - (0.5 - 1 / 52)) < 1e-12
    assert d["structural_condition"] is True
    assert sorted(map(tuple, d["attainment_points"])) == sorted([tuple([1.0] + [0.0] * 49), tuple([-1.0] + [0.0] * 49)])
    assert main(["fixture-remark", "--dim", "1"]) == 2


def test_remark_operator_dim2():
    T = remark_operator(2)
    assert T.entries[0, 0] == 1.0 and T.entries[1, 1] == 0.25


def test_parsers():
    assert parse_space("inf:4").p == math.inf
    assert parse_eps_mode("random") is None
    assert parse_eps_mode("fixed:0.25") == 0.25
