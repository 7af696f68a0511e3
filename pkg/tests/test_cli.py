import csv
import io
import json
import math

import pytest

from minimaxq.cli import COLUMNS, main, parse_config, read_rows, verify_rows

SMALL = """
problem.name = gaussian_mean_sq
problem.Sigma = 1,2,3,4,5   # diagonal
run.n = 200
run.reps = 300
run.deltas = 0.25,0.05
run.seed = 4
"""


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "g.cfg"
    path.write_text(SMALL)
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_config():
    cfg = parse_config("a.b = 1\n# note\nc = 0.5, 2\nd = word\ne = true\n")
    assert cfg == {"a.b": 1, "c": [0.5, 2], "d": "word", "e": True}


def test_simulate_columns_and_rows(cfg, capsys):
    code, out, _ = run(["simulate", "--config", cfg], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == COLUMNS
    assert len(rows) == 3
    assert [r[3] for r in rows[1:]] == ["0.25", "0.050000000000000003"]


def test_single_rep_one_row_per_delta(cfg, capsys):
    code, out, _ = run(["simulate", "--config", cfg, "--set", "run.reps=1"], capsys)
    assert code == 0 and len(out.strip().splitlines()) == 3


def test_byte_identical_across_runs_and_threads(cfg, tmp_path, capsys):
    paths = []
    for i, threads in enumerate(("1", "4", "1")):
        p = tmp_path / f"out{i}.csv"
        assert run(["simulate", "--config", cfg, "--threads", threads, "--out", str(p)], capsys)[0] == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1] == paths[2]
    p = tmp_path / "other.csv"
    run(["simulate", "--config", cfg, "--seed", "5", "--out", str(p)], capsys)
    assert p.read_bytes() != paths[0]


def test_json_format(cfg, capsys):
    code, out, _ = run(["simulate", "--config", cfg, "--format", "json", "--set", "run.reps=5"], capsys)
    rows = json.loads(out)
    assert code == 0 and list(rows[0])[: len(COLUMNS)] == COLUMNS


def test_verify_round_trip(cfg, tmp_path, capsys):
    p = tmp_path / "r.csv"
    run(["simulate", "--config", cfg, "--out", str(p)], capsys)
    code, out, _ = run(["verify", "--results", str(p)], capsys)
    assert code == 0 and out.count("PASS") == 2
    rows = read_rows(str(p))
    assert [v.passed for v in verify_rows(rows)] == [True, True]
    code, out, _ = run(["verify", "--config", cfg], capsys)
    assert code == 0


def test_verify_negative_control(cfg, capsys):
    code, out, _ = run(["verify", "--config", cfg, "--set", "verify.lb_scale=1e6"], capsys)
    assert code == 1 and "FAIL" in out


def test_verify_zero_lb(tmp_path, capsys):
    p = tmp_path / "r.csv"
    p.write_text(",".join(COLUMNS) + "\nx,10,1,0.1,m,0,0.5,1,2,n/a,100,0\n")
    assert run(["verify", "--results", str(p)], capsys)[0] == 0


def test_bound_table(cfg, capsys):
    code, out, _ = run(["bound", "--config", cfg, "--set", "run.deltas=0.25,0.5"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    lb = 15 / (2**7 * 9 * 25 * 200) + 5 * math.log(4) / (40 * 200)
    assert float(rows[0]["lb"]) == pytest.approx(lb, rel=1e-15)
    assert rows[1]["lb"] == "n/a" and rows[1]["engine_lb"] == "n/a"


def test_bound_sco(tmp_path, capsys):
    p = tmp_path / "s.cfg"
    p.write_text("problem.name = sco_hard_instance\nrun.n = 500\nrun.deltas = 0.05\n")
    code, out, _ = run(["bound", "--config", str(p)], capsys)
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["lb"]) == pytest.approx(math.sqrt(math.log(20) / 500) / math.sqrt(30), rel=1e-15)


def test_exit_codes(cfg, tmp_path, capsys):
    assert run(["simulate", "--config", str(tmp_path / "missing.cfg")], capsys)[0] == 2
    assert run(["simulate", "--config", cfg, "--set", "problem.name=nope"], capsys)[0] == 2
    assert run(["simulate", "--config", cfg, "--set", "run.deltas=1.5"], capsys)[0] == 2
    assert run(["simulate", "--config", cfg, "--set", "estimator.kind=slope"], capsys)[0] == 2
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path / "no" / "dir.csv")], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_pack(capsys):
    code, out, _ = run(["pack", "--d", "8", "--s", "8"], capsys)
    lines = out.splitlines()
    words = [l for l in lines if not l.startswith("#")]
    assert code == 0 and len(words) >= 2 and all(len(w) == 8 for w in words)
    code, out, _ = run(["pack", "--d", "64", "--s", "4"], capsys)
    lines = out.splitlines()
    words = [l for l in lines if not l.startswith("#")]
    assert len(words) >= 64
    bound = 0.75 * 4 * math.log(64 / 16)
    line = next(l for l in lines if "log_bound (3s/4)" in l)
    assert float(line.split("=")[-1]) == pytest.approx(bound, rel=1e-15)
    assert run(["pack", "--d", "4", "--s", "5"], capsys)[0] == 2


def test_report(tmp_path, capsys):
    p = tmp_path / "r.csv"
    rows = [",".join(COLUMNS)]
    for n in (100, 400, 1600):
        rows.append(f"x,{n},1,0.05,m,{0.1 * n ** -0.5},0,{n ** -0.5},1,n/a,10,0")
    p.write_text("\n".join(rows) + "\n")
    code, out, _ = run(["report", "--results", str(p)], capsys)
    assert code == 0 and "slope=-0.5000" in out and "min emp/lb=10" in out


def test_hypothesis_selection(tmp_path, capsys):
    p = tmp_path / "d.cfg"
    p.write_text("problem.name = density_point\nrun.n = 256\nrun.reps = 3\nrun.deltas = 0.05\nrun.hypotheses = 2\n")
    code, out, _ = run(["simulate", "--config", str(p), "--format", "json"], capsys)
    assert code == 0 and [r["hypothesis"] for r in json.loads(out)] == [2]
    assert run(["simulate", "--config", str(p), "--set", "run.hypotheses=7"], capsys)[0] == 2
