import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from dyadbmo.circle import Arc
from dyadbmo.cli import main
from dyadbmo.harness import ExperimentConfig, run_experiment, scan_d_delta, to_csv
from dyadbmo.stepfn import StepFn


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_scan_csv(capsys):
    code, out, _ = run(["scan", "--max-q", "3", "--format", "csv"], capsys)
    assert code == 0
    assert out == "delta,d_delta\n1/2,0\n1/3,1/3\n2/3,1/3\n"
    code, out, _ = run(["scan", "--max-q", "12", "--format", "csv"], capsys)
    rows = dict(line.split(",") for line in out.splitlines()[1:])
    assert rows["1/5"] == rows["2/5"] == rows["3/5"] == rows["4/5"] == "1/5"
    assert rows["5/12"] == "1/6"


def test_scan_summary():
    rows = scan_d_delta(12)
    assert len(rows) == 45
    rep = run_experiment(ExperimentConfig("scan", max_q=12))
    assert rep.summary["dense_at_width_2_over_q"] is True
    with pytest.raises(ValueError):
        scan_d_delta(1)


def test_fit_inadmissible(capsys):
    code, _, err = run(["fit", "--delta", "1/2"], capsys)
    assert code == 2 and "inadmissible shift: d(δ)=0" in err


def test_fit_arcs(capsys):
    code, out, _ = run(["fit", "--delta", "1/3", "--arc", "3/10:1/10", "--arc", "19/20:1/10"], capsys)
    rep = json.loads(out)
    assert code == 0 and [r["ratio"] for r in rep["results"]] == ["5", "5"]
    assert [r["filtration"] for r in rep["results"]] == ["base", "shifted"]


def test_verify_demo(capsys):
    code, out, _ = run(["verify", "--delta", "1/3", "--depth", "6"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["summary"]["bound_constant"] == "12"
    assert all(r["bound_constant"] == "12" for r in rep["results"])


def test_function_file_and_out(tmp_path, capsys):
    f = StepFn.indicator(Arc(F(0), F(1, 2)))
    path = tmp_path / "half.json"
    path.write_text(json.dumps(f.to_json()))
    out = tmp_path / "rep.json"
    code, _, _ = run(["verify", "--depth", "8", "--function", str(path), "--out", str(out)], capsys)
    rep = json.loads(out.read_text())
    assert code == 0 and rep["results"][0]["margin"]["exact"] == "11/2"


def test_other_commands(capsys):
    for argv in (["d-delta", "--delta", "1/3", "--delta", "3/8"], ["norms", "--depth", "4"],
                 ["maximal", "--depth", "4"], ["atoms", "--count", "30"], ["verify-md", "--depth", "1"]):
        code, out, _ = run(argv, capsys)
        assert code == 0, argv
        assert json.loads(out)["ok"]
    code, out, _ = run(["d-delta", "--delta", "1/3", "--delta", "3/8", "--format", "csv"], capsys)
    assert out == "delta,d_delta\n1/3,1/3\n3/8,0\n"


def test_csv_only_for_tables(capsys):
    code, _, err = run(["fit", "--delta", "1/3", "--count", "3", "--format", "csv"], capsys)
    assert code == 2 and "csv" in err


def test_verify_r_violation_exit(tmp_path, capsys):
    code, out, err = run(["verify-r", "--arc", "21:22"], capsys)
    rep = json.loads(out)
    assert code == 1 and not rep["ok"]
    assert rep["violations"][0]["ratio"] == "128"
    assert rep["violations"][0]["replay"].endswith("--arc 21:22")
    assert "violation" in err


def test_witness_dump_and_replay(tmp_path, capsys, monkeypatch):
    # force a violation by corrupting the margin of every report
    import dyadbmo.harness as h

    real = h.verify_equivalence

    def broken(fn, shift, depth, grid):
        rep = real(fn, shift, depth, grid)
        rep.margin = F(-1)
        return rep

    monkeypatch.setattr(h, "verify_equivalence", broken)
    cfg = ExperimentConfig("verify", depth=3, witness_dir=str(tmp_path))
    rep = run_experiment(cfg)
    assert not rep.ok
    v = rep.violations[0]
    assert StepFn.from_json(json.loads(open(v["file"]).read()))
    assert v["replay"].startswith("python3 -m dyadbmo verify --delta 1/3 --depth 3 --function ")


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "atoms", "count": 20, "seed": 5}))
    code, out, _ = run(["run", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["config"]["seed"] == 5
    cfg.write_text(json.dumps({"command": "atoms", "bogus": 1}))
    code, _, err = run(["run", "--config", str(cfg)], capsys)
    assert code == 2 and "bogus" in err


def test_config_hash_ignores_scheduling():
    a = ExperimentConfig("verify", workers=1)
    b = ExperimentConfig("verify", workers=4)
    assert a.hash == b.hash and a.hash != ExperimentConfig("verify", seed=1).hash


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "dyadbmo", "scan", "--max-q", "3", "--format", "csv"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("delta,d_delta\n1/2,0")
