import json
import os
import subprocess
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from dendrodyn.cli import SCHEMAS, main

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def schema(name):
    return json.loads(resources.files("dendrodyn").joinpath("schemas", SCHEMAS[name]).read_text())


def test_star_entropy_example(capsys):
    code, out, _ = run(capsys, "star", "entropy", "--k", 2, "--n", 3)
    rep = json.loads(out)
    assert code == 0
    assert rep["count"] == 8 and rep["pairs_checked"] == 28
    assert Fraction(rep["min_separation"]) >= Fraction(1, 2)
    jsonschema.validate(rep, schema("star entropy"))


def test_star_entropy_over_budget(capsys):
    code, out, _ = run(capsys, "star", "entropy", "--k", 4, "--n", 6)
    assert code == 1
    assert json.loads(out)["ok"] is False


def test_map_check_tent(capsys):
    code, out, _ = run(capsys, "map", "check", "--map", DATA / "tent.json")
    rep = json.loads(out)
    assert code == 0 and rep["monotone"] is False
    assert rep["witness"] == {"vertex": "m"}
    code, out, _ = run(capsys, "map", "check", "--map", DATA / "tent.json", "--format", "csv")
    assert "non-monotone, witness y=m" in out
    code, _, _ = run(capsys, "map", "check", "--map", DATA / "tent.json", "--require-monotone")
    assert code == 1


def test_map_check_periodic_points(capsys):
    code, out, _ = run(capsys, "map", "check", "--map", DATA / "reflection.json", "--max-period", 2)
    rep = json.loads(out)
    assert code == 0 and rep["monotone"]
    assert sorted(p["period"] for p in rep["periodic_points"]) == [1, 2]


def test_odometer_example(capsys):
    code, out, _ = run(capsys, "odometer", "--base", "2,2,2,2", "--depth", 4)
    rep = json.loads(out)
    assert code == 0
    assert rep["cycle_length"] == 16 and rep["single_cycle"]
    assert sorted(c["depth"] for c in rep["certificates"]) == [0, 1, 2, 3, 4]
    assert all(c["ok"] for c in rep["certificates"])


def test_omega_command(capsys):
    code, out, _ = run(capsys, "omega", "--map", DATA / "reflection.json", "--point", "0:3/10")
    rep = json.loads(out)
    assert code == 0
    (s,) = rep["samples"]
    assert s["kind"] == "exact_periodic_orbit" and s["period"] == 2
    assert s["recurrence"]["kind"] == "Periodic"
    code, out, _ = run(capsys, "omega", "--map", DATA / "rotation.json", "--point", "d2")
    assert json.loads(out)["samples"][0]["period"] == 3


def test_geom(capsys):
    code, out, _ = run(capsys, "geom", "--tree", DATA / "ytree.json", "--point", "a", "--point", "b")
    rep = json.loads(out)
    assert code == 0 and rep["distances"][0][1] == "2/1"


def test_star_chaos(capsys):
    code, out, _ = run(capsys, "star", "chaos", "--alpha", "4/5", "--alpha", "3/5")
    rep = json.loads(out)
    assert code == 0 and rep["ok"]
    code, out, _ = run(capsys, "star", "chaos", "--alpha", "1/5")
    assert code == 1


@pytest.mark.parametrize("argv,name", [
    (["geom", "--tree", DATA / "ytree.json"], "geom"),
    (["map", "check", "--map", DATA / "rotation.json", "--max-period", 3], "map check"),
    (["omega", "--map", DATA / "rotation.json", "--samples", 4], "omega"),
    (["hyper", "--map", DATA / "ytree_collapse.json", "--samples", 3, "--kind", "subtree"], "hyper"),
    (["hyper", "--map", DATA / "rotation.json", "--samples", 3, "--mode", "pairs"], "hyper"),
    (["hyper", "--map", DATA / "contraction.json", "--samples", 3, "--mode", "orbit"], "hyper"),
    (["odometer", "--base", "2,3,5", "--samples", 2], "odometer"),
    (["star", "chaos", "--samples", 3], "star chaos"),
    (["star", "entropy", "--k", 3, "--n", 2], "star entropy"),
    (["entropy", "--pool", 30, "--n-max", 3, "--eps-list", "1/10,1/5"], "entropy"),
    (["entropy", "--map", DATA / "contraction.json", "--pool", 20, "--n-max", 3], "entropy"),
    (["corpus", "--maps", 2, "--vertices", 6, "--samples", 4], "corpus"),
])
def test_reports_validate_and_are_deterministic(capsys, argv, name):
    code, first, _ = run(capsys, *argv, "--seed", 3)
    code2, second, _ = run(capsys, *argv, "--seed", 3)
    assert code == code2 == 0
    assert first == second
    jsonschema.validate(json.loads(first), schema(name))


def test_csv_output(capsys):
    code, out, _ = run(capsys, "entropy", "--pool", 20, "--n-max", 2, "--format", "csv")
    assert out.splitlines()[0] == "n,eps,count,rate" and len(out.splitlines()) == 3


def test_out_file(capsys, tmp_path):
    target = tmp_path / "r.json"
    code, out, _ = run(capsys, "odometer", "--base", "2,2", "--out", target)
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["cycle_length"] == 4


def test_bad_inputs(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"vertices": ["a", "b"],\n "edges": [["a", "b", 1]')
    code, _, err = run(capsys, "geom", "--tree", bad)
    assert code == 2
    msg = json.loads(err)
    jsonschema.validate(msg, schema("error"))
    assert "line 2" in msg["detail"]
    code, _, err = run(capsys, "geom", "--tree", tmp_path / "missing.json")
    assert code == 2
    code, _, err = run(capsys, "geom", "--tree", DATA / "ytree.json", "--point", "9:1/2")
    assert code == 2
    code, _, err = run(capsys, "hyper", "--map", DATA / "tent.json")
    assert code == 2
    code, _, _ = run(capsys, "odometer", "--base", "2,1")
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["omega", "--map", str(DATA / "tent.json"), "--eps", "-1"])
    assert exc.value.code == 2


def test_parallel_workers_give_identical_output(tmp_path):
    args = [sys.executable, "-m", "dendrodyn.cli", "corpus", "--maps", "3", "--vertices", "6",
            "--samples", "4", "--seed", "9"]
    one = subprocess.run(args, capture_output=True, text=True, env={**os.environ, "DENDRODYN_THREADS": "1"})
    many = subprocess.run(args, capture_output=True, text=True, env={**os.environ, "DENDRODYN_THREADS": "3"})
    assert one.returncode == many.returncode == 0
    assert one.stdout == many.stdout
