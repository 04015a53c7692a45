from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from shallowsep.cli import BENCH_COLUMNS, main, parse_budgets


def gen_file(tmp_path, name, *args) -> str:
    path = tmp_path / name
    assert main(["gen", *args, "-o", str(path)]) == 0
    return str(path)


def test_gen_grid_counts(tmp_path):
    path = gen_file(tmp_path, "g.txt", "grid", "5", "5")
    lines = open(path).read().splitlines()
    assert lines[0] == "p 25 40"
    assert sum(ln.startswith("e ") for ln in lines) == 40


def test_gen_is_deterministic(tmp_path):
    a = gen_file(tmp_path, "a.txt", "gnm", "100", "300", "7")
    b = gen_file(tmp_path, "b.txt", "random-gnm", "100", "300", "7")
    assert open(a, "rb").read() == open(b, "rb").read()


def test_gen_dimacs(tmp_path):
    path = tmp_path / "k5.col"
    assert main(["gen", "complete", "5", "--format", "dimacs", "-o", str(path)]) == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "p 5 10" and lines[1] == "e 1 2"   # 1-based ids


def test_run_with_verify(tmp_path):
    g = gen_file(tmp_path, "g.txt", "grid", "30", "30")
    out = tmp_path / "out.json"
    code = main(["run", "--algo", "1", "--h", "5", "--ell", "10", "--input", g,
                 "--verify", "--output", str(out)])
    doc = json.loads(out.read_text())
    assert code == 0 and doc["type"] == "separator" and doc["verification"]["ok"]
    assert "wall_ms" not in doc["stats"]


def test_run_output_is_reproducible(tmp_path):
    g = gen_file(tmp_path, "g.txt", "gnm", "200", "400", "3")
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["run", "--algo", "1", "--h", "4", "--ell", "6", "--seed", "5",
                     "--input", g, "--output", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_run_triangle(tmp_path):
    # the first padded tree takes all of K_3, so the loop ends with V as separator
    g = gen_file(tmp_path, "k3.txt", "complete", "3")
    out = tmp_path / "out.json"
    code = main(["run", "--algo", "1", "--h", "3", "--ell", "1", "--input", g,
                 "--verify", "--output", str(out)])
    doc = json.loads(out.read_text())
    assert code == 0 and doc["verification"]["ok"]
    assert doc["type"] == "separator" and doc["vertices"] == [0, 1, 2]


def test_algo2_outside_regime(tmp_path, capsys):
    g = gen_file(tmp_path, "g.txt", "grid", "10", "10")
    code = main(["run", "--algo", "2", "--h", "5", "--ell", "11", "--input", g])
    assert code == 2 and "sqrt" in capsys.readouterr().err


def test_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 2\n0 1\n1 x\n")
    assert main(["run", "--h", "3", "--ell", "2", "--input", str(bad)]) == 3
    assert main(["run", "--h", "3", "--ell", "2", "--input", str(tmp_path / "nope")]) == 3


def test_verify_subcommand(tmp_path, capsys):
    g = gen_file(tmp_path, "g.txt", "path", "30")
    good = tmp_path / "good.json"
    assert main(["run", "--h", "4", "--ell", "3", "--input", g, "--output", str(good)]) == 0
    capsys.readouterr()
    assert main(["verify", "--input", g, "--outcome", str(good), "--h", "4"]) == 0
    assert json.loads(capsys.readouterr().out)["ok"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"type": "separator", "vertices": []}))
    assert main(["verify", "--input", g, "--outcome", str(bad), "--h", "4"]) == 1
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert main(["verify", "--input", g, "--outcome", str(broken), "--h", "4"]) == 3


def test_bench_header_only(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--output", str(out)]) == 0
    assert out.read_text().splitlines() == [",".join(BENCH_COLUMNS)]


def test_bench_rows(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--family", "grid", "complete", "--sizes", "12", "--ells", "3",
                 "--algos", "1", "2", "--h", "4", "--output", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 4
    by = {(r["family"], r["algo"]): r for r in rows}
    assert by[("grid", "1")]["outcome"] == "separator"
    # 144 vertices: ell=3 is below ln n, so Algorithm 2 reports the regime
    assert by[("grid", "2")]["outcome"] == "regime"
    assert by[("complete", "1")]["outcome"] == "separator"
    assert by[("complete", "2")]["outcome"] == "certificate"


def test_budget_overrides():
    b = parse_budgets(["b_c=7"], {"SHALLOWSEP_BUDGET_C_SP": "3", "OTHER": "1"})
    assert b.b_c == 7 and b.c_sp == 3
    b = parse_budgets(["c_sp=9"], {"SHALLOWSEP_BUDGET_C_SP": "3"})
    assert b.c_sp == 9
    with pytest.raises(ValueError):
        parse_budgets(["oops"], {})


def test_dense_rejection_exit_code(tmp_path):
    g = gen_file(tmp_path, "k.txt", "complete", "120")
    out = tmp_path / "o.json"
    code = main(["run", "--algo", "3", "--h", "3", "--ell", "6", "--input", g,
                 "--output", str(out), "--verify"])
    assert json.loads(out.read_text())["type"] == "rejected"
    assert code == 0


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "shallowsep", "gen", "path", "4"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "p 4 3"
