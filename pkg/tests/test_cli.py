from __future__ import annotations

import hashlib
import json
import os

import pytest

from paredlab import cli
from paredlab import degeneration as dg
from paredlab import planegraph as pg
from paredlab import ribbontree as rt


def run(args, out=None):
    argv = (["--out-dir", str(out)] if out else []) + args
    return cli.main(argv)


def snapshot(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir()) if p.is_file()}


def write_graph(tmp_path, G, name):
    p = tmp_path / name
    p.write_text(json.dumps(G.to_json()))
    return str(p)


def test_atlas_outputs(tmp_path, capsys):
    assert run(["atlas", "--n", "4"], tmp_path / "a") == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert [f for f in files if f.startswith("graph_")] == ["graph_0.json", "graph_1.json", "graph_2.json"]
    assert "poset.dot" in files and "manifest.json" in files
    man = json.loads((tmp_path / "a" / "manifest.json").read_text())
    for name, digest in man["artifacts"].items():
        assert hashlib.sha256((tmp_path / "a" / name).read_bytes()).hexdigest() == digest
    assert man["seed"] == 0 and man["config"]["n"] == 4


def test_reruns_are_byte_identical(tmp_path):
    out = tmp_path / "a"
    assert run(["atlas", "--n", "5"], out) == 0
    first = snapshot(out)
    assert run(["atlas", "--n", "5"], out) == 0
    assert snapshot(out) == first


def test_verdict(tmp_path, capsys):
    g = write_graph(tmp_path, pg.k4(), "K4.json")
    assert run(["verdict", "--graph", g], tmp_path / "v") == 0
    assert capsys.readouterr().out.strip() == "Bounded"
    g = write_graph(tmp_path, pg.cycle_graph(4), "C4.json")
    assert run(["verdict", "--graph", g], tmp_path / "w") == 0
    assert "Unbounded" in capsys.readouterr().out
    rec = json.loads((tmp_path / "w" / "verdict.json").read_text())
    assert rec["witness_admissible"] is False


def test_bifurcates_and_enrich(tmp_path, capsys):
    a = write_graph(tmp_path, pg.cycle_graph(4), "C4.json")
    b = write_graph(tmp_path, pg.k4(), "K4.json")
    assert run(["bifurcates", "--graph", a, "--target", b], tmp_path / "b") == 0
    out = capsys.readouterr().out
    assert "bifurcates: true" in out and "double cosets: 1" in out
    assert run(["enrich", "--graph", a], tmp_path / "e") == 0
    assert run(["admissible", "--graph", b], tmp_path / "f") == 0
    assert "non-admissible: 0" in capsys.readouterr().out.splitlines()[-1]


def test_admissible_fixture(tmp_path, capsys):
    assert run(["admissible", "--fixture", "nsg"], tmp_path / "x") == 0
    assert "bigon" in capsys.readouterr().out


def test_lamination_svg(tmp_path, capsys):
    svg = tmp_path / "out.svg"
    assert run(["lamination", "--d", "3", "--gens", "1/8:5/8", "--depth", "4", "--svg", str(svg)],
               tmp_path / "l") == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1:4] == ["  1/8:5/8", "  7/24:11/24", "  19/24:23/24"]
    n = int(lines[0].split()[-1])
    assert svg.read_text().count("<path") == n == len(lines) - 1


def test_blaschke_commands(tmp_path, capsys):
    assert run(["blaschke", "analyze", "--zeros", "0.5"], tmp_path / "b") == 0
    rec = json.loads((tmp_path / "b" / "analysis.json").read_text())
    assert len(rec["fixed_points"]) == 3
    assert run(["--seed", "3", "blaschke", "sweep", "--samples", "20"], tmp_path / "s") == 0
    man = json.loads((tmp_path / "s" / "manifest.json").read_text())
    assert man["seed"] == 3


def test_mating_report(tmp_path, capsys):
    assert run(["mating-report", "--fixture", "nsb"], tmp_path / "m") == 0
    assert "no common arrow structure" in capsys.readouterr().out


def test_degen_pipeline_and_report(tmp_path, capsys):
    T = next(t for t in rt.enumerate_trees(3) if len(t.branch_points) == 2)
    P = rt.PointedMetricTree(T, T.branch_points[0])
    tree = tmp_path / "tree.json"
    tree.write_text(json.dumps(P.to_json()))
    fam = tmp_path / "fam.json"
    assert run(["degen", "realize", "--tree", str(tree), "--out", str(fam)], tmp_path / "r") == 0
    assert "quasi-fixed: PASS" in capsys.readouterr().out
    assert run(["degen", "extract", "--family", str(fam)], tmp_path / "x") == 0
    got = json.loads((tmp_path / "x" / "tree.json").read_text())
    assert dg.pointed_code(rt.PointedMetricTree.from_json(got)) == dg.pointed_code(P)
    assert run(["degen", "verify", "--family", str(fam)], tmp_path / "v") == 0
    assert (tmp_path / "v" / "verification.csv").exists()
    capsys.readouterr()
    assert run(["report", "--dir", str(tmp_path / "v")]) == 0
    assert "PASS" in capsys.readouterr().out


def test_degen_suite_report(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("PAREDLAB_THREADS", "2")
    assert run(["degen", "suite", "--d", "2"], tmp_path / "s") == 0
    capsys.readouterr()
    assert run(["report", "--dir", str(tmp_path / "s")]) == 0
    out = capsys.readouterr().out
    assert "M=" in out and "R=" in out and "K'=" in out


def test_atlas_report_chain(tmp_path, capsys):
    assert run(["atlas", "--n", "4"], tmp_path / "a") == 0
    capsys.readouterr()
    assert run(["report", "--dir", str(tmp_path / "a")]) == 0
    out = capsys.readouterr().out
    assert "domination: g0 -> g1, g1 -> g2" in out


def test_mono_commands(tmp_path, capsys):
    assert run(["mono", "trace", "--d", "3"], tmp_path / "t") == 0
    assert "permutation: 3 0 1 2" in capsys.readouterr().out
    loop = tmp_path / "loop.json"
    loop.write_text(json.dumps({"loop": "rotation", "d": 3, "samples": 32}))
    assert run(["mono", "compose", "--path", str(loop), "--path", str(loop)], tmp_path / "c") == 0
    assert "permutation: 2 3 0 1" in capsys.readouterr().out


def test_exit_codes(tmp_path, capsys):
    assert run(["verdict", "--graph", str(tmp_path / "missing.json")], tmp_path / "e") == 2
    err = json.loads(capsys.readouterr().err)
    assert err["exit_code"] == 2 and err["error"] == "ValidationError"
    assert run(["atlas", "--n", "9"], tmp_path / "e") == 4
    assert json.loads(capsys.readouterr().err)["error"] == "SizeLimit"
    assert run(["mono", "trace", "--d", "3", "--eps-sep", "0.3"], tmp_path / "e") == 3
    assert json.loads(capsys.readouterr().err)["exit_code"] == 3
    assert run(["report", "--dir", str(tmp_path / "nothing")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "MissingArtifact"


def test_report_detects_tampering(tmp_path, capsys):
    assert run(["atlas", "--n", "4"], tmp_path / "a") == 0
    (tmp_path / "a" / "poset.dot").write_text("tampered\n")
    capsys.readouterr()
    assert run(["report", "--dir", str(tmp_path / "a")]) == 2
