import json
import subprocess
import sys

import pytest

from opennucad.cli import main

from corpus import EXAMPLE


@pytest.fixture
def example_tree(tmp_path):
    src = tmp_path / "example.tarski"
    src.write_text(EXAMPLE + "\n")
    out = tmp_path / "tree.json"
    assert main(["build", str(src), "-o", str(out)]) == 0
    return out


def test_build_prints_counts(tmp_path, capsys):
    src = tmp_path / "example.tarski"
    src.write_text(EXAMPLE)
    assert main(["build", str(src), "-o", str(tmp_path / "t.json")]) == 0
    assert capsys.readouterr().out.splitlines() == ["leaves: 7", "cells: 11", "factors: 5"]


def test_build_trivial(tmp_path, capsys):
    src = tmp_path / "trivial.tarski"
    src.write_text("vars x; 0 < 1")
    assert main(["build", str(src)]) == 0
    assert "leaves: 1" in capsys.readouterr().out


def test_build_parse_error(tmp_path, capsys):
    src = tmp_path / "bad.tarski"
    src.write_text("vars x;\nx > > 0\n")
    assert main(["build", str(src)]) == 2
    assert "line 2, column 5" in capsys.readouterr().err


def test_build_cap_abort(tmp_path, capsys):
    src = tmp_path / "example.tarski"
    src.write_text(EXAMPLE)
    assert main(["build", str(src), "--cap", "4"]) == 3
    assert "cap" in capsys.readouterr().err


def test_query(example_tree, capsys):
    assert main(["query", str(example_tree), "-p", "0,0"]) == 0
    assert capsys.readouterr().out.strip() == "2X false"
    assert main(["query", str(example_tree), "-p", "-3/2,2"]) == 0
    assert capsys.readouterr().out.strip() == "2U1L2X true"
    assert main(["query", str(example_tree), "-p", "0,1/16"]) == 4
    assert "boundary" in capsys.readouterr().out
    assert main(["query", str(example_tree), "-p", "1"]) == 2
    assert main(["query", str(example_tree), "-p", "a,b"]) == 2


def test_stats(example_tree, capsys):
    assert main(["stats", str(example_tree)]) == 0
    assert capsys.readouterr().out.strip() == "cells: 11, leaves: 7, factors: 5, x_cells: 4, depth: 3"


def test_verify(example_tree, capsys):
    assert main(["verify", str(example_tree), "--samples", "500", "--seed", "1"]) == 0
    reports = json.loads(capsys.readouterr().out)
    assert [r["check"] for r in reports] == ["truth_invariance", "weak_decomposition", "bpolys_in_closure"]
    assert all(r["pass"] for r in reports)


def test_verify_fails_on_corrupted_tree(example_tree, capsys):
    doc = json.loads(example_tree.read_text())
    for cell in doc["cells"]:
        if cell["label"] == "2X":
            cell["truth"] = True
    example_tree.write_text(json.dumps(doc, indent=2) + "\n")
    assert main(["verify", str(example_tree), "--samples", "500"]) == 1


def test_missing_tree(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "nope.json")]) == 2


def test_plot_is_deterministic(example_tree, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert main(["plot", str(example_tree), "-o", str(a), "--window", "-2,2,-2,2", "--grid", "40"]) == 0
    assert main(["plot", str(example_tree), "-o", str(b), "--window", "-2,2,-2,2", "--grid", "40"]) == 0
    svg = a.read_text()
    assert svg == b.read_text()
    assert svg.startswith("<?xml") and 'version="1.1"' in svg
    # every leaf of the example shows up in this window
    assert len({part.split('"')[0] for part in svg.split('fill="')[1:]} - {"#808080"}) == 7


def test_plot_rejects_non_planar(tmp_path):
    src = tmp_path / "line.tarski"
    src.write_text("vars x; x > 0")
    tree = tmp_path / "t.json"
    assert main(["build", str(src), "-o", str(tree)]) == 0
    assert main(["plot", str(tree), "-o", str(tmp_path / "p.svg")]) == 2


def test_unknown_flag_rejected(example_tree):
    with pytest.raises(SystemExit) as e:
        main(["stats", str(example_tree), "--bogus"])
    assert e.value.code == 2


def test_module_entry_point(example_tree):
    res = subprocess.run(
        [sys.executable, "-m", "opennucad", "query", str(example_tree), "-p", "0,2"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout.strip() == "2U2U true"
