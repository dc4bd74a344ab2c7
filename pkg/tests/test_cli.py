import json
import subprocess
import sys

import pytest

from propa.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def cycles(tmp_path, capsys):
    path = tmp_path / "cyc.json"
    assert run(capsys, "box", "build", "--group", "zd", "--moduli", "8,16,32", "--out", path)[0] == 0
    return path


def test_space_build_girth_export(tmp_path, capsys):
    path = tmp_path / "s.json"
    code, _, _ = run(capsys, "space", "build", "--graph", "petersen", "--graph", "path:4",
                     "--out", path)
    assert code == 0
    code, out, _ = run(capsys, "space", "girth", "--space", path)
    blocks = json.loads(out)["blocks"]
    assert [b["girth"] for b in blocks] == [5, None]
    assert [b["diameter"] for b in blocks] == [2, 3]
    code, out, _ = run(capsys, "space", "export", "--space", path, "--format", "dot")
    assert code == 0 and out.startswith("graph")


def test_epsstar_cycle(cycles, tmp_path, capsys):
    wit = tmp_path / "w.json"
    code, out, _ = run(capsys, "epsstar", "--space", cycles, "--block", 1, "--radius", 8,
                       "--S", 2, "--emit-witness", wit)
    assert code == 0
    assert json.loads(out)["value"] == "2/5"
    assert json.loads(wit.read_text())["S"] == 2
    code, out, _ = run(capsys, "epsstar", "--space", cycles, "--block", 1, "--radius", 8,
                       "--S", 2, "--mode", "float")
    assert abs(json.loads(out)["float"] - 0.4) < 1e-6


def test_folner_check(capsys):
    code, out, _ = run(capsys, "folner", "--box", 8, "--modulus", 64, "--R", 2, "--check")
    data = json.loads(out)
    assert code == 0 and data["check"]["passed"]
    assert data["deficiency"] == {"1": "1/4", "2": "1/2"}
    assert data["neighbor_l1"] == "1/4"


def test_treewitness(cycles, capsys):
    code, out, _ = run(capsys, "treewitness", "--space", cycles, "--eps", "1/4", "--L", "1,2",
                       "--check-fibred")
    data = json.loads(out)
    assert code == 0
    assert all(c["passed"] for c in data["checks"])


def test_profile_duplicate_report(cycles, tmp_path, capsys):
    csv_path, svg_path = tmp_path / "p.csv", tmp_path / "p.svg"
    code, _, err = run(capsys, "profile", "--family", cycles, "--eps", "1/2", "--L", "0,4",
                       "--out", csv_path, "--svg", svg_path, "--no-timing")
    assert code == 0 and "not a proof" in err
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("family,block,L,R,eps,S_min")
    assert len(lines) == 1 + 3 * 2
    assert 'width="800"' in svg_path.read_text()

    dup = tmp_path / "dup.json"
    assert run(capsys, "duplicate", "--family", cycles, "--copies", 2, "--out", dup)[0] == 0
    assert json.loads(dup.read_text())["origin"][:3] == [[0, 0], [0, 1], [1, 0]]

    js = tmp_path / "p.json"
    assert run(capsys, "report", "--csv", csv_path, "--json", js)[0] == 0
    assert len(json.loads(js.read_text())["rows"]) == 6


def test_config_file_sets_defaults(cycles, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"mode": "exact", "timing": False}))
    out = tmp_path / "p.csv"
    code, _, _ = run(capsys, "--config", cfg, "profile", "--family", cycles, "--eps", "1/2",
                     "--L", "2", "--out", out)
    assert code == 0
    assert all(line.endswith(",0") for line in out.read_text().splitlines()[1:])
    cfg.write_text(json.dumps({"colour": "red"}))
    assert run(capsys, "--config", cfg, "space", "build", "--graph", "cycle:4")[0] == 1


def test_exit_codes(cycles, tmp_path, capsys):
    assert run(capsys)[0] == 1
    assert run(capsys, "profile", "--family", cycles)[0] == 1
    assert run(capsys, "space", "build")[0] == 1
    assert run(capsys, "profile", "--family", cycles, "--eps", "0", "--L", "1",
               "--out", tmp_path / "x.csv")[0] == 2
    assert run(capsys, "space", "build", "--graph", "nonsense:3")[0] == 2
    assert run(capsys, "space", "girth", "--space", tmp_path / "absent.json")[0] == 3
    code, _, err = run(capsys, "profile", "--family", cycles, "--eps", "1/2", "--L", "1",
                       "--out", tmp_path / "no" / "x.csv")
    assert code == 3 and "x.csv" in err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "propa", "space", "build", "--graph", "cycle:5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)
