import json
import subprocess
import sys

import pytest

from subgap.cli import main


def run(argv, capsys):
    code = main(argv + ["--format", "json"])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if code == 0 else None), err


@pytest.fixture
def k2_files(tmp_path):
    inst = tmp_path / "k2.json"
    inst.write_text(json.dumps({"n": 2, "kind": "cut", "payload": {"edges": [[0, 1]]}}))
    free = tmp_path / "free.json"
    free.write_text(json.dumps({"kind": "free", "n": 2}))
    return str(inst), str(free)


def test_solve_k2(k2_files, capsys):
    inst, free = k2_files
    with pytest.warns(UserWarning):
        code, rep, _ = run(["solve", inst, free, "--t", "1/2"], capsys)
    assert code == 0
    assert rep["results"]["value"] == 0.5
    assert rep["results"]["ratio"] == 0.5
    assert rep["seeds"]["seed"] == 0 and rep["version"]


def test_solve_bases_nu2(tmp_path, capsys):
    inst = tmp_path / "dc.json"
    inst.write_text(json.dumps({"n": 4, "kind": "directed-cut", "payload": {"arcs": [[0, 2], [1, 3]]}}))
    con = tmp_path / "pm.json"
    con.write_text(json.dumps({"kind": "partition", "parts": [[0, 1], [2, 3]], "caps": [1, 1]}))
    code, rep, _ = run(["solve", str(inst), str(con), "--bases", "--t", "1/2"], capsys)
    assert code == 0
    assert rep["results"]["ratio"] >= 0.25


def test_solve_infeasible_bases(k2_files, capsys):
    inst, free = k2_files
    code, _, err = run(["solve", inst, free, "--bases", "--t", "1/2"], capsys)
    assert code == 3
    assert json.loads(err)["nu"] == "1/1"


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(["solve", str(bad)], capsys)
    assert code == 2


def test_gap_commands(capsys):
    code, rep, _ = run(["gap", "k2cut"], capsys)
    assert code == 0 and rep["results"]["gamma"] == pytest.approx(0.5)
    code, rep, _ = run(["gap", "cardinality:2"], capsys)
    assert rep["results"]["gamma"] == pytest.approx(0.75)
    code, rep, _ = run(["gap", "dircut-bases:3"], capsys)
    assert rep["results"]["gamma"] == pytest.approx(1 / 3)


def test_gap_not_strongly_symmetric(capsys):
    code, _, err = run(["gap", "cyclic-pairs"], capsys)
    assert code == 3
    assert json.loads(err)["witness"]["sets"] == [[0, 1], [0, 2]]


def test_harden_small(capsys):
    code, rep, _ = run(["harden", "k2cut", "--eps", "0.01", "--n", "5"], capsys)
    assert code == 0
    gr = rep["results"]["gap_report"]
    assert gr["max_f_hat"] >= 0.98 and gr["max_g_hat"] <= 0.51


def test_harden_non_symmetric_exit(capsys):
    code, _, _ = run(["harden", "cyclic-pairs"], capsys)
    assert code == 3


def test_check_extensions(capsys):
    code, rep, _ = run(["check", "extensions"], capsys)
    assert code == 0
    assert "F ≥ Lovász: 1000/1000 pass" in rep["results"]["lines"]


def test_unknown_suite_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check", "nonsense"])
    assert exc.value.code == 2


def test_seed_env(monkeypatch, capsys):
    monkeypatch.setenv("SUBGAP_SEED", "17")
    code, rep, _ = run(["gap", "k2cut"], capsys)
    assert rep["seeds"]["seed"] == 17


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "subgap", "gap", "k2cut"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "gamma: 0.5" in proc.stdout
