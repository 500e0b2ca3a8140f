import json
import subprocess
import sys

import pytest

from invmine.cli import main

from conftest import CORPUS

PETERSON = str(CORPUS / "peterson2.mpl")
TOGGLE = str(CORPUS / "toggle.mpl")


def test_reach_counts(capsys):
    assert main(["reach", PETERSON, "--fixpoint"]) == 0
    assert capsys.readouterr().out.strip() == "58"
    assert main(["reach", PETERSON, "--k", "0"]) == 0
    assert capsys.readouterr().out.strip() == "1"
    assert main(["reach", TOGGLE]) == 0
    assert capsys.readouterr().out.strip() == "4"


def test_reach_dump(tmp_path):
    out = tmp_path / "r.tsv"
    assert main(["reach", TOGGLE, "--dump", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 4


def test_reach_explosion():
    assert main(["reach", PETERSON, "--max-states", "5"]) == 3


def test_mine_then_verify(tmp_path, capsys):
    report = tmp_path / "r.json"
    stats = tmp_path / "stats.jsonl"
    code = main(["mine", PETERSON, "--seed", "7", "--budget", "120", "--lazy-revise",
                 "--report", str(report), "--learner-stats", str(stats)])
    assert code == 0
    data = json.loads(report.read_text())
    assert data["survival_rounds"] >= 120
    assert data["seed"] == 7
    assert data["reachable_states"] == 58
    assert len(stats.read_text().splitlines()) == len(data["revisions"])
    capsys.readouterr()
    assert main(["verify", PETERSON, data["final_invariant"]]) == 0
    assert capsys.readouterr().out.startswith("SOUND")


def test_certify_floor(tmp_path):
    report = tmp_path / "r.json"
    assert main(["mine", PETERSON, "--alpha", "0.05", "--certify", "--budget", "10",
                 "--lazy-revise", "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["survival_rounds"] >= 72
    assert data["cp_lower_bound"] >= 0.95


def test_verify_unsound_witness(capsys):
    assert main(["verify", PETERSON, "ncrit == 0", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "UNSOUND"
    assert 1 <= len(out["counterexamples"]) <= 10
    assert all(c["ncrit"] == "1" for c in out["counterexamples"])


def test_verify_true_tightness(capsys):
    assert main(["verify", PETERSON, "true", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "SOUND"
    assert out["tightness"]["count"] == 165888 - 58


def test_verify_explosion_is_partial(capsys):
    assert main(["verify", PETERSON, "ncrit <= 1", "--max-states", "5", "--json"]) == 3
    assert json.loads(capsys.readouterr().out)["verdict"] == "UNKNOWN"


@pytest.mark.parametrize("argv", [
    ["mine", "missing.mpl"],
    ["reach"],
    ["mine", PETERSON, "--delta", "1.5"],
    ["mine", PETERSON, "--alphabet", "nosuch"],
    ["verify", PETERSON, "ncrit <="],
])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_parse_error_location(tmp_path, capsys):
    bad = tmp_path / "bad.mpl"
    bad.write_text("bool a;\nproc { a = ; }\n")
    assert main(["reach", str(bad)]) == 1
    assert f"{bad}:2:12:" in capsys.readouterr().err


def test_learner_failure_exit_code(capsys):
    argv = ["mine", PETERSON, "--max-inv-len", "1", "--leaf-bound", "2", "--max-tree-depth", "1", "--lazy-revise"]
    assert main(argv) == 2
    assert "learner failed" in capsys.readouterr().err


def test_sample_is_seeded(capsys):
    main(["sample", PETERSON, "--seed", "4", "--trace-len", "6"])
    a = capsys.readouterr().out
    main(["sample", PETERSON, "--seed", "4", "--trace-len", "6"])
    assert capsys.readouterr().out == a
    assert len(a.splitlines()) == 8


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "invmine", "reach", TOGGLE], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip() == "4"
