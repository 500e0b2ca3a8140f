"""Mine through the CLI, then verify the result against exact reachability.

Dining philosophers and leader election need long traces and take tens of
seconds per seed; they only run with ``--runslow``.
"""

import json

import pytest

from invmine.cli import main

from conftest import CORPUS, load

SEEDS = range(20)

# model -> (trace length, survival budget); trace length is at least the
# depth at which every reachable data valuation has been seen
SETTINGS = {
    "toggle": (2, 72),
    "peterson2": (16, 72),
    "producer_consumer": (20, 72),
    "leader_election3": (21, 72),
    "dining_philosophers3": (64, 150),
}
SLOW = {"leader_election3", "dining_philosophers3"}


def _params():
    for name in sorted(SETTINGS):
        marks = [pytest.mark.slow] if name in SLOW else []
        yield pytest.param(name, marks=marks, id=name)


def test_settings_cover_the_corpus(corpus_paths):
    assert sorted(p.stem for p in corpus_paths) == sorted(SETTINGS)


@pytest.mark.parametrize("name", list(_params()))
def test_mine_then_verify_is_sound(name, tmp_path, capsys):
    path = str(CORPUS / f"{name}.mpl")
    trace_len, budget = SETTINGS[name]
    for seed in SEEDS:
        report = tmp_path / f"{seed}.json"
        argv = ["mine", path, "--seed", str(seed), "--trace-len", str(trace_len),
                "--budget", str(budget), "--lazy-revise", "--report", str(report)]
        assert main(argv) == 0
        capsys.readouterr()
        mined = json.loads(report.read_text())
        assert mined["terminated"], f"seed {seed} hit the round cap"
        (tmp_path / "inv.txt").write_text(mined["final_invariant"])
        assert main(["verify", path, f"@{tmp_path / 'inv.txt'}", "--json"]) == 0
        verdict = json.loads(capsys.readouterr().out)
        assert verdict["verdict"] == "SOUND", f"seed {seed}: {verdict['counterexamples'][:2]}"


def test_every_corpus_model_has_a_finite_state_space(corpus_paths):
    from invmine.executor import reach_fixpoint

    for path in corpus_paths:
        assert reach_fixpoint(load(path.stem))
