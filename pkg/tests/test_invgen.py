import random

import pytest

from invmine.executor import ProgramState, reach_fixpoint
from invmine.invgen import (
    InvGenAborted,
    InvGenConfig,
    Report,
    learning_examples,
    run_invgen,
    speculate_negatives,
)
from invmine.learner import LearnerConfig
from invmine.lang import state_space_size


def test_speculated_states_avoid_reached(peterson):
    R = reach_fixpoint(peterson)
    rng = random.Random(0)
    for _ in range(20):
        out = speculate_negatives(peterson, R, 5, rng)
        assert len(out) == 5
        assert not out & R
        for s in out:
            assert all(0 <= pc < n for pc, n in zip(s.pcs, peterson.pc_sizes()))


def test_speculation_gives_up_when_domain_is_covered(toggle):
    everything = {ProgramState.from_flat(f, 2) for f in
                  [(a, b, c) for a in (0, 1) for b in (0, 1) for c in (0, 1)]}
    assert len(everything) == state_space_size(toggle)
    assert speculate_negatives(toggle, everything, 3, random.Random(0)) == set()
    assert speculate_negatives(toggle, set(), 0, random.Random(0)) == set()


def test_projection_drops_indistinguishable_negatives():
    # slots 2.. are data; positives and negatives differ only in the pc
    P = {ProgramState((0, 0), (1, 0)), ProgramState((1, 0), (1, 0))}
    N = {ProgramState((2, 2), (1, 0)), ProgramState((0, 0), (0, 1))}
    ex = learning_examples(P, N, [2, 3])
    assert ex.n_pos == 1
    assert ex.N == (ProgramState((0, 0), (0, 1)),)


def test_toggle_converges(toggle):
    R = reach_fixpoint(toggle)
    cfg = InvGenConfig(trace_len=2, trace_budget=20, seed=4, lazy_revise=True)
    phi, st, rep = run_invgen(toggle, cfg, reachable=R)
    assert st.reached == R
    assert all(phi.eval(s.flat) for s in R)
    assert rep.terminated and rep.visited_ratio == 1.0


def test_loop_invariants_hold_every_round(peterson):
    R = reach_fixpoint(peterson)
    seen = []

    def check(info):
        st = info.state
        assert st.reached <= R
        assert not st.reached & st.speculated
        if info.missed or info.bad:
            assert len(st.reached) > info.reached_before
        if info.revised:
            assert all(st.phi.eval(s.flat) for s in st.reached)
        seen.append(info.revised)

    run_invgen(peterson, InvGenConfig(seed=1, lazy_revise=True), reachable=R, on_round=check)
    assert seen and seen[0]


def test_runs_are_reproducible(peterson):
    cfg = InvGenConfig(seed=12, lazy_revise=True)
    a = run_invgen(peterson, cfg)[2]
    b = run_invgen(peterson, cfg)[2]
    assert a.final_invariant == b.final_invariant
    assert [r["formula"] for r in a.revisions] == [r["formula"] for r in b.revisions]
    assert a.rounds == b.rounds


def test_certify_raises_budget(peterson):
    cfg = InvGenConfig(seed=3, trace_budget=5, certify=True, lazy_revise=True)
    assert cfg.effective_budget == 72
    rep = run_invgen(peterson, cfg)[2]
    assert rep.survival_rounds == 72
    assert rep.cp_lower_bound == pytest.approx(0.95006, abs=1e-5)


def test_literal_mode_keeps_revising(peterson):
    # with speculation on, every round produces new negatives
    cfg = InvGenConfig(seed=0, max_rounds=30)
    phi, st, rep = run_invgen(peterson, cfg)
    assert not rep.terminated
    assert len(rep.revisions) == 30


def test_report_round_trip(peterson):
    rep = run_invgen(peterson, InvGenConfig(seed=2, lazy_revise=True), reachable=reach_fixpoint(peterson),
                     model_name="peterson2.mpl")[2]
    assert Report.loads(rep.dumps()) == rep
    assert rep.reachable_states == 58
    assert 0 < rep.visited_ratio <= 1
    assert rep.config["seed"] == 2


def test_learner_failure_aborts_with_partial_report(peterson):
    tight = LearnerConfig(max_inv_length=1, leaf_bound=2, max_tree_depth=1)
    with pytest.raises(InvGenAborted) as info:
        run_invgen(peterson, InvGenConfig(seed=0, learner=tight))
    assert info.value.report.terminated is False
    assert info.value.report.error


def test_trace_dump(peterson, tmp_path):
    run_invgen(peterson, InvGenConfig(seed=0, lazy_revise=True, trace_budget=3, dump_traces=str(tmp_path)))
    files = sorted(tmp_path.glob("trace_*.tsv"))
    assert files
    first = files[0].read_text().splitlines()
    assert first[0] == "0\t0\t0\t0\t0\t0"


@pytest.mark.parametrize("field,value", [("trace_len", -1), ("negatives_per_round", -1),
                                         ("trace_budget", 0), ("alpha", 1.5)])
def test_config_validation(field, value):
    with pytest.raises(ValueError):
        InvGenConfig(**{field: value})
