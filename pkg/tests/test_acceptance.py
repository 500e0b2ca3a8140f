"""Acceptance criteria 1-8.

Each test records a one-line PASS/FAIL verdict in ``RESULTS``; the lines are
printed in the pytest terminal summary, or directly when this file is run
as a script.
"""

import random
import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from invmine.executor import ProgramState, domain_matrix, reach_fixpoint
from invmine.formulas import (
    And,
    Atom,
    ExampleSets,
    Iff,
    Implies,
    Not,
    Or,
    signature,
)
from invmine.invgen import InvGenConfig, revise_invariant, run_invgen
from invmine.learner import LearnerConfig, inv_learn
from invmine.lang import parse
from invmine.stats import cp_lower_bound, cp_trials

from conftest import load
from oracles import formulas_by_length, min_separating_length, separates

RESULTS: dict[int, str] = {}

PETERSON_SEEDS = range(20)
PETERSON_CFG = dict(trace_len=16, negatives_per_round=4, trace_budget=72,
                    learner=LearnerConfig(delta=0.95), lazy_revise=True)


def record(n, ok, detail):
    RESULTS[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    return ok


# -- 1 -------------------------------------------------------------------------


def test_1_clopper_pearson():
    n = cp_trials(0.05)
    lb = cp_lower_bound(72, 0.05)
    ok = n == 72 and 0.95 <= lb <= 0.9505
    record(1, ok, f"cp_trials(0.05)={n}, cp_lower_bound(72, 0.05)={lb:.6f}")
    assert ok


# -- 2 -------------------------------------------------------------------------

SIG_MODEL = parse("int[0..3] x; int[0..3] y; int[0..3] z; proc { x = 1; }")
SIG_ATOMS = [
    Atom("<=", 1, const=1, text="x <= 1"),
    Atom(">=", 2, const=2, text="y >= 2"),
    Atom("==", 1, 3, text="x == z"),
    Atom("!=", 3, const=0, text="z != 0"),
]


def _truth(f, X):
    """Pointwise truth over rows of X, written independently of the library."""
    if isinstance(f, Atom):
        a = X[:, f.left]
        b = X[:, f.right] if f.const is None else f.const
        return {"<=": a <= b, ">=": a >= b, "==": a == b, "!=": a != b}[f.op]
    if isinstance(f, Not):
        return ~_truth(f.arg, X)
    l, r = _truth(f.left, X), _truth(f.right, X)
    if isinstance(f, And):
        return l & r
    if isinstance(f, Or):
        return l | r
    if isinstance(f, Implies):
        return ~l | r
    return l == r


def test_2_signatures():
    t0 = time.perf_counter()
    rng = random.Random(2)
    forms = [f for fs in formulas_by_length(SIG_ATOMS, 5).values() for f in fs]
    domain = [ProgramState((0,), v) for v in product(range(4), repeat=3)]
    sets = []
    for _ in range(200):
        ten = rng.sample(domain, 10)
        k = rng.randint(1, 9)
        sets.append(ExampleSets(ten[:k], ten[k:]))
    X = np.array([[s.flat for s in ex.examples()] for ex in sets]).reshape(-1, 4)
    weights = 1 << np.arange(10, dtype=np.int64)
    n_pos = np.array([ex.n_pos for ex in sets])
    is_pos = np.arange(10)[None, :] < n_pos[:, None]
    caches = [{} for _ in sets]
    # set-definition scores by (tp, fp, |P|); only a few dozen distinct keys
    scores = {}
    mismatches = 0
    for f in forms:
        truth = _truth(f, X).reshape(200, 10)
        bits = (truth * weights).sum(axis=1).tolist()
        tp = (truth & is_pos).sum(axis=1).tolist()
        fp = (truth & ~is_pos).sum(axis=1).tolist()
        for ex, cache, b, t, n in zip(sets, caches, bits, tp, fp):
            sig = signature(f, ex, cache)
            key = (t, n, ex.n_pos)
            if key not in scores:
                p = Fraction(t, t + n) if t + n else Fraction(0)
                r = Fraction(t, ex.n_pos)
                scores[key] = (p.numerator, p.denominator, r.numerator, r.denominator)
            got_p, got_r = sig.precision(), sig.recall()
            got = (got_p.numerator, got_p.denominator, got_r.numerator, got_r.denominator)
            if sig.bits != b or got != scores[key]:
                mismatches += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 10
    record(2, ok, f"{len(forms)} formulas x 200 sets, {mismatches} mismatches, {elapsed:.1f}s")
    assert ok


# -- 3, 4, 5 ------------------------------------------------------------------


@pytest.fixture(scope="module")
def peterson_runs():
    m = load("peterson2")
    R = reach_fixpoint(m)
    X = domain_matrix(m)
    mutex = X[:, m.slot_index["ncrit"]] <= 1
    runs = []
    t0 = time.perf_counter()
    for seed in PETERSON_SEEDS:
        violations = []

        def monitor(info, violations=violations):
            st = info.state
            if (info.missed or info.bad) and info.revised and len(st.reached) <= info.reached_before:
                violations.append((info.round, "reached did not grow"))
            if not st.reached <= R:
                violations.append((info.round, "reached outside Reach"))
            if st.reached & st.speculated:
                violations.append((info.round, "reached meets speculated"))

        phi, st, rep = run_invgen(m, InvGenConfig(seed=seed, **PETERSON_CFG), reachable=R, on_round=monitor)
        sat = phi.eval_array(X)
        runs.append({
            "seed": seed,
            "terminated": rep.terminated,
            "sound": all(phi.eval(s.flat) for s in R),
            "implies_mutex": bool(np.all(mutex | ~sat)),
            "ratio": rep.visited_ratio,
            "rounds": rep.rounds,
            "violations": violations,
        })
    return runs, time.perf_counter() - t0


def test_3_peterson_soundness(peterson_runs):
    runs, elapsed = peterson_runs
    sound = sum(r["terminated"] and r["sound"] for r in runs)
    max_ratio = max(r["ratio"] for r in runs)
    ok = sound >= 18 and max_ratio < 1.0 and elapsed < 300
    record(3, ok, f"{sound}/20 sound, max visited_ratio={max_ratio:.3f}, {elapsed:.1f}s")
    assert ok


def test_4_peterson_mutual_exclusion(peterson_runs):
    runs, elapsed = peterson_runs
    useful = sum(r["sound"] and r["implies_mutex"] for r in runs)
    ok = useful >= 15
    record(4, ok, f"{useful}/20 sound runs imply ncrit <= 1 over the whole domain")
    assert ok


def test_5_monotonicity(peterson_runs):
    runs, _ = peterson_runs
    bad = [(r["seed"], v) for r in runs for v in r["violations"]]
    rounds = sum(r["rounds"] for r in runs)
    ok = not bad
    record(5, ok, f"{rounds} instrumented rounds, {len(bad)} violations")
    assert ok, bad[:5]


# -- 6 -------------------------------------------------------------------------


def test_6_toggle_convergence():
    t0 = time.perf_counter()
    m = load("toggle")
    R = reach_fixpoint(m)
    converged = 0
    for seed in range(10):
        hit = []

        def watch(info):
            if not hit and info.state.reached == R:
                hit.append(info.round)

        # budget far beyond the round cap stands in for an unbounded budget
        cfg = InvGenConfig(trace_len=2, trace_budget=10**9, max_rounds=500, seed=seed)
        phi, st, rep = run_invgen(m, cfg, on_round=watch)
        if hit and all(phi.eval(s.flat) for s in R):
            converged += 1
    elapsed = time.perf_counter() - t0
    ok = converged == 10 and elapsed < 30
    record(6, ok, f"{converged}/10 seeds reached the full reachable set within 500 rounds, {elapsed:.1f}s")
    assert ok


# -- 7 -------------------------------------------------------------------------


def test_7_xor_minimum_length():
    t0 = time.perf_counter()
    m = parse("bool a; bool b; bool c; proc { a = 1; }")
    atoms = [Atom("==", i + 1, const=1, text=f"{n} == 1") for i, n in enumerate("abc")]
    details = []
    ok = True
    for n in (2, 3):
        P, N = [], []
        for v in product((0, 1), repeat=n):
            st = ProgramState((0,), tuple(v) + (0,) * (3 - n))
            (N if sum(v) % 2 else P).append(st)
        best = min_separating_length(atoms[:n], P, N, 7)
        res = inv_learn(ExampleSets(P, N), LearnerConfig(delta=1.0), atoms[:n], random.Random(0))
        good = len(res.formula) == best and separates(res.formula, P, N)
        ok &= good
        details.append(f"{n}-var: learned {len(res.formula)} vs oracle {best}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record(7, ok, "; ".join(details) + f", {elapsed:.1f}s")
    assert ok


# -- 8 -------------------------------------------------------------------------

# a solo trace of process 0 as positives, and two unvisited states
# (process 1 part-way through its entry protocol) as negatives
EXAMPLE_P = [(0, 0, 0, 0, 0, 0), (1, 0, 1, 0, 0, 0), (2, 0, 1, 0, 0, 0),
             (4, 0, 1, 0, 0, 1), (6, 0, 1, 0, 0, 0), (0, 0, 0, 0, 0, 0)]
EXAMPLE_N = [(0, 1, 0, 1, 0, 0), (0, 2, 0, 1, 1, 0)]


def test_8_flag_example():
    m = load("peterson2")
    P = {ProgramState.from_flat(f, 2) for f in EXAMPLE_P}
    N = {ProgramState.from_flat(f, 2) for f in EXAMPLE_N}
    res = revise_invariant(m, P, N, InvGenConfig(seed=0), random.Random(0))
    ex = ExampleSets(sorted(P), sorted(N))
    target = Atom("==", m.slot_index["flag[1]"], const=0, text="flag[1] == 0")
    got, want = signature(res.formula, ex), signature(target, ex)
    ok = got == want
    record(8, ok, f"learned {res.formula} with signature {got}, flag[1] == 0 has {want}")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
