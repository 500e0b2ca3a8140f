"""The sample / speculate / revise loop.

Each round samples one bounded trace.  Visited states are positives;
random unvisited states are speculated to be unreachable and serve as
negatives.  The candidate is re-learned whenever a round refutes it, and
the loop stops once the candidate survives ``trace_budget`` rounds in a row.
"""

from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .executor import ProgramState, SchedulerPolicy, Trace, dump_trace, random_state, sample_trace
from .formulas import FALSE, AtomTemplate, ExampleSets, Formula, instantiate_atoms, _resolve_alphabet
from .lang.model import ProgramModel, state_space_size
from .learner import LearnerConfig, LearningFailure, LearnResult, decision_tree_learn
from .stats import cp_lower_bound, cp_trials

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InvGenConfig:
    trace_len: int = 16
    negatives_per_round: int = 4
    trace_budget: int = 72
    alpha: float = 0.05
    epsilon: float = 0.05
    learner: LearnerConfig = field(default_factory=LearnerConfig)
    alphabet: Optional[tuple[str, ...]] = None  # None: every non-pc variable
    templates: Optional[tuple[AtomTemplate, ...]] = None
    seed: int = 0
    certify: bool = False
    lazy_revise: bool = False
    max_rounds: int = 5_000
    policy: SchedulerPolicy = field(default_factory=SchedulerPolicy)
    tightness_samples: int = 2000
    dump_traces: Optional[str] = None

    def __post_init__(self):
        if self.trace_len < 0:
            raise ValueError("trace_len must be >= 0")
        if self.negatives_per_round < 0:
            raise ValueError("negatives_per_round must be >= 0")
        if self.trace_budget < 1:
            raise ValueError("trace_budget must be >= 1")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")

    @property
    def effective_budget(self) -> int:
        if self.certify:
            return max(self.trace_budget, cp_trials(self.alpha))
        return self.trace_budget

    def to_json(self) -> dict:
        d = asdict(self)
        d["templates"] = None if self.templates is None else [t.shape.value for t in self.templates]
        d["policy"] = {"kind": self.policy.kind, "weights": self.policy.weights}
        d["alphabet"] = None if self.alphabet is None else list(self.alphabet)
        return d


@dataclass
class Revision:
    round: int
    missed: int
    bad: int
    new: int
    formula: str
    wall_time: float
    reached: int
    speculated: int


@dataclass
class InvGenState:
    reached: set = field(default_factory=set)
    speculated: set = field(default_factory=set)
    phi: Formula = FALSE
    survival: int = 0
    rounds: int = 0
    revisions: list = field(default_factory=list)


@dataclass
class RoundInfo:
    """What one loop iteration saw; handed to the ``on_round`` observer."""

    round: int
    trace: Trace
    missed: frozenset
    bad: frozenset
    new_negs: frozenset
    revised: bool
    reached_before: int
    state: InvGenState


@dataclass
class Report:
    model: str
    seed: int
    config: dict
    revisions: list
    visited_states: int
    reachable_states: Optional[int]
    visited_ratio: Optional[float]
    final_invariant: str
    survival_rounds: int
    cp_lower_bound: Optional[float]
    learner_stats: list
    terminated: bool = True
    rounds: int = 0
    state_space: Optional[int] = None
    tightness_estimate: Optional[float] = None
    error: Optional[str] = None

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Report":
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "Report":
        return cls.from_json(json.loads(text))


class InvGenAborted(Exception):
    """The learner failed; carries the partial state and report."""

    def __init__(self, message: str, state: InvGenState, report: Report):
        super().__init__(message)
        self.state = state
        self.report = report


def speculate_negatives(
    model: ProgramModel,
    reached: set,
    i: int,
    rng: random.Random,
) -> set[ProgramState]:
    """Up to ``i`` distinct random domain states outside ``reached``.

    Rejection sampling gives up after ``100 * i`` draws.
    """
    out: set[ProgramState] = set()
    attempts = 0
    while len(out) < i and attempts < 100 * i:
        attempts += 1
        s = random_state(model, rng)
        if s not in reached:
            out.add(s)
    return out


def _streams(seed: int, n: int) -> list[random.Random]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [random.Random(int(c.generate_state(1, dtype=np.uint64)[0])) for c in children]


def _project(slots: Sequence[int]):
    return lambda s: tuple(s.flat[i] for i in slots)


def learning_examples(reached: set, speculated: set, slots: Sequence[int]) -> ExampleSets:
    """Positives and negatives as seen through the learning alphabet.

    States are deduplicated by their projection; a speculated state whose
    projection matches a reached one is dropped, since no formula over the
    alphabet can tell them apart.
    """
    key = _project(slots)
    pos: dict[tuple, ProgramState] = {}
    for s in sorted(reached):
        pos.setdefault(key(s), s)
    neg: dict[tuple, ProgramState] = {}
    for s in sorted(speculated):
        k = key(s)
        if k not in pos:
            neg.setdefault(k, s)
    return ExampleSets(pos.values(), neg.values())


def revise_invariant(
    model: ProgramModel,
    reached: set,
    speculated: set,
    cfg: InvGenConfig,
    rng: random.Random,
) -> LearnResult:
    """One revision step: learn from ``reached`` against ``speculated``."""
    slots = _resolve_alphabet(model, cfg.alphabet)
    ex = learning_examples(reached, speculated, slots)
    atoms = instantiate_atoms(model, ex.P, cfg.templates, [model.slots[i].name for i in slots])
    return decision_tree_learn(ex, cfg.learner, atoms, rng)


def run_invgen(
    model: ProgramModel,
    cfg: InvGenConfig,
    *,
    reachable: Optional[set] = None,
    on_round: Optional[Callable[[RoundInfo], None]] = None,
    model_name: str = "",
) -> tuple[Formula, InvGenState, Report]:
    """Mine a candidate invariant for ``model``.

    ``reachable`` (the exact reachable set, if known) is used only for the
    report's visited ratio.  Raises :class:`InvGenAborted` if learning fails.
    """
    trace_rng, spec_rng, learn_rng, misc_rng = _streams(cfg.seed, 4)
    slots = _resolve_alphabet(model, cfg.alphabet)
    budget = cfg.effective_budget
    key = _project(slots)
    pos_keys: set[tuple] = set()
    st = InvGenState()
    learner_stats: list[dict] = []
    dump_dir = Path(cfg.dump_traces) if cfg.dump_traces else None
    if dump_dir is not None:
        dump_dir.mkdir(parents=True, exist_ok=True)

    def report(terminated: bool, error: Optional[str] = None) -> Report:
        visited = len(st.reached)
        n_reach = None if reachable is None else len(reachable)
        return Report(
            model=model_name,
            seed=cfg.seed,
            config=cfg.to_json(),
            revisions=[asdict(r) for r in st.revisions],
            visited_states=visited,
            reachable_states=n_reach,
            visited_ratio=None if not n_reach else visited / n_reach,
            final_invariant=str(st.phi),
            survival_rounds=st.survival,
            cp_lower_bound=cp_lower_bound(st.survival, cfg.alpha) if st.survival else None,
            learner_stats=learner_stats,
            terminated=terminated,
            rounds=st.rounds,
            state_space=state_space_size(model),
            tightness_estimate=_tightness(model, st, cfg.tightness_samples, misc_rng) if terminated else None,
            error=error,
        )

    while st.survival < budget and st.rounds < cfg.max_rounds:
        st.rounds += 1
        trace = sample_trace(model, cfg.trace_len, cfg.policy, trace_rng, seed=cfg.seed)
        if dump_dir is not None:
            dump_trace(trace, dump_dir / f"trace_{st.rounds:05d}.tsv")
        visited = trace.state_set()
        phi = st.phi
        missed = frozenset(s for s in visited if not phi.eval(s.flat))
        before = len(st.reached)
        st.reached |= visited
        new_negs = frozenset(speculate_negatives(model, st.reached, cfg.negatives_per_round, spec_rng))
        bad = frozenset(visited & st.speculated)
        st.speculated = (st.speculated | new_negs) - bad
        if cfg.lazy_revise:
            # negatives that project onto a reached state are dropped by
            # learning_examples, so they cannot refute the candidate
            pos_keys.update(key(s) for s in visited)
            new_trigger = any(phi.eval(s.flat) for s in new_negs if key(s) not in pos_keys)
        else:
            new_trigger = bool(new_negs)

        assert not (st.reached & st.speculated), "reached and speculated overlap"
        if missed or bad:
            assert len(st.reached) > before, "refuting round did not grow the reached set"

        revised = bool(missed or bad or new_trigger)
        if revised:
            t0 = time.perf_counter()
            try:
                result = revise_invariant(model, st.reached, st.speculated, cfg, learn_rng)
            except LearningFailure as exc:
                st.survival = 0
                learner_stats.append(exc.stats.to_json())
                raise InvGenAborted(f"learner failed in round {st.rounds}: {exc}", st,
                                    report(False, str(exc))) from exc
            st.phi = result.formula
            st.survival = 0
            elapsed = time.perf_counter() - t0
            learner_stats.append(result.stats.to_json())
            st.revisions.append(Revision(st.rounds, len(missed), len(bad), len(new_negs),
                                         str(st.phi), elapsed, len(st.reached), len(st.speculated)))
            log.debug("round %d: revised to %s", st.rounds, st.phi)
        else:
            st.survival += 1
        if on_round is not None:
            on_round(RoundInfo(st.rounds, trace, missed, bad, new_negs, revised, before, st))

    return st.phi, st, report(st.survival >= budget)


def _tightness(model: ProgramModel, st: InvGenState, samples: int, rng: random.Random) -> Optional[float]:
    """Fraction of random unvisited domain states that satisfy the candidate."""
    if samples <= 0:
        return None
    hits = total = 0
    for _ in range(samples * 10):
        if total >= samples:
            break
        s = random_state(model, rng)
        if s in st.reached:
            continue
        total += 1
        hits += st.phi.eval(s.flat)
    return hits / total if total else None


__all__ = [
    "InvGenAborted",
    "InvGenConfig",
    "InvGenState",
    "Report",
    "Revision",
    "RoundInfo",
    "learning_examples",
    "revise_invariant",
    "run_invgen",
    "speculate_negatives",
]
