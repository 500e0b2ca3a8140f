"""Classifier learning: decision-tree partitioning over enumerative search.

``decision_tree_learn`` splits large example sets on the atom with the best
precision and hands small partitions to ``inv_learn``, which enumerates
formulas by increasing size over random sub-samples and validates the first
candidate that passes against the full partition.
"""

from __future__ import annotations

import logging
import random
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .formulas import (
    FALSE, TRUE, And, Atom, ExampleSets, Formula, Iff, Implies, Not, Or, signature,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnerConfig:
    delta: float = 0.95
    leaf_bound: int = 200
    max_inv_length: int = 9
    subsample_size: int = 50
    max_subsample_rounds: int = 5
    max_tree_depth: int = 12
    # Enumeration work cap per sub-sampling round; past it the round gives up
    # as if the length bound had been exhausted.
    max_candidates: int = 100_000

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise ValueError("delta must be in (0, 1]")
        for name in ("leaf_bound", "max_inv_length", "subsample_size",
                     "max_subsample_rounds", "max_tree_depth", "max_candidates"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    @property
    def threshold(self) -> Fraction:
        return Fraction(str(self.delta))


@dataclass
class LearnStats:
    atoms: int = 0
    enumerated: int = 0
    deduplicated: int = 0
    inv_learn_calls: int = 0
    subsample_rounds: int = 0
    nodes: int = 0
    fallback_splits: int = 0
    splits: list = field(default_factory=list)
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class LearnResult:
    formula: Formula
    stats: LearnStats


class LearningFailure(Exception):
    def __init__(self, message: str, best: Optional[Formula] = None, stats: Optional[LearnStats] = None):
        super().__init__(message)
        self.best = best
        self.stats = stats or LearnStats()


def passes(sig: int, n_pos: int, n_neg: int, threshold: Fraction) -> bool:
    """recall == 1 and precision > threshold, in exact integer arithmetic."""
    pos_mask = (1 << n_pos) - 1
    if sig & pos_mask != pos_mask:
        return False
    fp = (sig >> n_pos).bit_count()
    return _above(n_pos, fp, threshold)


def _above(tp: int, fp: int, threshold: Fraction) -> bool:
    # A threshold of 1 can only be met with equality.
    if threshold == 1:
        return tp > 0 and fp == 0
    return tp * threshold.denominator > threshold.numerator * (tp + fp)


def dedup_by_signature(candidates: Iterable[Formula], ex: ExampleSets) -> Iterator[Formula]:
    """Drop every candidate whose signature over ``ex`` was already seen."""
    seen: set[int] = set()
    cache: dict = {}
    for f in candidates:
        bits = signature(f, ex, cache).bits
        if bits in seen:
            continue
        seen.add(bits)
        yield f


# -- enumeration --------------------------------------------------------------


class _Search:
    """Bottom-up enumeration by formula size with observational-equivalence
    pruning over one sub-sample.

    Candidates are kept as ``(signature, node)`` pairs where ``node`` is an
    atom or a tuple ``(constructor, child, ...)``; formulas are only built
    for the result and the best fallback.
    """

    def __init__(self, atom_sigs: Sequence[tuple[Atom, int]], n_pos: int, n_neg: int,
                 cfg: LearnerConfig, stats: LearnStats):
        self.atom_sigs = atom_sigs
        self.n_pos = n_pos
        self.n_neg = n_neg
        self.max_len = cfg.max_inv_length
        self.budget = cfg.max_candidates
        self.stats = stats
        self.max_fp = _max_false_positives(n_pos, cfg.threshold)
        self.best: Optional[tuple[Fraction, Formula]] = None

    def run(self) -> Optional[Formula]:
        n_pos = self.n_pos
        pos_mask = (1 << n_pos) - 1
        full = (1 << (n_pos + self.n_neg)) - 1
        max_fp = self.max_fp
        seen: set[int] = set()
        bank: dict[int, list] = {}
        best_fp, best_node = None, None
        enumerated = deduplicated = 0
        found = None

        def offer(sig, node):
            # True when ``node`` passes; tracks the best full-recall node
            nonlocal best_fp, best_node
            if sig & pos_mask != pos_mask:
                return False
            fp = (sig >> n_pos).bit_count()
            if fp <= max_fp:
                return True
            if best_fp is None or fp < best_fp:
                best_fp, best_node = fp, node
            return False

        try:
            level = []
            for atom, sig in self.atom_sigs:
                enumerated += 1
                if sig in seen:
                    deduplicated += 1
                    continue
                seen.add(sig)
                if offer(sig, atom):
                    found = atom
                    return _build(atom)
                level.append((sig, atom))
            bank[1] = level

            limit = self.budget
            for size in range(2, self.max_len + 1):
                level = []
                for sig, f in bank.get(size - 1, ()):
                    nsig = full ^ sig
                    enumerated += 1
                    if nsig in seen:
                        deduplicated += 1
                        continue
                    seen.add(nsig)
                    node = (Not, f)
                    if offer(nsig, node):
                        found = node
                        return _build(node)
                    level.append((nsig, node))
                for l1 in range(1, size - 1):
                    l2 = size - 1 - l1
                    left, right = bank.get(l1, ()), bank.get(l2, ())
                    for i, (s1, f1) in enumerate(left):
                        ns1 = full ^ s1
                        # symmetric operators take each unordered pair once
                        sym_from = i + 1 if l1 == l2 else (0 if l1 < l2 else len(right))
                        for j, (s2, f2) in enumerate(right):
                            if j >= sym_from:
                                for op, sig in ((And, s1 & s2), (Or, s1 | s2), (Iff, full ^ (s1 ^ s2))):
                                    enumerated += 1
                                    if sig in seen:
                                        deduplicated += 1
                                        continue
                                    seen.add(sig)
                                    node = (op, f1, f2)
                                    if offer(sig, node):
                                        found = node
                                        return _build(node)
                                    level.append((sig, node))
                            if l1 != l2 or i != j:
                                sig = ns1 | s2
                                enumerated += 1
                                if sig in seen:
                                    deduplicated += 1
                                    continue
                                seen.add(sig)
                                node = (Implies, f1, f2)
                                if offer(sig, node):
                                    found = node
                                    return _build(node)
                                level.append((sig, node))
                        if enumerated >= limit:
                            return None
                bank[size] = level
                if enumerated >= limit:
                    return None
            return None
        finally:
            self.stats.enumerated += enumerated
            self.stats.deduplicated += deduplicated
            if found is None and best_node is not None:
                self.best = (Fraction(n_pos, n_pos + best_fp), _build(best_node))


def _max_false_positives(n_pos: int, threshold: Fraction) -> int:
    """Largest false-positive count that keeps precision above threshold."""
    fp = 0
    while _above(n_pos, fp + 1, threshold):
        fp += 1
    return fp


def _build(node) -> Formula:
    if isinstance(node, tuple):
        op, *args = node
        return op(*(_build(a) for a in args))
    return node


# -- the learner --------------------------------------------------------------


class _Learner:
    def __init__(self, ex: ExampleSets, cfg: LearnerConfig, atoms: Sequence[Atom], rng: random.Random):
        self.cfg = cfg
        self.rng = rng
        self.atoms = list(atoms)
        self.n_pos = ex.n_pos
        self.X = ex.matrix
        self.stats = LearnStats(atoms=len(self.atoms))
        if len(ex):
            self.A = np.stack([a.eval_array(self.X) for a in self.atoms]) if self.atoms else np.zeros((0, len(ex)), bool)
        else:
            self.A = np.zeros((len(self.atoms), 0), dtype=bool)

    def _full_check(self, f: Formula, pidx: np.ndarray, nidx: np.ndarray) -> tuple[bool, np.ndarray, np.ndarray]:
        sat_p = f.eval_array(self.X[pidx]) if len(pidx) else np.zeros(0, bool)
        sat_n = f.eval_array(self.X[nidx]) if len(nidx) else np.zeros(0, bool)
        tp, fp = int(sat_p.sum()), int(sat_n.sum())
        ok = tp == len(pidx) and _above(tp, fp, self.cfg.threshold)
        return ok, sat_p, sat_n

    def _sample(self, idx: np.ndarray, k: int, exclude: Optional[set] = None) -> list[int]:
        pool = [int(i) for i in idx if exclude is None or int(i) not in exclude]
        if len(pool) <= k:
            return pool
        return sorted(self.rng.sample(pool, k))

    def inv_learn(self, pidx: np.ndarray, nidx: np.ndarray) -> Formula:
        cfg = self.cfg
        self.stats.inv_learn_calls += 1
        if len(pidx) == 0:
            raise LearningFailure("no positive examples", stats=self.stats)
        p_sub = self._sample(pidx, cfg.subsample_size)
        n_sub = self._sample(nidx, cfg.subsample_size)
        best: Optional[Formula] = None
        for _ in range(cfg.max_subsample_rounds):
            self.stats.subsample_rounds += 1
            cols = p_sub + n_sub
            packed = np.packbits(self.A[:, cols], axis=1, bitorder="little") if cols else None
            atom_sigs = [
                (a, int.from_bytes(packed[k].tobytes(), "little") if cols else 0)
                for k, a in enumerate(self.atoms)
            ]
            search = _Search(atom_sigs, len(p_sub), len(n_sub), cfg, self.stats)
            psi = search.run()
            if search.best is not None:
                best = search.best[1]
            if psi is None:
                raise LearningFailure("no formula within the length bound", best, self.stats)
            ok, sat_p, sat_n = self._full_check(psi, pidx, nidx)
            if ok:
                return psi
            best = psi
            # Grow the sub-samples, making sure a witness against psi is in.
            missed = [int(i) for i, s in zip(pidx, sat_p) if not s and int(i) not in p_sub]
            wrong = [int(i) for i, s in zip(nidx, sat_n) if s and int(i) not in n_sub]
            p_new = set(p_sub) | set(self._sample(pidx, cfg.subsample_size, set(p_sub)))
            n_new = set(n_sub) | set(self._sample(nidx, cfg.subsample_size, set(n_sub)))
            if missed and not (p_new - set(p_sub)) & set(missed):
                p_new.add(self.rng.choice(missed))
            if wrong and not (n_new - set(n_sub)) & set(wrong):
                n_new.add(self.rng.choice(wrong))
            p_sub, n_sub = sorted(p_new), sorted(n_new)
        raise LearningFailure("sub-sampling rounds exhausted", best, self.stats)

    def _best_split(self, pidx: np.ndarray, nidx: np.ndarray) -> Optional[int]:
        """Index of the non-constant atom with the highest precision."""
        tp = self.A[:, pidx].sum(axis=1)
        fp = self.A[:, nidx].sum(axis=1)
        total = len(pidx) + len(nidx)
        best_k, best_prec = None, Fraction(-1)
        for k in range(len(self.atoms)):
            covered = int(tp[k] + fp[k])
            if covered == 0 or covered == total:
                continue
            prec = Fraction(int(tp[k]), covered)
            if prec > best_prec:
                best_k, best_prec = k, prec
        return best_k

    def tree(self, pidx: np.ndarray, nidx: np.ndarray, depth: int) -> Formula:
        self.stats.nodes += 1
        if len(pidx) == 0:
            return FALSE
        if len(nidx) == 0:
            return TRUE
        force = False
        if len(pidx) + len(nidx) <= self.cfg.leaf_bound:
            try:
                return self.inv_learn(pidx, nidx)
            except LearningFailure:
                self.stats.fallback_splits += 1
                force = True
        if depth >= self.cfg.max_tree_depth:
            raise LearningFailure("decision tree depth bound exceeded", stats=self.stats)
        k = self._best_split(pidx, nidx)
        if k is None:
            raise LearningFailure("no atom separates the remaining examples", stats=self.stats)
        atom = self.atoms[k]
        on_p, on_n = self.A[k, pidx], self.A[k, nidx]
        self.stats.splits.append({
            "depth": depth, "atom": str(atom), "positives": int(len(pidx)),
            "negatives": int(len(nidx)), "forced": force,
        })
        log.debug("split at depth %d on %s", depth, atom)
        yes = self.tree(pidx[on_p], nidx[on_n], depth + 1)
        no = self.tree(pidx[~on_p], nidx[~on_n], depth + 1)
        return _branch(atom, yes, no)


def _branch(atom: Atom, yes: Formula, no: Formula) -> Formula:
    # (a && y) || (!a && n), with the guard dropped when a branch is constant:
    # a || (!a && n) is a || n, and (a && y) || !a is !a || y.
    if yes == TRUE:
        return _or(atom, no)
    if no == TRUE:
        return _or(Not(atom), yes)
    return _or(_and(atom, yes), _and(Not(atom), no))


def _and(a: Formula, b: Formula) -> Formula:
    if b == TRUE:
        return a
    if b == FALSE:
        return FALSE
    return And(a, b)


def _or(a: Formula, b: Formula) -> Formula:
    if a == FALSE:
        return b
    if b == FALSE:
        return a
    return Or(a, b)


def _indices(ex: ExampleSets) -> tuple[np.ndarray, np.ndarray]:
    return np.arange(ex.n_pos), np.arange(ex.n_pos, len(ex))


def _finish(learner: _Learner, ex: ExampleSets, f: Formula, t0: float) -> LearnResult:
    learner.stats.wall_time = time.perf_counter() - t0
    sig = signature(f, ex)
    assert sig.recall() == 1, "learned formula misses a positive example"
    assert _above(sig.true_positives, sig.false_positives, learner.cfg.threshold), \
        "learned formula below the precision threshold"
    return LearnResult(f, learner.stats)


def inv_learn(ex: ExampleSets, cfg: LearnerConfig, atoms: Sequence[Atom], rng: random.Random) -> LearnResult:
    """Enumerative search on sub-samples, validated on the full sets.

    Raises :class:`LearningFailure` when the size bound, the work cap or
    the sub-sampling rounds run out.
    """
    if ex.n_pos < 1:
        raise ValueError("inv_learn needs at least one positive example")
    t0 = time.perf_counter()
    learner = _Learner(ex, cfg, atoms, rng)
    pidx, nidx = _indices(ex)
    try:
        f = learner.inv_learn(pidx, nidx)
    except LearningFailure as exc:
        exc.stats.wall_time = time.perf_counter() - t0
        raise
    return _finish(learner, ex, f, t0)


def decision_tree_learn(
    ex: ExampleSets,
    cfg: LearnerConfig,
    atoms: Sequence[Atom],
    rng: random.Random,
    depth: int = 0,
) -> LearnResult:
    """Learn a formula true on every positive with precision above delta."""
    if ex.n_pos < 1:
        raise ValueError("decision_tree_learn needs at least one positive example")
    t0 = time.perf_counter()
    learner = _Learner(ex, cfg, atoms, rng)
    pidx, nidx = _indices(ex)
    try:
        f = learner.tree(pidx, nidx, depth)
    except LearningFailure as exc:
        exc.stats.wall_time = time.perf_counter() - t0
        raise
    return _finish(learner, ex, f, t0)


__all__ = [
    "LearnResult",
    "LearnStats",
    "LearnerConfig",
    "LearningFailure",
    "decision_tree_learn",
    "dedup_by_signature",
    "inv_learn",
    "passes",
]
