"""Exhaustive breadth-first exploration and state-domain utilities."""

from __future__ import annotations

import random
from typing import Optional

import numpy as np

from ..lang.model import ProgramModel, state_space_size
from .semantics import initial_state, successors
from .state import ProgramState

DEFAULT_MAX_STATES = 2_000_000


class StateExplosionError(Exception):
    def __init__(self, count: int, partial: Optional[set] = None):
        super().__init__(f"state explosion: more than {count} states")
        self.count = count
        self.partial = partial


def _bfs(model: ProgramModel, k: Optional[int], max_states: int) -> tuple[set[ProgramState], int]:
    s0 = initial_state(model)
    seen = {s0}
    frontier = [s0]
    depth = 0
    while frontier and (k is None or depth < k):
        nxt = []
        for s in frontier:
            for t in successors(model, s):
                if t not in seen:
                    if len(seen) >= max_states:
                        raise StateExplosionError(max_states, seen)
                    seen.add(t)
                    nxt.append(t)
        if nxt:
            depth += 1
        frontier = nxt
    return seen, depth


def reach_k(model: ProgramModel, k: int, max_states: int = DEFAULT_MAX_STATES) -> set[ProgramState]:
    """States reachable with at most ``k`` transitions."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return _bfs(model, k, max_states)[0]


def reach_fixpoint(model: ProgramModel, max_states: int = DEFAULT_MAX_STATES) -> set[ProgramState]:
    """The full reachable set, as the least fixpoint of the successor map."""
    return _bfs(model, None, max_states)[0]


def diameter(model: ProgramModel, max_states: int = DEFAULT_MAX_STATES) -> int:
    """Largest BFS depth at which a new state first appears."""
    return _bfs(model, None, max_states)[1]


def random_state(model: ProgramModel, rng: random.Random) -> ProgramState:
    """Uniform draw from the full domain product; pcs range over statement
    positions of each process."""
    flat = [rng.randint(s.lo, s.hi) for s in model.slots]
    return ProgramState.from_flat(flat, model.n_procs)


def domain_matrix(model: ProgramModel, limit: int = DEFAULT_MAX_STATES) -> np.ndarray:
    """Every state of the domain product as rows of an ``(n, n_slots)`` array.

    Rows are in lexicographic order of the flat state tuple.
    """
    size = state_space_size(model)
    if size > limit:
        raise StateExplosionError(size)
    axes = [np.arange(s.lo, s.hi + 1, dtype=np.int32) for s in model.slots]
    if not axes:
        return np.zeros((1, 0), dtype=np.int32)
    grids = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.reshape(-1) for g in grids], axis=1)


def states_matrix(states, n_slots: int) -> np.ndarray:
    rows = [s.flat for s in states]
    if not rows:
        return np.zeros((0, n_slots), dtype=np.int32)
    return np.asarray(rows, dtype=np.int32)
