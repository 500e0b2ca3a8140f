from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence


class ProgramState(NamedTuple):
    """Program counters plus the flattened user-variable valuation.

    Ordering and hashing are the tuple ones, so states sort by pcs first
    and then by variables in declaration order.
    """

    pcs: tuple[int, ...]
    vals: tuple[int, ...]

    @property
    def flat(self) -> tuple[int, ...]:
        return self.pcs + self.vals

    @classmethod
    def from_flat(cls, flat: Sequence[int], n_procs: int) -> "ProgramState":
        flat = tuple(int(x) for x in flat)
        return cls(flat[:n_procs], flat[n_procs:])

    def format(self, sep: str = "\t") -> str:
        return sep.join(str(x) for x in self.flat)


class Transition(NamedTuple):
    src: ProgramState
    dst: ProgramState
    label: tuple[int, int]  # (process index, statement position)


@dataclass(frozen=True)
class Trace:
    states: tuple[ProgramState, ...]
    seed: Optional[int] = None

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def state_set(self) -> set[ProgramState]:
        return set(self.states)


@dataclass(frozen=True)
class SchedulerPolicy:
    """How the scheduler picks among enabled processes.

    ``weights`` is indexed by process id; ``None`` means uniform over the
    enabled transitions.
    """

    weights: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.weights is not None and any(w <= 0 for w in self.weights):
            raise ValueError("scheduler weights must be positive")

    @property
    def kind(self) -> str:
        return "uniform" if self.weights is None else "weighted"

    @classmethod
    def uniform(cls) -> "SchedulerPolicy":
        return cls()

    @classmethod
    def weighted(cls, weights: Sequence[float]) -> "SchedulerPolicy":
        return cls(tuple(float(w) for w in weights))

    def choose(self, transitions: Sequence[Transition], rng: random.Random) -> Transition:
        if self.weights is None:
            return transitions[rng.randrange(len(transitions))]
        ws = [self.weights[t.label[0]] for t in transitions]
        return rng.choices(transitions, weights=ws)[0]


UNIFORM = SchedulerPolicy()
