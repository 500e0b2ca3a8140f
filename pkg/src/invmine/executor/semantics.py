from __future__ import annotations

import random
from pathlib import Path
from typing import Iterator, Optional

from ..lang.model import ProgramModel
from .compile import RuntimeDomainError, compiled_processes
from .state import UNIFORM, ProgramState, SchedulerPolicy, Trace, Transition


def initial_state(model: ProgramModel) -> ProgramState:
    return ProgramState((0,) * model.n_procs, model.init_vals)


def _moves(model: ProgramModel, s: ProgramState) -> Iterator[tuple[int, int, ProgramState]]:
    for proc in compiled_processes(model):
        pc = s.pcs[proc.pid]
        if pc >= proc.terminal:
            continue
        fn, nxt = proc.steps[pc]
        try:
            vals = fn(s.vals)
        except RuntimeDomainError as exc:
            raise RuntimeDomainError(exc.args[0], proc.pid, pc, s) from None
        if vals is None:
            continue
        pcs = s.pcs[:proc.pid] + (nxt,) + s.pcs[proc.pid + 1:]
        yield proc.pid, pc, ProgramState(pcs, vals)


def enabled_transitions(model: ProgramModel, s: ProgramState) -> list[Transition]:
    """One transition per process that can move from ``s``, by process index."""
    return [Transition(s, dst, (pid, pc)) for pid, pc, dst in _moves(model, s)]


def successors(model: ProgramModel, s: ProgramState) -> list[ProgramState]:
    return [dst for _, _, dst in _moves(model, s)]


def sample_trace(
    model: ProgramModel,
    k: int,
    policy: Optional[SchedulerPolicy] = None,
    rng: Optional[random.Random] = None,
    seed: Optional[int] = None,
) -> Trace:
    """Run the scheduler for up to ``k`` steps from the initial state.

    The trace stops early at a state with no enabled transition.  Pass
    either an ``rng`` (the caller owns the stream) or a ``seed``.
    """
    if k < 0:
        raise ValueError("trace length must be >= 0")
    policy = policy or UNIFORM
    if rng is None:
        rng = random.Random(seed)
    s = initial_state(model)
    states = [s]
    for _ in range(k):
        ts = enabled_transitions(model, s)
        if not ts:
            break
        s = policy.choose(ts, rng).dst
        states.append(s)
    return Trace(tuple(states), seed)


def dump_trace(trace: Trace, path: Path) -> None:
    """Write one state per line as a tab-separated canonical tuple."""
    Path(path).write_text("".join(s.format() + "\n" for s in trace.states))


def load_trace(path: Path, n_procs: int) -> Trace:
    states = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            states.append(ProgramState.from_flat([int(x) for x in line.split("\t")], n_procs))
    return Trace(tuple(states))
