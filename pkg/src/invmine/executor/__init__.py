"""Interleaving semantics, trace sampling and exhaustive reachability."""

from .compile import RuntimeDomainError, compile_predicate, eval_predicate_array
from .explore import (
    DEFAULT_MAX_STATES,
    StateExplosionError,
    diameter,
    domain_matrix,
    random_state,
    reach_fixpoint,
    reach_k,
    states_matrix,
)
from .semantics import dump_trace, enabled_transitions, initial_state, load_trace, sample_trace, successors
from .state import UNIFORM, ProgramState, SchedulerPolicy, Trace, Transition

__all__ = [
    "DEFAULT_MAX_STATES",
    "ProgramState",
    "RuntimeDomainError",
    "SchedulerPolicy",
    "StateExplosionError",
    "Trace",
    "Transition",
    "UNIFORM",
    "compile_predicate",
    "diameter",
    "domain_matrix",
    "dump_trace",
    "enabled_transitions",
    "eval_predicate_array",
    "initial_state",
    "load_trace",
    "random_state",
    "reach_fixpoint",
    "reach_k",
    "sample_trace",
    "states_matrix",
    "successors",
]
