"""Mine candidate invariants of concurrent models from sampled executions."""

__version__ = "0.1.0"
