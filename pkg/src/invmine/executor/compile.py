"""Translate checked statements and predicates into Python callables.

Statements become functions ``vals -> vals | None`` (``None`` when a guard
blocks).  Predicates over full states become ``flat -> bool``; the same
predicates can also be evaluated column-wise over a numpy state matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..lang.ast import (
    Assert, Assign, Binary, BoolLit, Expr, Goto, Guard, Index, IntLit, Name,
    Pid, Stmt, Unary,
)
from ..lang.model import PC_NAME, ProgramModel
from ..lang.printer import format_expr


class RuntimeDomainError(Exception):
    """An assignment produced a value outside its variable's domain, or an
    array index fell outside the array."""

    def __init__(self, message: str, pid: Optional[int] = None, stmt: Optional[int] = None, state=None):
        super().__init__(message)
        self.pid = pid
        self.stmt = stmt
        self.state = state

    def __str__(self) -> str:
        where = "" if self.pid is None else f" (process {self.pid}, statement {self.stmt})"
        at = "" if self.state is None else f" in state {self.state.format(sep=',')}"
        return f"{self.args[0]}{where}{at}"


def _index_error(name: str, i: int, n: int):
    raise RuntimeDomainError(f"index {i} out of bounds for {name}[{n}]")


def _range_error(name: str, value: int, lo: int, hi: int):
    raise RuntimeDomainError(f"value {value} out of range [{lo}..{hi}] for {name}")


class _Codegen:
    """Emit Python source for expressions.

    ``base`` is where user variables start in the tuple named ``v``: 0 for
    process code (vals only), ``n_procs`` for predicates over flat states.
    """

    def __init__(self, model: ProgramModel, base: int, pid: Optional[int]):
        self.model = model
        self.base = base
        self.pid = pid

    def var_slot(self, name: str, index: Optional[Expr]) -> str:
        if name == PC_NAME:
            assert isinstance(index, IntLit) and self.base > 0
            return f"v[{index.value}]"
        d = self.model.var_decl[name]
        off = self.base + self.model.var_offset[name]
        if index is None:
            return f"v[{off}]"
        if isinstance(index, IntLit):
            return f"v[{off + index.value}]"
        i = self.num(index)
        return f"v[{off} + _ix({name!r}, {i}, {d.width})]"

    def num(self, e: Expr) -> str:
        if isinstance(e, IntLit):
            return str(e.value)
        if isinstance(e, BoolLit):
            return "1" if e.value else "0"
        if isinstance(e, Pid):
            return str(self.pid)
        if isinstance(e, Name):
            if e.name in self.model.enum_values:
                return str(self.model.enum_values[e.name][0])
            return self.var_slot(e.name, None)
        if isinstance(e, Index):
            return self.var_slot(e.name, e.index)
        if isinstance(e, Unary):
            if e.op == "-":
                return f"(-{self.num(e.operand)})"
            return f"int(not {self.cond(e.operand)})"
        if isinstance(e, Binary):
            if e.op in ("+", "-", "*"):
                return f"({self.num(e.left)} {e.op} {self.num(e.right)})"
            return f"int({self.cond(e)})"
        raise TypeError(e)

    def cond(self, e: Expr) -> str:
        if isinstance(e, BoolLit):
            return "True" if e.value else "False"
        if isinstance(e, Unary) and e.op == "!":
            return f"(not {self.cond(e.operand)})"
        if isinstance(e, Binary):
            op = e.op
            if op == "&&":
                return f"({self.cond(e.left)} and {self.cond(e.right)})"
            if op == "||":
                return f"({self.cond(e.left)} or {self.cond(e.right)})"
            if op == "->":
                return f"((not {self.cond(e.left)}) or {self.cond(e.right)})"
            if op == "<->":
                return f"(bool({self.cond(e.left)}) == bool({self.cond(e.right)}))"
            if op in ("==", "!=", "<", "<=", ">", ">="):
                return f"({self.num(e.left)} {op} {self.num(e.right)})"
        # bool-typed variable used as a condition
        return f"({self.num(e)} != 0)"


def _ix(name: str, i: int, n: int) -> int:
    if 0 <= i < n:
        return i
    _index_error(name, i, n)


_ENV = {"_ix": _ix, "_range_error": _range_error}


@dataclass(frozen=True)
class CompiledProcess:
    pid: int
    steps: tuple  # per pc: (function vals -> vals | None, next pc)
    terminal: int


def _compile_stmt(model: ProgramModel, pid: int, pos: int, s: Stmt, targets: dict) -> tuple[Callable, int]:
    g = _Codegen(model, 0, pid)
    if isinstance(s, Guard):
        src = f"lambda v: v if {g.cond(s.cond)} else None"
        nxt = pos + 1
    elif isinstance(s, Assert):
        return (lambda v: v), pos + 1
    elif isinstance(s, Goto):
        return (lambda v: v), targets[s.label]
    elif isinstance(s, Assign):
        target = s.target
        d = model.var_decl[target.name]
        off = model.var_offset[target.name]
        if isinstance(target, Name) or isinstance(target.index, IntLit):
            slot = str(off if isinstance(target, Name) else off + target.index.value)
        else:
            slot = f"{off} + _ix({target.name!r}, {g.num(target.index)}, {d.width})"
        value = g.num(s.value)
        lo, hi = d.type.lo, d.type.hi
        name = format_expr(target)
        src = (
            "def _f(v):\n"
            f"    x = {value}\n"
            f"    if not {lo} <= x <= {hi}:\n"
            f"        _range_error({name!r}, x, {lo}, {hi})\n"
            f"    i = {slot}\n"
            "    return v[:i] + (x,) + v[i + 1:]\n"
        )
        ns = dict(_ENV)
        exec(src, ns)
        return ns["_f"], pos + 1
    else:
        raise TypeError(s)
    return eval(src, dict(_ENV)), nxt


def compiled_processes(model: ProgramModel) -> tuple[CompiledProcess, ...]:
    cached = model._cache.get("processes")
    if cached is None:
        out = []
        for p in model.processes:
            steps = tuple(_compile_stmt(model, p.pid, pos, s, p.targets) for pos, s in enumerate(p.body))
            out.append(CompiledProcess(p.pid, steps, len(p.body)))
        cached = model._cache["processes"] = tuple(out)
    return cached


def compile_predicate(expr: Expr, model: ProgramModel) -> Callable[[tuple[int, ...]], bool]:
    """Compile a checked predicate into ``flat state tuple -> bool``."""
    g = _Codegen(model, model.n_procs, None)
    return eval(f"lambda v: bool({g.cond(expr)})", dict(_ENV))


# -- vectorized evaluation ----------------------------------------------------


def eval_predicate_array(expr: Expr, model: ProgramModel, X: np.ndarray) -> np.ndarray:
    """Evaluate a predicate on every row of a ``(n, n_slots)`` state matrix."""
    base = model.n_procs

    def column(name: str, index: Optional[Expr]) -> np.ndarray:
        if name == PC_NAME:
            return X[:, index.value]
        d = model.var_decl[name]
        off = base + model.var_offset[name]
        if index is None:
            return X[:, off]
        if isinstance(index, IntLit):
            return X[:, off + index.value]
        idx = num(index)
        if np.any((idx < 0) | (idx >= d.width)):
            raise RuntimeDomainError(f"index out of bounds for {d.name}[{d.width}]")
        block = X[:, off:off + d.width]
        return np.take_along_axis(block, idx.reshape(-1, 1).astype(np.intp), axis=1)[:, 0]

    def num(e: Expr) -> np.ndarray:
        if isinstance(e, IntLit):
            return np.full(len(X), e.value, dtype=np.int64)
        if isinstance(e, BoolLit):
            return np.full(len(X), int(e.value), dtype=np.int64)
        if isinstance(e, Name):
            if e.name in model.enum_values:
                return np.full(len(X), model.enum_values[e.name][0], dtype=np.int64)
            return column(e.name, None).astype(np.int64)
        if isinstance(e, Index):
            return column(e.name, e.index).astype(np.int64)
        if isinstance(e, Unary):
            if e.op == "-":
                return -num(e.operand)
            return (~cond(e.operand)).astype(np.int64)
        if isinstance(e, Binary):
            if e.op == "+":
                return num(e.left) + num(e.right)
            if e.op == "-":
                return num(e.left) - num(e.right)
            if e.op == "*":
                return num(e.left) * num(e.right)
            return cond(e).astype(np.int64)
        raise TypeError(e)

    def cond(e: Expr) -> np.ndarray:
        if isinstance(e, BoolLit):
            return np.full(len(X), e.value, dtype=bool)
        if isinstance(e, Unary) and e.op == "!":
            return ~cond(e.operand)
        if isinstance(e, Binary):
            op = e.op
            if op == "&&":
                return cond(e.left) & cond(e.right)
            if op == "||":
                return cond(e.left) | cond(e.right)
            if op == "->":
                return ~cond(e.left) | cond(e.right)
            if op == "<->":
                return cond(e.left) == cond(e.right)
            a, b = num(e.left), num(e.right)
            return {
                "==": np.equal, "!=": np.not_equal, "<": np.less,
                "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal,
            }[op](a, b)
        return num(e) != 0

    return cond(expr)
