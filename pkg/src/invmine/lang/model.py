"""Static checking and the validated :class:`ProgramModel`."""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Optional

from .ast import (
    Assert, Assign, Binary, BoolLit, Expr, Goto, Guard, Index, IntLit, Label,
    Name, Pid, ProcDecl, Program, Stmt, TypeSpec, Unary, VarDecl,
)
from .errors import ModelError
from .parser import parse_expr, parse_program

PC_NAME = "_pc"

# Expression sorts.  "bool" is a bool-typed variable or literal: it can be used
# both as a number (0/1) and as a condition.
NUM, COND, BOOL = "num", "cond", "bool"

_ARITH = {"+", "-", "*"}
_ORDER = {"<", "<=", ">", ">="}
_EQUALITY = {"==", "!="}
_LOGIC = {"&&", "||", "->", "<->"}


@dataclass(frozen=True)
class Slot:
    """One component of the flattened state vector."""

    name: str  # display name, e.g. "turn", "flag[1]", "_pc[0]"
    var: str  # declared variable (or "_pc")
    index: Optional[int]
    lo: int
    hi: int
    kind: str  # "bool" | "byte" | "int" | "enum" | "pc"
    labels: tuple[str, ...] = ()
    group: str = ""  # pc slots: the proc block they belong to

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @property
    def is_pc(self) -> bool:
        return self.kind == "pc"

    def compat_key(self) -> str:
        """Slots with equal keys may be compared with each other."""
        if self.kind == "enum":
            return "enum:" + ",".join(self.labels)
        if self.kind == "pc":
            return "pc:" + self.group
        return "num"

    def render(self, value: int) -> str:
        if self.kind == "enum":
            return self.labels[value]
        return str(value)


@dataclass(frozen=True)
class Process:
    pid: int
    block: int  # index into ProgramModel.procs
    name: str
    body: tuple[Stmt, ...]  # executable statements only (labels removed)
    targets: dict  # label -> statement position

    @property
    def pc_size(self) -> int:
        # every statement position plus the terminal position
        return len(self.body) + 1


class ProgramModel:
    """A type-checked program together with its state layout.

    The state vector is ``pcs + vals``: one program counter per process,
    followed by the user variables flattened in declaration order (arrays
    elementwise).
    """

    def __init__(self, program: Program, processes: list[Process], init_vals: tuple[int, ...]):
        self.program = program
        self.processes = tuple(processes)
        self.init_vals = init_vals
        self.decls = program.decls
        self.procs = program.procs
        self.var_types: dict[str, TypeSpec] = {d.name: d.type for d in self.decls}
        self.var_decl: dict[str, VarDecl] = {d.name: d for d in self.decls}
        self.enum_values: dict[str, tuple[int, TypeSpec]] = {}
        for d in self.decls:
            if d.type.kind == "enum":
                for i, label in enumerate(d.type.labels):
                    self.enum_values[label] = (i, d.type)

        self.var_offset: dict[str, int] = {}
        slots: list[Slot] = []
        for p in self.processes:
            slots.append(Slot(f"{PC_NAME}[{p.pid}]", PC_NAME, p.pid, 0, p.pc_size - 1, "pc",
                              group=p.name))
        offset = 0
        for d in self.decls:
            self.var_offset[d.name] = offset
            offset += d.width
            for i in range(d.width):
                name = d.name if d.length is None else f"{d.name}[{i}]"
                slots.append(Slot(name, d.name, None if d.length is None else i,
                                  d.type.lo, d.type.hi, d.type.kind, d.type.labels))
        self.slots = tuple(slots)
        self.slot_index = {s.name: i for i, s in enumerate(self.slots)}
        self._cache: dict = {}

    @property
    def n_procs(self) -> int:
        return len(self.processes)

    @property
    def n_vals(self) -> int:
        return len(self.init_vals)

    @property
    def data_slots(self) -> list[str]:
        return [s.name for s in self.slots if not s.is_pc]

    def pc_sizes(self) -> tuple[int, ...]:
        return tuple(p.pc_size for p in self.processes)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ProgramModel) and self.program == other.program

    def __hash__(self) -> int:
        return hash(self.program)

    def __repr__(self) -> str:
        return f"ProgramModel(vars={[d.name for d in self.decls]}, N={self.n_procs})"


def state_space_size(model: ProgramModel) -> int:
    """Number of total valuations: every data domain times every pc domain."""
    return prod(s.size for s in model.slots)


# -- checking ----------------------------------------------------------------


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.types: dict[str, VarDecl] = {}
        self.enum_labels: dict[str, TypeSpec] = {}

    def declarations(self) -> None:
        for d in self.program.decls:
            if d.name in self.types or d.name in self.enum_labels or d.name.startswith("_"):
                raise ModelError("duplicate", f"duplicate declaration of {d.name!r}", d.loc)
            if d.type.kind == "enum":
                if len(set(d.type.labels)) != len(d.type.labels):
                    raise ModelError("duplicate", "duplicate enum label", d.loc)
                for label in d.type.labels:
                    known = self.enum_labels.get(label)
                    if label in self.types or (known is not None and known != d.type):
                        raise ModelError("duplicate", f"duplicate declaration of {label!r}", d.loc)
                    self.enum_labels[label] = d.type
            self.types[d.name] = d
        for label in self.enum_labels:
            if label in self.types:
                loc = self.types[label].loc
                raise ModelError("duplicate", f"duplicate declaration of {label!r}", loc)

    def init_values(self) -> tuple[int, ...]:
        vals: list[int] = []
        for d in self.program.decls:
            if d.init and len(d.init) not in (1, d.width):
                raise ModelError("type", f"initializer of {d.name!r} has {len(d.init)} values, "
                                 f"expected 1 or {d.width}", d.loc)
            items = [self.const_value(e, d) for e in d.init] or [d.type.lo]
            if len(items) == 1:
                items = items * d.width
            vals.extend(items)
        return tuple(vals)

    def const_value(self, e: Expr, d: VarDecl) -> int:
        if isinstance(e, IntLit):
            value = e.value
            if d.type.kind == "enum":
                raise ModelError("type", f"type mismatch: integer initializer for enum {d.name!r}", e.loc)
        elif isinstance(e, BoolLit):
            value = int(e.value)
            if d.type.kind == "enum":
                raise ModelError("type", f"type mismatch: bool initializer for enum {d.name!r}", e.loc)
        elif isinstance(e, Name) and e.name in self.enum_labels:
            if d.type.kind != "enum" or e.name not in d.type.labels:
                raise ModelError("type", f"type mismatch: {e.name!r} is not a value of {d.name!r}", e.loc)
            value = d.type.labels.index(e.name)
        else:
            raise ModelError("type", f"initializer of {d.name!r} must be a constant", getattr(e, "loc", None))
        if not d.type.lo <= value <= d.type.hi:
            raise ModelError("range", f"initial value {value} out of range for {d.name!r}", e.loc)
        return value

    # Sorts: NUM, COND, BOOL, or ("enum", labels)
    def sort_of(self, e: Expr, *, allow_pid: bool, pc_sizes: Optional[tuple[int, ...]] = None):
        def rec(x: Expr):
            if isinstance(x, IntLit):
                return NUM
            if isinstance(x, BoolLit):
                return BOOL
            if isinstance(x, Pid):
                if not allow_pid:
                    raise ModelError("unknown-variable", "_pid is only defined inside a process", x.loc)
                return NUM
            if isinstance(x, Name):
                if x.name in self.enum_labels:
                    return ("enum", self.enum_labels[x.name].labels)
                d = self.types.get(x.name)
                if d is None:
                    raise ModelError("unknown-variable", f"unknown variable {x.name!r}", x.loc)
                if d.is_array:
                    raise ModelError("type", f"array {x.name!r} used without an index", x.loc)
                return self.var_sort(d.type)
            if isinstance(x, Index):
                if x.name == PC_NAME and pc_sizes is not None:
                    if not isinstance(x.index, IntLit) or not 0 <= x.index.value < len(pc_sizes):
                        raise ModelError("range", "program counter index must be a constant process id", x.loc)
                    return NUM
                d = self.types.get(x.name)
                if d is None:
                    raise ModelError("unknown-variable", f"unknown variable {x.name!r}", x.loc)
                if not d.is_array:
                    raise ModelError("type", f"scalar {x.name!r} cannot be indexed", x.loc)
                if not self.is_num(rec(x.index)):
                    raise ModelError("type", f"type mismatch: index of {x.name!r} must be an integer", x.loc)
                if isinstance(x.index, IntLit) and not 0 <= x.index.value < d.width:
                    raise ModelError("range", f"index {x.index.value} out of bounds for {x.name!r}", x.loc)
                return self.var_sort(d.type)
            if isinstance(x, Unary):
                s = rec(x.operand)
                if x.op == "!":
                    if not self.is_cond(s):
                        raise ModelError("type", "type mismatch: '!' needs a condition", x.loc)
                    return COND
                if not self.is_num(s):
                    raise ModelError("type", "type mismatch: unary '-' needs an integer", x.loc)
                return NUM
            if isinstance(x, Binary):
                a, b = rec(x.left), rec(x.right)
                if x.op in _ARITH:
                    if not (self.is_num(a) and self.is_num(b)):
                        raise ModelError("type", f"type mismatch: operands of {x.op!r} must be integers", x.loc)
                    return NUM
                if x.op in _ORDER:
                    if not (self.is_num(a) and self.is_num(b)):
                        raise ModelError("type", f"type mismatch: operands of {x.op!r} must be integers", x.loc)
                    return COND
                if x.op in _EQUALITY:
                    if isinstance(a, tuple) or isinstance(b, tuple):
                        if a != b:
                            raise ModelError("type", f"type mismatch in {x.op!r}", x.loc)
                    elif not ((self.is_num(a) and self.is_num(b)) or (self.is_cond(a) and self.is_cond(b))):
                        raise ModelError("type", f"type mismatch in {x.op!r}", x.loc)
                    return COND
                if x.op in _LOGIC:
                    if not (self.is_cond(a) and self.is_cond(b)):
                        raise ModelError("type", f"type mismatch: operands of {x.op!r} must be conditions", x.loc)
                    return COND
            raise ModelError("type", f"unsupported expression {x!r}")

        return rec(e)

    @staticmethod
    def var_sort(t: TypeSpec):
        if t.kind == "bool":
            return BOOL
        if t.kind == "enum":
            return ("enum", t.labels)
        return NUM

    @staticmethod
    def is_num(s) -> bool:
        return s in (NUM, BOOL)

    @staticmethod
    def is_cond(s) -> bool:
        return s in (COND, BOOL)

    def check_cond(self, e: Expr, what: str) -> None:
        if not self.is_cond(self.sort_of(e, allow_pid=True)):
            raise ModelError("type", f"type mismatch: {what} must be a condition", e.loc)

    def process(self, block: int, proc: ProcDecl, pid: int) -> Process:
        targets: dict[str, int] = {}
        body: list[Stmt] = []
        for s in proc.body:
            if isinstance(s, Label):
                if s.name in targets:
                    raise ModelError("duplicate", f"duplicate label {s.name!r}", s.loc)
                targets[s.name] = len(body)
            else:
                body.append(s)
        for s in body:
            if isinstance(s, Goto):
                if s.label not in targets:
                    raise ModelError("goto", f"unresolved goto label {s.label!r}", s.loc)
            elif isinstance(s, (Guard, Assert)):
                self.check_cond(s.cond, "guard" if isinstance(s, Guard) else "assertion")
            elif isinstance(s, Assign):
                self.check_assign(s)
        name = proc.name if proc.name is not None else f"proc{block}"
        return Process(pid, block, name, tuple(body), targets)

    def check_assign(self, s: Assign) -> None:
        target_sort = self.sort_of(s.target, allow_pid=True)
        if isinstance(s.target, Name) and s.target.name in self.enum_labels:
            raise ModelError("type", f"cannot assign to enum label {s.target.name!r}", s.loc)
        value_sort = self.sort_of(s.value, allow_pid=True)
        if isinstance(target_sort, tuple) or isinstance(value_sort, tuple):
            ok = target_sort == value_sort
        elif target_sort == BOOL:
            ok = True
        else:
            ok = self.is_num(value_sort)
        if not ok:
            raise ModelError("type", "type mismatch in assignment", s.loc)


def check_program(program: Program) -> ProgramModel:
    c = _Checker(program)
    c.declarations()
    init = c.init_values()
    processes: list[Process] = []
    for block, proc in enumerate(program.procs):
        for _ in range(proc.count):
            processes.append(c.process(block, proc, len(processes)))
    return ProgramModel(program, processes, init)


def parse(source: str) -> ProgramModel:
    """Parse and type-check a model.  Raises :class:`ModelError`."""
    return check_program(parse_program(source))


def parse_formula(text: str, model: ProgramModel) -> Expr:
    """Parse a state predicate over ``model``'s variables.

    Unlike process code, predicates may mention program counters as
    ``_pc[i]`` but not ``_pid``.
    """
    e = parse_expr(text)
    c = _Checker(model.program)
    c.declarations()
    s = c.sort_of(e, allow_pid=False, pc_sizes=model.pc_sizes())
    if not c.is_cond(s):
        raise ModelError("type", "type mismatch: invariant must be a condition", getattr(e, "loc", None))
    return e
