"""Syntax tree for the modeling language.

Source locations are carried on every node but excluded from equality,
so two trees parsed from differently formatted text compare equal when
they have the same structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOWHERE = Loc(0, 0)


def _loc() -> Loc:
    return field(default=NOWHERE, compare=False, repr=False)


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: Loc = _loc()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    loc: Loc = _loc()


@dataclass(frozen=True)
class Name:
    """Bare identifier: a scalar variable or an enum label."""

    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Index:
    """Array element read ``name[index]``."""

    name: str
    index: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Pid:
    loc: Loc = _loc()


@dataclass(frozen=True)
class Unary:
    op: str  # "!" or "-"
    operand: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    loc: Loc = _loc()


Expr = Union[IntLit, BoolLit, Name, Index, Pid, Unary, Binary]
LValue = Union[Name, Index]


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    target: LValue
    value: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Guard:
    cond: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class Goto:
    label: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Label:
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Assert:
    cond: Expr
    loc: Loc = _loc()


Stmt = Union[Assign, Guard, Goto, Label, Assert]


# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class TypeSpec:
    kind: str  # "bool" | "byte" | "int" | "enum"
    lo: int = 0
    hi: int = 1
    labels: tuple[str, ...] = ()

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1

    @classmethod
    def bool_(cls) -> "TypeSpec":
        return cls("bool", 0, 1)

    @classmethod
    def byte(cls) -> "TypeSpec":
        return cls("byte", 0, 255)

    @classmethod
    def int_range(cls, lo: int, hi: int) -> "TypeSpec":
        return cls("int", lo, hi)

    @classmethod
    def enum(cls, labels: tuple[str, ...]) -> "TypeSpec":
        return cls("enum", 0, len(labels) - 1, tuple(labels))


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: TypeSpec
    length: Optional[int] = None  # None for scalars
    init: tuple[Expr, ...] = ()  # empty: default, one: broadcast, else per element
    loc: Loc = _loc()

    @property
    def is_array(self) -> bool:
        return self.length is not None

    @property
    def width(self) -> int:
        return 1 if self.length is None else self.length


@dataclass(frozen=True)
class ProcDecl:
    name: Optional[str]
    count: int
    body: tuple[Stmt, ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class Program:
    decls: tuple[VarDecl, ...]
    procs: tuple[ProcDecl, ...]
