"""Atoms, Boolean formulas over them, and bit-vector signatures.

A signature packs a formula's truth values over an ordered example list
into a Python int: bit ``i`` is set iff example ``i`` satisfies the
formula.  Positives come first, then negatives.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .executor.state import ProgramState
from .lang.model import ProgramModel, Slot


class Shape(str, enum.Enum):
    LEQ_CONST = "LEQ_CONST"
    GEQ_CONST = "GEQ_CONST"
    EQ_CONST = "EQ_CONST"
    NEQ_CONST = "NEQ_CONST"
    EQ_VARVAR = "EQ_VARVAR"
    NEQ_VARVAR = "NEQ_VARVAR"
    LEQ_VARVAR = "LEQ_VARVAR"

    @property
    def binary(self) -> bool:
        return self.name.endswith("VARVAR")


CONST_SHAPES = (Shape.LEQ_CONST, Shape.GEQ_CONST, Shape.EQ_CONST, Shape.NEQ_CONST)
ALL_SHAPES = tuple(Shape)


@dataclass(frozen=True)
class AtomTemplate:
    """A parametric predicate shape.  ``variables`` restricts which slots it
    is instantiated over; ``None`` means every alphabet variable."""

    shape: Shape
    variables: Optional[tuple[str, ...]] = None


def default_templates() -> list[AtomTemplate]:
    return [AtomTemplate(s) for s in ALL_SHAPES]


def parse_templates(text: str) -> list[AtomTemplate]:
    """Read a template file: one ``SHAPE [var ...]`` per line, ``#`` comments."""
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, *names = line.split()
        try:
            shape = Shape(head.upper())
        except ValueError:
            raise ValueError(f"line {lineno}: unknown atom template {head!r}") from None
        out.append(AtomTemplate(shape, tuple(names) or None))
    return out


# -- formula AST --------------------------------------------------------------

_OP_RANK = {"==": 0, "<=": 1, ">=": 2, "!=": 3}
_NP_OPS = {
    "==": np.equal, "!=": np.not_equal, "<=": np.less_equal, ">=": np.greater_equal,
}
_PY_OPS = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Atom:
    """``slot op const``, ``slot op slot``, or a constant truth value.

    ``op`` is one of ``== != <= >=``, or ``true``/``false`` for constants.
    """

    op: str
    left: int = -1
    right: int = -1  # slot index for var-var atoms
    const: Optional[int] = None
    text: str = field(default="", compare=False)

    def __len__(self) -> int:
        return 1

    @classmethod
    def true(cls) -> "Atom":
        return cls("true", text="true")

    @classmethod
    def false(cls) -> "Atom":
        return cls("false", text="false")

    @property
    def is_constant(self) -> bool:
        return self.op in ("true", "false")

    def sort_key(self) -> tuple:
        if self.is_constant:
            return (-1, self.op == "true", 0, 0)
        return (self.left, _OP_RANK[self.op], self.right, -1 if self.const is None else self.const)

    def eval(self, flat: Sequence[int]) -> bool:
        if self.op == "true":
            return True
        if self.op == "false":
            return False
        b = flat[self.right] if self.const is None else self.const
        return _PY_OPS[self.op](flat[self.left], b)

    def eval_array(self, X: np.ndarray) -> np.ndarray:
        if self.is_constant:
            return np.full(len(X), self.op == "true", dtype=bool)
        b = X[:, self.right] if self.const is None else self.const
        return _NP_OPS[self.op](X[:, self.left], b)

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Not:
    arg: "Formula"
    size: int = field(default=0, compare=False, repr=False)
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "size", 1 + len(self.arg))
        object.__setattr__(self, "_hash", hash(("!", self.arg)))

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return self.size

    def eval(self, flat) -> bool:
        return not self.arg.eval(flat)

    def eval_array(self, X):
        return ~self.arg.eval_array(X)

    def __str__(self) -> str:
        return f"!({self.arg})"


@dataclass(frozen=True)
class _BinaryFormula:
    left: "Formula"
    right: "Formula"
    size: int = field(default=0, compare=False, repr=False)
    _hash: int = field(default=0, compare=False, repr=False)

    symbol = "?"

    def __post_init__(self):
        object.__setattr__(self, "size", 1 + len(self.left) + len(self.right))
        # formulas are hashed constantly as signature-cache keys
        object.__setattr__(self, "_hash", hash((self.symbol, self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return self.size

    def __str__(self) -> str:
        return f"({self.left} {self.symbol} {self.right})"


@dataclass(frozen=True, eq=False)
class And(_BinaryFormula):
    symbol = "&&"

    def eval(self, flat) -> bool:
        return self.left.eval(flat) and self.right.eval(flat)

    def eval_array(self, X):
        return self.left.eval_array(X) & self.right.eval_array(X)


@dataclass(frozen=True, eq=False)
class Or(_BinaryFormula):
    symbol = "||"

    def eval(self, flat) -> bool:
        return self.left.eval(flat) or self.right.eval(flat)

    def eval_array(self, X):
        return self.left.eval_array(X) | self.right.eval_array(X)


@dataclass(frozen=True, eq=False)
class Implies(_BinaryFormula):
    symbol = "->"

    def eval(self, flat) -> bool:
        return (not self.left.eval(flat)) or self.right.eval(flat)

    def eval_array(self, X):
        return ~self.left.eval_array(X) | self.right.eval_array(X)


@dataclass(frozen=True, eq=False)
class Iff(_BinaryFormula):
    symbol = "<->"

    def eval(self, flat) -> bool:
        return self.left.eval(flat) == self.right.eval(flat)

    def eval_array(self, X):
        return self.left.eval_array(X) == self.right.eval_array(X)


Formula = Union[Atom, Not, And, Or, Implies, Iff]
BINARY_OPS = (And, Or, Implies, Iff)
TRUE = Atom.true()
FALSE = Atom.false()


def canonical_text(f: Formula) -> str:
    """Infix rendering, fully parenthesized, parseable as a model predicate."""
    return str(f)


def eval(f: Formula, s: Union[ProgramState, Sequence[int]]) -> bool:  # noqa: A001
    flat = s.flat if isinstance(s, ProgramState) else s
    return f.eval(flat)


def subformulas(f: Formula):
    yield f
    if isinstance(f, Not):
        yield from subformulas(f.arg)
    elif isinstance(f, _BinaryFormula):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


# -- atom instantiation -------------------------------------------------------


def _resolve_alphabet(model: ProgramModel, alphabet: Optional[Iterable[str]]) -> list[int]:
    if alphabet is None:
        return [i for i, s in enumerate(model.slots) if not s.is_pc]
    chosen: set[int] = set()
    for name in alphabet:
        name = name.strip()
        if name in model.slot_index:
            chosen.add(model.slot_index[name])
            continue
        matches = [i for i, s in enumerate(model.slots) if s.var == name]
        if not matches:
            raise ValueError(f"unknown alphabet variable {name!r}")
        chosen.update(matches)
    if not chosen:
        raise ValueError("empty alphabet")
    return sorted(chosen)


def _atom_text(slot: Slot, op: str, value: int) -> str:
    return f"{slot.name} {op} {slot.render(value)}"


def _const_atom(i: int, slot: Slot, satisfied: frozenset) -> Optional[Atom]:
    """Normal form of a one-variable atom, from the set of domain values that
    satisfy it.  Trivial (always/never true) atoms give ``None``."""
    n = slot.size
    if not satisfied or len(satisfied) == n:
        return None
    lo, hi = slot.lo, slot.hi
    if len(satisfied) == 1:
        (c,) = satisfied
        return Atom("==", i, const=c, text=_atom_text(slot, "==", c))
    if len(satisfied) == n - 1:
        (c,) = set(range(lo, hi + 1)) - satisfied
        return Atom("!=", i, const=c, text=_atom_text(slot, "!=", c))
    if min(satisfied) == lo and max(satisfied) - lo + 1 == len(satisfied):
        c = max(satisfied)
        return Atom("<=", i, const=c, text=_atom_text(slot, "<=", c))
    c = min(satisfied)
    return Atom(">=", i, const=c, text=_atom_text(slot, ">=", c))


def instantiate_atoms(
    model: ProgramModel,
    P: Sequence[ProgramState],
    templates: Optional[Sequence[AtomTemplate]] = None,
    alphabet: Optional[Iterable[str]] = None,
) -> list[Atom]:
    """Concrete atoms for every template over the alphabet.

    Constants range over the values each variable takes in ``P`` plus its
    domain bounds.  Atoms are put in a domain-aware normal form, deduplicated
    and returned in canonical order.
    """
    templates = default_templates() if templates is None else list(templates)
    slots = _resolve_alphabet(model, alphabet)
    observed: dict[int, set[int]] = {i: set() for i in slots}
    for s in P:
        flat = s.flat
        for i in slots:
            observed[i].add(flat[i])

    atoms: dict[Atom, None] = {}
    for t in templates:
        members = slots if t.variables is None else _resolve_alphabet(model, t.variables)
        members = [i for i in members if i in observed]
        if not t.shape.binary:
            for i in members:
                slot = model.slots[i]
                ordered = slot.kind != "enum"
                if t.shape in (Shape.LEQ_CONST, Shape.GEQ_CONST) and not ordered:
                    continue
                domain = range(slot.lo, slot.hi + 1)
                for c in sorted(observed[i] | {slot.lo, slot.hi}):
                    if t.shape == Shape.LEQ_CONST:
                        sat = frozenset(v for v in domain if v <= c)
                    elif t.shape == Shape.GEQ_CONST:
                        sat = frozenset(v for v in domain if v >= c)
                    elif t.shape == Shape.EQ_CONST:
                        sat = frozenset((c,))
                    else:
                        sat = frozenset(v for v in domain if v != c)
                    a = _const_atom(i, slot, sat)
                    if a is not None:
                        atoms.setdefault(a)
        else:
            for x in members:
                for y in members:
                    if x == y:
                        continue
                    sx, sy = model.slots[x], model.slots[y]
                    if sx.compat_key() != sy.compat_key():
                        continue
                    if t.shape == Shape.LEQ_VARVAR:
                        if sx.kind == "enum":
                            continue
                        atoms.setdefault(Atom("<=", x, y, text=f"{sx.name} <= {sy.name}"))
                    elif x < y:
                        op = "==" if t.shape == Shape.EQ_VARVAR else "!="
                        atoms.setdefault(Atom(op, x, y, text=f"{sx.name} {op} {sy.name}"))
    return sorted(atoms, key=Atom.sort_key)


# -- examples and signatures --------------------------------------------------


class ExampleSets:
    """Ordered positive and negative examples for one learning round."""

    def __init__(self, P: Iterable[ProgramState], N: Iterable[ProgramState]):
        self.P = tuple(P)
        self.N = tuple(N)
        if set(self.P) & set(self.N):
            raise ValueError("positive and negative examples overlap")
        self._matrix: Optional[np.ndarray] = None

    @property
    def n_pos(self) -> int:
        return len(self.P)

    @property
    def n_neg(self) -> int:
        return len(self.N)

    def __len__(self) -> int:
        return len(self.P) + len(self.N)

    def examples(self) -> tuple[ProgramState, ...]:
        return self.P + self.N

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            rows = [s.flat for s in self.examples()]
            width = len(rows[0]) if rows else 0
            self._matrix = np.asarray(rows, dtype=np.int64).reshape(len(rows), width)
        return self._matrix


def bits_from_bools(values: np.ndarray) -> int:
    """Pack a boolean vector into an int, element ``i`` at bit ``i``."""
    if len(values) == 0:
        return 0
    packed = np.packbits(np.asarray(values, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


@lru_cache(maxsize=65536)
def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


@dataclass(frozen=True)
class Signature:
    bits: int
    n_pos: int
    n_neg: int

    @property
    def width(self) -> int:
        return self.n_pos + self.n_neg

    @property
    def pos_mask(self) -> int:
        return (1 << self.n_pos) - 1

    @property
    def neg_mask(self) -> int:
        return ((1 << self.width) - 1) ^ self.pos_mask

    def _like(self, bits: int) -> "Signature":
        return Signature(bits & ((1 << (self.n_pos + self.n_neg)) - 1), self.n_pos, self.n_neg)

    def __invert__(self) -> "Signature":
        return self._like(~self.bits)

    def __and__(self, other: "Signature") -> "Signature":
        return self._like(self.bits & other.bits)

    def __or__(self, other: "Signature") -> "Signature":
        return self._like(self.bits | other.bits)

    def __xor__(self, other: "Signature") -> "Signature":
        return self._like(self.bits ^ other.bits)

    def implies(self, other: "Signature") -> "Signature":
        return self._like(~self.bits | other.bits)

    def iff(self, other: "Signature") -> "Signature":
        return self._like(~(self.bits ^ other.bits))

    def __getitem__(self, i: int) -> int:
        return (self.bits >> i) & 1

    def to_list(self) -> list[int]:
        return [self[i] for i in range(self.width)]

    @property
    def true_positives(self) -> int:
        return (self.bits & self.pos_mask).bit_count()

    @property
    def false_positives(self) -> int:
        return (self.bits & self.neg_mask).bit_count()

    def precision(self) -> Fraction:
        # bits never exceed the width, so everything set is tp or fp
        return _ratio(self.true_positives, self.bits.bit_count())

    def recall(self) -> Fraction:
        if self.n_pos == 0:
            raise ValueError("recall is undefined without positive examples")
        return _ratio(self.true_positives, self.n_pos)

    def __str__(self) -> str:
        return "".join(str(b) for b in self.to_list())


def signature(
    f: Formula,
    ex: ExampleSets,
    cache: Optional[dict] = None,
) -> Signature:
    """Signature of ``f`` over ``ex``.

    Atom signatures are evaluated directly; composite ones are built
    bitwise from their children, reusing (and filling) ``cache``.
    """
    if cache is None:
        cache = {}
    hit = cache.get(f)
    if hit is not None:
        return hit
    kind = type(f)
    if kind is Atom:
        sig = Signature(bits_from_bools(f.eval_array(ex.matrix)) if len(ex) else 0, ex.n_pos, ex.n_neg)
    elif kind is Not:
        sig = ~signature(f.arg, ex, cache)
    else:
        sig = _COMBINE[kind](signature(f.left, ex, cache), signature(f.right, ex, cache))
    cache[f] = sig
    return sig


_COMBINE = {
    And: Signature.__and__,
    Or: Signature.__or__,
    Implies: Signature.implies,
    Iff: Signature.iff,
}


def direct_signature(f: Formula, ex: ExampleSets) -> Signature:
    """Signature by evaluating ``f`` on each example, one at a time."""
    bits = 0
    for i, s in enumerate(ex.examples()):
        if f.eval(s.flat):
            bits |= 1 << i
    return Signature(bits, ex.n_pos, ex.n_neg)


def precision(f: Formula, ex: ExampleSets, cache: Optional[dict] = None) -> Fraction:
    """Fraction of satisfying examples that are positive; 0 if none satisfy."""
    return signature(f, ex, cache).precision()


def recall(f: Formula, ex: ExampleSets, cache: Optional[dict] = None) -> Fraction:
    if ex.n_pos == 0:
        raise ValueError("recall is undefined without positive examples")
    return signature(f, ex, cache).recall()


def count_based_scores(f: Formula, ex: ExampleSets) -> tuple[Fraction, Optional[Fraction]]:
    """Precision and recall straight from the set definitions."""
    tp = sum(1 for s in ex.P if f.eval(s.flat))
    fp = sum(1 for s in ex.N if f.eval(s.flat))
    rec = Fraction(tp, len(ex.P)) if ex.P else None
    return _ratio(tp, tp + fp), rec
