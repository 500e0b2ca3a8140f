"""Recursive-descent parser producing an unchecked :class:`Program`."""

from __future__ import annotations

from typing import Optional

from .ast import (
    Assert, Assign, Binary, BoolLit, Expr, Goto, Guard, Index, IntLit, Label,
    Loc, Name, Pid, ProcDecl, Program, Stmt, TypeSpec, Unary, VarDecl,
)
from .errors import ModelError, ParseError
from .lexer import Token, tokenize

# Binary operator precedence, loosest first.  "->" is right associative.
_LEVELS: list[tuple[str, ...]] = [
    ("<->",),
    ("->",),
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*",),
]
_RIGHT_ASSOC = {"->"}


class _Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def advance(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "kw") and t.text == text

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self._describe(self.tok)}", self.tok.loc)
        return self.advance()

    def expect_id(self) -> Token:
        if self.tok.kind != "id":
            raise ParseError(f"expected identifier, found {self._describe(self.tok)}", self.tok.loc)
        return self.advance()

    def expect_int(self) -> int:
        if self.tok.kind != "int":
            raise ParseError(f"expected integer, found {self._describe(self.tok)}", self.tok.loc)
        return int(self.advance().text)

    def signed_int(self) -> int:
        neg = self.accept("-") is not None
        value = self.expect_int()
        return -value if neg else value

    def skip_newlines(self) -> None:
        while self.tok.kind == "nl" or self.at(";"):
            self.advance()

    def end_of_statement(self) -> None:
        if self.accept(";") or self.tok.kind == "nl":
            self.skip_newlines()
            return
        if self.at("}") or self.tok.kind == "eof":
            return
        raise ParseError(
            f"expected end of statement, found {self._describe(self.tok)}", self.tok.loc
        )

    @staticmethod
    def _describe(t: Token) -> str:
        if t.kind == "eof":
            return "end of input"
        if t.kind == "nl":
            return "end of line"
        return repr(t.text)

    # -- top level ----------------------------------------------------------

    def program(self) -> Program:
        decls: list[VarDecl] = []
        procs: list[ProcDecl] = []
        self.skip_newlines()
        while self.tok.kind != "eof":
            if self.at("proc"):
                procs.append(self.proc())
            elif self.at("bool") or self.at("byte") or self.at("int") or self.at("enum"):
                if procs:
                    raise ParseError("declarations must precede process blocks", self.tok.loc)
                decls.extend(self.decl())
            else:
                raise ParseError(
                    f"expected declaration or 'proc', found {self._describe(self.tok)}",
                    self.tok.loc,
                )
            self.skip_newlines()
        if not procs:
            raise ParseError("program has no process blocks", self.tok.loc)
        return Program(tuple(decls), tuple(procs))

    def type_spec(self) -> TypeSpec:
        t = self.advance()
        if t.text == "bool":
            return TypeSpec.bool_()
        if t.text == "byte":
            return TypeSpec.byte()
        if t.text == "int":
            self.expect("[")
            lo = self.signed_int()
            self.expect("..")
            hi = self.signed_int()
            self.expect("]")
            if hi < lo:
                raise ModelError("range", f"empty int range [{lo}..{hi}]", t.loc)
            return TypeSpec.int_range(lo, hi)
        # enum
        self.expect("{")
        labels = [self.expect_id().text]
        while self.accept(","):
            labels.append(self.expect_id().text)
        self.expect("}")
        return TypeSpec.enum(tuple(labels))

    def decl(self) -> list[VarDecl]:
        ty = self.type_spec()
        out = [self.declarator(ty)]
        while self.accept(","):
            out.append(self.declarator(ty))
        self.end_of_statement()
        return out

    def declarator(self, ty: TypeSpec) -> VarDecl:
        name = self.expect_id()
        length = None
        if self.accept("["):
            length = self.expect_int()
            self.expect("]")
            if length < 1:
                raise ModelError("range", f"array {name.text!r} must have length >= 1", name.loc)
        init: tuple[Expr, ...] = ()
        if self.accept("="):
            if self.accept("{"):
                items = [self.expr()]
                while self.accept(","):
                    items.append(self.expr())
                self.expect("}")
                init = tuple(items)
            else:
                init = (self.expr(),)
        return VarDecl(name.text, ty, length, init, name.loc)

    def proc(self) -> ProcDecl:
        start = self.expect("proc")
        name = None
        if self.tok.kind == "id":
            name = self.advance().text
        count = 1
        if self.accept("replicate"):
            count = self.expect_int()
            if count < 1:
                raise ParseError("replicate count must be >= 1", start.loc)
        self.expect("{")
        self.skip_newlines()
        body: list[Stmt] = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise ParseError("unterminated process block", start.loc)
            body.extend(self.statement())
        self.expect("}")
        if not any(not isinstance(s, Label) for s in body):
            raise ParseError("empty process body", start.loc)
        return ProcDecl(name, count, tuple(body), start.loc)

    # -- statements ---------------------------------------------------------

    def statement(self) -> list[Stmt]:
        t = self.tok
        # label: `name:` optionally followed by a statement on the same line
        if t.kind == "id" and self.toks[self.i + 1].kind == "op" and self.toks[self.i + 1].text == ":":
            self.advance()
            self.advance()
            label = Label(t.text, t.loc)
            if self.tok.kind == "nl" or self.at(";"):
                self.skip_newlines()
                return [label]
            if self.at("}"):
                return [label]
            return [label, *self.statement()]
        if self.accept("goto"):
            target = self.expect_id()
            self.end_of_statement()
            return [Goto(target.text, t.loc)]
        if self.accept("assert"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            self.end_of_statement()
            return [Assert(cond, t.loc)]
        e = self.expr()
        if isinstance(e, (Name, Index)):
            if self.accept("="):
                value = self.expr()
                self.end_of_statement()
                return [Assign(e, value, t.loc)]
            for op, delta in (("++", "+"), ("--", "-")):
                if self.accept(op):
                    self.end_of_statement()
                    return [Assign(e, Binary(delta, e, IntLit(1, t.loc), t.loc), t.loc)]
        self.end_of_statement()
        return [Guard(e, t.loc)]

    # -- expressions --------------------------------------------------------

    def expr(self, level: int = 0) -> Expr:
        if level == len(_LEVELS):
            return self.unary()
        ops = _LEVELS[level]
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in ops:
            op_tok = self.advance()
            if op_tok.text in _RIGHT_ASSOC:
                right = self.expr(level)
                return Binary(op_tok.text, left, right, op_tok.loc)
            right = self.expr(level + 1)
            left = Binary(op_tok.text, left, right, op_tok.loc)
        return left

    def unary(self) -> Expr:
        t = self.tok
        if self.accept("!"):
            return Unary("!", self.unary(), t.loc)
        if self.accept("-"):
            operand = self.unary()
            if isinstance(operand, IntLit):
                return IntLit(-operand.value, t.loc)
            return Unary("-", operand, t.loc)
        return self.primary()

    def primary(self) -> Expr:
        t = self.advance()
        if t.kind == "int":
            return IntLit(int(t.text), t.loc)
        if t.kind == "kw" and t.text in ("true", "false"):
            return BoolLit(t.text == "true", t.loc)
        if t.kind == "kw" and t.text == "_pid":
            return Pid(t.loc)
        if t.kind == "id":
            if self.accept("["):
                idx = self.expr()
                self.expect("]")
                return Index(t.text, idx, t.loc)
            return Name(t.text, t.loc)
        if t.kind == "op" and t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"expected expression, found {self._describe(t)}", t.loc)


def parse_program(source: str) -> Program:
    """Parse source text into an unchecked syntax tree."""
    return _Parser(source).program()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    p.skip_newlines()
    e = p.expr()
    p.skip_newlines()
    if p.tok.kind != "eof":
        raise ParseError(f"unexpected {p._describe(p.tok)} after expression", p.tok.loc)
    return e


__all__ = ["parse_program", "parse_expr", "Loc"]
