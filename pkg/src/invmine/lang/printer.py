from __future__ import annotations

from .ast import (
    Assert, Assign, Binary, BoolLit, Expr, Goto, Guard, Index, IntLit, Label,
    Name, Pid, Program, Stmt, TypeSpec, Unary, VarDecl,
)


def format_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Pid):
        return "_pid"
    if isinstance(e, Name):
        return e.name
    if isinstance(e, Index):
        return f"{e.name}[{format_expr(e.index)}]"
    if isinstance(e, Unary):
        inner = format_expr(e.operand)
        if isinstance(e.operand, (Binary, Unary)) or (isinstance(e.operand, IntLit) and e.operand.value < 0):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        return f"{_operand(e.left)} {e.op} {_operand(e.right)}"
    raise TypeError(f"not an expression: {e!r}")


def _operand(e: Expr) -> str:
    text = format_expr(e)
    return f"({text})" if isinstance(e, Binary) else text


def _format_type(t: TypeSpec) -> str:
    if t.kind == "int":
        return f"int[{t.lo}..{t.hi}]"
    if t.kind == "enum":
        return "enum {" + ", ".join(t.labels) + "}"
    return t.kind


def _format_decl(d: VarDecl) -> str:
    text = f"{_format_type(d.type)} {d.name}"
    if d.length is not None:
        text += f"[{d.length}]"
    if len(d.init) == 1:
        text += f" = {format_expr(d.init[0])}"
    elif d.init:
        text += " = {" + ", ".join(format_expr(e) for e in d.init) + "}"
    return text + ";"


def _format_stmt(s: Stmt) -> str:
    if isinstance(s, Assign):
        return f"{format_expr(s.target)} = {format_expr(s.value)};"
    if isinstance(s, Guard):
        return f"({format_expr(s.cond)});"
    if isinstance(s, Goto):
        return f"goto {s.label};"
    if isinstance(s, Assert):
        return f"assert({format_expr(s.cond)});"
    if isinstance(s, Label):
        return f"{s.name}:"
    raise TypeError(f"not a statement: {s!r}")


def pretty_print(program) -> str:
    """Render a :class:`Program` (or a model wrapping one) as source text."""
    program = getattr(program, "program", program)
    assert isinstance(program, Program)
    lines = [_format_decl(d) for d in program.decls]
    for proc in program.procs:
        if lines:
            lines.append("")
        head = "proc"
        if proc.name is not None:
            head += f" {proc.name}"
        if proc.count != 1:
            head += f" replicate {proc.count}"
        lines.append(head + " {")
        for s in proc.body:
            indent = "" if isinstance(s, Label) else "    "
            lines.append(indent + _format_stmt(s))
        lines.append("}")
    return "\n".join(lines) + "\n"
