from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import Loc
from .errors import LexError

KEYWORDS = {
    "bool", "byte", "int", "enum", "proc", "replicate",
    "goto", "assert", "true", "false", "_pid",
}

# Longest operators first; the alternation is tried left to right.
_OPERATORS = [
    "<->", "->", "..", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "+", "-", "*", "<", ">", "!", "=", "(", ")", "[", "]", "{", "}",
    ";", ":", ",",
]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>//[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<unterminated>/\*)
  | (?P<newline>\n)
  | (?P<int>[0-9]+)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>"""
    + "|".join(re.escape(op) for op in _OPERATORS)
    + ")",
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "id", "kw", "op", "nl", "eof"
    text: str
    loc: Loc


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        loc = Loc(line, pos - line_start + 1)
        if m is None:
            raise LexError(f"unexpected character {source[pos]!r}", loc)
        kind = m.lastgroup
        text = m.group()
        if kind == "newline":
            tokens.append(Token("nl", "\n", loc))
        elif kind == "int":
            tokens.append(Token("int", text, loc))
        elif kind == "id":
            tokens.append(Token("kw" if text in KEYWORDS else "id", text, loc))
        elif kind == "op":
            tokens.append(Token("op", text, loc))
        elif kind == "unterminated":
            raise LexError("unterminated comment", loc)
        # Block comments may span lines; keep line numbers right.
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + text.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", Loc(line, pos - line_start + 1)))
    return tokens
