from __future__ import annotations

from typing import Optional

from .ast import Loc


class ModelError(Exception):
    """A diagnostic tied to a source position.

    ``kind`` is one of: lex, parse, unknown-variable, type, goto, duplicate,
    range.
    """

    def __init__(self, kind: str, message: str, loc: Optional[Loc] = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.loc = loc

    def format(self, filename: str = "<input>") -> str:
        if self.loc is None:
            return f"{filename}: {self.message}"
        return f"{filename}:{self.loc.line}:{self.loc.col}: {self.message}"

    def __str__(self) -> str:
        return self.format()


class LexError(ModelError):
    def __init__(self, message: str, loc: Loc):
        super().__init__("lex", message, loc)


class ParseError(ModelError):
    def __init__(self, message: str, loc: Optional[Loc] = None):
        super().__init__("parse", message, loc)
