"""Lexer, parser and checker for the ``.mpl`` modeling language."""

from .ast import Program
from .errors import LexError, ModelError, ParseError
from .model import PC_NAME, Process, ProgramModel, Slot, check_program, parse, parse_formula, state_space_size
from .parser import parse_expr, parse_program
from .printer import format_expr, pretty_print

__all__ = [
    "PC_NAME",
    "LexError",
    "ModelError",
    "ParseError",
    "Process",
    "Program",
    "ProgramModel",
    "Slot",
    "check_program",
    "format_expr",
    "parse",
    "parse_expr",
    "parse_formula",
    "parse_program",
    "pretty_print",
    "state_space_size",
]
