"""Translate Clean modules into Haskell source."""

from .diagnostics import Diagnostic
from .emitter import RenderStyle, emit
from .lexer import tokenize
from .linker import ExportList, link, translate_linked
from .parser import parse_expr, parse_pattern, parse_source, parse_type
from .pipeline import Result, convert
from .translator import TranslateOptions, translate_module
from .uniqueness import UniquenessReport, erase, propagate

__all__ = [
    "Diagnostic", "ExportList", "RenderStyle", "Result", "TranslateOptions", "UniquenessReport",
    "convert", "emit", "erase", "link", "parse_expr", "parse_pattern", "parse_source", "parse_type",
    "propagate", "tokenize", "translate_linked", "translate_module",
]
