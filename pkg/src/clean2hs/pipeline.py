"""Source text in, Haskell text and diagnostics out."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import hs as H
from . import syntax as S
from .diagnostics import Diagnostic, diag, has_errors
from .emitter import RenderStyle, emit
from .lexer import LayoutError, LexError, layout_insert, tokenize
from .linker import ModuleNameMismatch, translate_linked_full
from .parser import KindMismatch, ParseError, parse_module
from .translator import TranslateOptions
from .uniqueness import UniquenessReport


@dataclass
class Result:
    text: Optional[str]
    module: Optional[H.Module]
    diagnostics: list[Diagnostic] = field(default_factory=list)
    uniqueness: UniquenessReport = field(default_factory=UniquenessReport)
    fresh_log: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.text is not None and not has_errors(self.diagnostics)


def parse_clean(source: str, kind: str) -> tuple[Optional[S.CleanModule], list[Diagnostic]]:
    """Lex, lay out and parse; failures become a single error diagnostic."""
    try:
        return parse_module(layout_insert(tokenize(source)), kind), []
    except LexError as exc:
        return None, [diag("lex-error", exc.pos, str(exc))]
    except LayoutError as exc:
        return None, [diag("layout-error", exc.pos, str(exc))]
    except KindMismatch as exc:
        return None, [diag("kind-mismatch", exc.span, str(exc))]
    except ParseError as exc:
        return None, [diag("parse-error", exc.span, str(exc))]


def convert(icl_source: str, dcl_source: str | None = None,
            opts: TranslateOptions | None = None, style: RenderStyle | None = None) -> Result:
    icl, diags = parse_clean(icl_source, "implementation")
    dcl = None
    if dcl_source is not None:
        dcl, more = parse_clean(dcl_source, "definition")
        diags += more
    if icl is None or (dcl_source is not None and dcl is None):
        return Result(None, None, diags)
    try:
        t = translate_linked_full(dcl, icl, opts)
    except ModuleNameMismatch as exc:
        return Result(None, None, diags + [diag("module-name-mismatch", icl.span, str(exc),
                                                 severity="error")])
    return Result(emit(t.module, style), t.module, diags + t.diagnostics, t.uniqueness, t.fresh_log)
