"""Structured diagnostics shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .lexer import SourcePos

SEVERITIES = ("error", "warning", "info")

# rule_id -> (default severity, one-line description)
RULES: dict[str, tuple[str, str]] = {
    "lex-error": ("error", "source text could not be tokenized"),
    "layout-error": ("error", "indentation does not follow the offside rule"),
    "parse-error": ("error", "token stream does not match the supported grammar"),
    "kind-mismatch": ("error", "module header kind differs from the file extension"),
    "io-error": ("error", "input file could not be read"),
    "unsupported": ("error", "construct outside the translated subset"),
    "missing-body": ("error", "implementation module declares a signature without clauses"),
    "arity-mismatch": ("error", "clauses disagree with each other or with the signature"),
    "generics-unsupported": ("warning", "generic functions are built into Clean and need a manual port"),
    "uniqueness-erased": ("info", "uniqueness attributes were dropped from a type"),
    "attr-unknown-variable": ("warning", "attribute constraint names a variable absent from the signature"),
    "attr-equal-uniqueness": ("info", "attribute constraints form a cycle; the variables are equally unique"),
    "start-world": ("warning", "world-threading Start renamed to main; IO needs a manual port"),
    "start-pure": ("info", "pure Start wrapped in a printing main"),
    "class-name-collision": ("warning", "single-member class name clashed with an existing name"),
    "record-unknown": ("error", "record literal fields match no record type in scope"),
    "record-ambiguous": ("error", "record literal fields match several record types"),
    "record-literal-field": ("info", "record literal emitted with explicit field names"),
    "parallel-fallback": ("info", "parallel generators emitted with zip instead of parallel branches"),
    "dynamic-unsupported": ("error", "dynamic pattern shape outside the translated subset"),
    "stdenv-import": ("info", "Clean standard library import has no target counterpart and was dropped"),
    "identifier-renamed": ("info", "identifier clashed with a target keyword or convention"),
    "link-missing": ("error", "name declared in the definition module is missing from the implementation"),
    "link-private": ("info", "implementation-only name is private to the module"),
    "link-signature-mismatch": ("error", "definition and implementation signatures differ"),
    "link-attr-mismatch": ("warning", "definition and implementation differ only in uniqueness attributes"),
    "link-standalone": ("info", "no definition module found; every name is exported"),
    "module-name-mismatch": ("warning", "module header name differs from the file name"),
}


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    rule_id: str
    pos: Optional[SourcePos]
    message: str
    suggestion: Optional[str] = None

    def __post_init__(self):
        if self.rule_id not in RULES:
            raise ValueError(f"unregistered rule id {self.rule_id!r}")
        if self.severity not in SEVERITIES:
            raise ValueError(f"bad severity {self.severity!r}")

    @property
    def line(self) -> int:
        return self.pos.line if self.pos else 0

    @property
    def column(self) -> int:
        return self.pos.column if self.pos else 0

    def sort_key(self):
        return (self.line, self.column, self.rule_id, self.message)

    def __str__(self) -> str:
        where = f"{self.pos}" if self.pos else "-"
        text = f"{where}: {self.severity}[{self.rule_id}]: {self.message}"
        if self.suggestion:
            text += f" (suggestion: {self.suggestion})"
        return text


def diag(rule_id: str, span, message: str, *, severity: str | None = None,
         suggestion: str | None = None) -> Diagnostic:
    """Build a diagnostic using the rule's default severity."""
    pos = span[0] if isinstance(span, tuple) else span
    return Diagnostic(severity or RULES[rule_id][0], rule_id, pos, message, suggestion)


def has_errors(diags) -> bool:
    return any(d.severity == "error" for d in diags)
