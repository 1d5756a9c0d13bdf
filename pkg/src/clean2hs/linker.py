"""Pair a definition module with its implementation to decide exports."""

from __future__ import annotations

from dataclasses import dataclass

from . import syntax as S
from .diagnostics import Diagnostic, diag
from .translator import TranslateOptions, Translation, translate_module_full
from .uniqueness import erase_sig, propagate_sig


class ModuleNameMismatch(Exception):
    def __init__(self, dcl_name: str, icl_name: str):
        self.dcl_name = dcl_name
        self.icl_name = icl_name
        super().__init__(f"definition module {dcl_name} does not match implementation module {icl_name}")


@dataclass(frozen=True)
class ExportList:
    items: tuple[tuple[str, str], ...] = ()  # (function | type | type-with-ctors | class, name)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def names(self) -> list[str]:
        return [name for _, name in self.items]


def _type_kind(td: S.TypeDef) -> str:
    if isinstance(td.body, (S.Abstract, S.Synonym)):
        return "type"
    return "type-with-ctors"


def declared(m: S.CleanModule) -> dict[str, tuple[str, object]]:
    """Top-level names of a module, keyed by name, in source order."""
    out: dict[str, tuple[str, object]] = {}
    for td in m.typedefs:
        out[td.name] = (_type_kind(td), td)
    for c in m.classes:
        out[c.name] = ("class", c)
    for f in m.functions:
        out[f.name] = ("function", f)
    return out


def _plain(sig: S.FunSig) -> S.FunSig:
    return erase_sig(propagate_sig(sig))[0]


def link(dcl: S.CleanModule, icl: S.CleanModule) -> tuple[ExportList, list[Diagnostic]]:
    """Exports are exactly the definition module's names present in the implementation."""
    if dcl.name != icl.name:
        raise ModuleNameMismatch(dcl.name, icl.name)
    want = declared(dcl)
    have = declared(icl)
    diags: list[Diagnostic] = []
    items = []
    for name, (kind, node) in want.items():
        if name not in have:
            diags.append(diag("link-missing", node.span,
                              f"{name} is declared in definition module {dcl.name} but not implemented"))
            continue
        items.append((kind, name))
        impl = have[name][1]
        if kind == "function" and node.signature and impl.signature:
            if _plain(node.signature) != _plain(impl.signature):
                diags.append(diag("link-signature-mismatch", impl.span,
                                  f"signature of {name} differs between definition and implementation"))
            elif node.signature != impl.signature:
                diags.append(diag("link-attr-mismatch", impl.span,
                                  f"uniqueness attributes of {name} differ between definition and implementation"))
        elif kind.startswith("type") and not isinstance(node.body, S.Abstract) and node.body != impl.body:
            diags.append(diag("link-signature-mismatch", impl.span,
                              f"type {name} differs between definition and implementation"))
    for name, (kind, node) in have.items():
        if name not in want:
            diags.append(diag("link-private", node.span,
                              f"{name} is not in definition module {dcl.name}; it stays private"))
    return ExportList(tuple(items)), diags


def translate_linked_full(dcl: S.CleanModule | None, icl: S.CleanModule,
                          opts: TranslateOptions | None = None) -> Translation:
    if dcl is None:
        t = translate_module_full(icl, None, opts)
        t.diagnostics.append(diag("link-standalone", icl.span,
                                  f"no definition module for {icl.name}; exporting everything"))
    else:
        exports, link_diags = link(dcl, icl)
        t = translate_module_full(icl, exports, opts)
        t.diagnostics.extend(link_diags)
    t.diagnostics.sort(key=Diagnostic.sort_key)
    return t


def translate_linked(dcl: S.CleanModule | None, icl: S.CleanModule,
                     opts: TranslateOptions | None = None):
    """Link (when a definition module exists) and translate; returns (module, diagnostics)."""
    t = translate_linked_full(dcl, icl, opts)
    return t.module, t.diagnostics
