"""Uniqueness attributes: propagation, constraint checks and erasure.

Only the propagation rule for function types is implemented (containers
holding a unique component become unique); there is no inference or
sharing analysis. Attributes are then erased from the translated types,
with one report entry per dropped attribute or constraint.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace

from . import syntax as S
from .diagnostics import Diagnostic, diag

_CONTAINERS = (S.TTuple, S.TList, S.TArray, S.TOptional)


def _map_children(t: S.AttrType, f) -> S.AttrType:
    if isinstance(t, S.TApp):
        return replace(t, head=f(t.head), args=tuple(f(a) for a in t.args))
    if isinstance(t, S.TTuple):
        return replace(t, elems=tuple(f(e) for e in t.elems))
    if isinstance(t, (S.TList, S.TArray, S.TOptional)):
        return replace(t, elem=f(t.elem))
    if isinstance(t, S.TFun):
        return replace(t, arg=f(t.arg), result=f(t.result))
    if isinstance(t, S.TForall):
        return replace(t, body=f(t.body))
    return t


def propagate(t: S.AttrType) -> S.AttrType:
    """Mark containers that hold a unique component as unique, bottom-up.

    Applies only to types in function signatures; data type definitions
    are marked by hand and must not be passed here.
    """
    t = _map_children(t, propagate)
    if isinstance(t, _CONTAINERS) and t.attr.is_none:
        if any(c.attr.kind == "unique" for c in S.type_children(t)):
            t = replace(t, attr=S.Attr("unique", span=t.span))
    return t


def propagate_sig(sig: S.FunSig) -> S.FunSig:
    return replace(sig, args=tuple(propagate(a) for a in sig.args), result=propagate(sig.result))


def attr_vars(types) -> list[str]:
    return [n.attr.name for t in types for n in S.iter_types(t) if n.attr.kind == "var"]


def check_constraints(sig: S.FunSig) -> list[Diagnostic]:
    """Report constraints on unknown variables and cycles among constraints."""
    known = set(attr_vars(sig.types()))
    out: list[Diagnostic] = []
    for c in sig.attr_constraints:
        for name in (c.lesser, c.greater):
            if name not in known:
                out.append(diag("attr-unknown-variable", c.span or sig.span,
                                f"attribute variable {name!r} in [{c.lesser}<={c.greater}] "
                                f"does not occur in the signature"))
    for group in equal_uniqueness_groups(sig.attr_constraints):
        names = ", ".join(sorted(group))
        out.append(diag("attr-equal-uniqueness", sig.span, f"variables equally unique: {names}"))
    return out


def equal_uniqueness_groups(constraints) -> list[frozenset[str]]:
    """Strongly connected groups (size >= 2) of the `lesser <= greater` graph."""
    succ: dict[str, set[str]] = {}
    for c in constraints:
        succ.setdefault(c.lesser, set()).add(c.greater)
        succ.setdefault(c.greater, set())

    def reach(v: str) -> set[str]:
        seen, stack = set(), [v]
        while stack:
            for w in succ[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    reachable = {v: reach(v) for v in succ}
    groups: list[frozenset[str]] = []
    assigned: set[str] = set()
    for v in sorted(succ):
        if v in assigned:
            continue
        group = frozenset({v} | {w for w in reachable[v] if v in reachable[w]})
        assigned |= group
        if len(group) > 1:
            groups.append(group)
    return groups


@dataclass(frozen=True)
class ErasureEntry:
    span: object
    text: str  # `*`, `u:`, `.` or `[v<=u]`
    action: str  # drop-unique | drop-var | drop-dot | drop-constraint


@dataclass
class UniquenessReport:
    entries: list[ErasureEntry] = field(default_factory=list)

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(e.action for e in self.entries)
        return {
            "erased_unique": c["drop-unique"],
            "erased_vars": c["drop-var"],
            "erased_dots": c["drop-dot"],
            "constraints": c["drop-constraint"],
        }

    def extend(self, other: "UniquenessReport") -> None:
        self.entries.extend(other.entries)

    def __len__(self) -> int:
        return len(self.entries)


ERASE_ACTIONS = {"unique": "drop-unique", "var": "drop-var", "dot": "drop-dot"}


def erase(t: S.AttrType, report: UniquenessReport | None = None
          ) -> tuple[S.AttrType, UniquenessReport]:
    """Drop every attribute, keeping the type's shape and strictness."""
    report = report if report is not None else UniquenessReport()

    def go(node: S.AttrType) -> S.AttrType:
        if not node.attr.is_none:
            report.entries.append(
                ErasureEntry(node.attr.span or node.span, node.attr.text(), ERASE_ACTIONS[node.attr.kind]))
            node = replace(node, attr=S.NO_ATTR)
        return _map_children(node, go)

    return go(t), report


def erase_sig(sig: S.FunSig, report: UniquenessReport | None = None
              ) -> tuple[S.FunSig, UniquenessReport]:
    """Erase attributes from every type in a signature and drop its constraints.

    Anonymous dots in one signature act as one shared variable; they are
    still reported per occurrence.
    """
    report = report if report is not None else UniquenessReport()
    args = tuple(erase(a, report)[0] for a in sig.args)
    result, _ = erase(sig.result, report)
    context = tuple(replace(c, types=tuple(erase(t, report)[0] for t in c.types)) for c in sig.context)
    for c in sig.attr_constraints:
        report.entries.append(ErasureEntry(c.span, f"[{c.lesser}<={c.greater}]", "drop-constraint"))
    return replace(sig, args=args, result=result, context=context, attr_constraints=()), report


def has_attributes(t: S.AttrType) -> bool:
    return any(not n.attr.is_none for n in S.iter_types(t))


def sig_has_attributes(sig: S.FunSig) -> bool:
    return bool(sig.attr_constraints) or any(has_attributes(t) for t in sig.types())
