"""Haskell abstract syntax produced by the translator.

Nodes are frozen dataclasses with structural equality. `demands(node)`
names the extensions a single node needs on its own; `required_extensions`
folds that over a whole module.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

EXTENSIONS = frozenset({
    "BangPatterns", "ExistentialQuantification", "RankNTypes",
    "MultiParamTypeClasses", "FunctionalDependencies", "NamedFieldPuns",
    "ParallelListComp", "GADTs", "OverloadedStrings",
})


class Node:
    __slots__ = ()


# -- types -------------------------------------------------------------------

@dataclass(frozen=True)
class TCon(Node):
    name: str


@dataclass(frozen=True)
class TVar(Node):
    name: str


@dataclass(frozen=True)
class TApp(Node):
    head: Node
    args: tuple


@dataclass(frozen=True)
class TList(Node):
    elem: Node


@dataclass(frozen=True)
class TTuple(Node):
    elems: tuple


@dataclass(frozen=True)
class TFun(Node):
    arg: Node
    result: Node


@dataclass(frozen=True)
class TForall(Node):
    """A nested `forall`; only ever built for argument positions."""
    vars: tuple
    body: Node


@dataclass(frozen=True)
class TBang(Node):
    """Strict constructor field `!t`."""
    inner: Node


@dataclass(frozen=True)
class Assert(Node):
    cls: str
    types: tuple


@dataclass(frozen=True)
class Qual(Node):
    context: tuple  # of Assert
    body: Node


# -- patterns ----------------------------------------------------------------

@dataclass(frozen=True)
class PVar(Node):
    name: str


@dataclass(frozen=True)
class PWild(Node):
    pass


@dataclass(frozen=True)
class PLit(Node):
    text: str


@dataclass(frozen=True)
class PCon(Node):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class PCons(Node):
    head: Node
    tail: Node


@dataclass(frozen=True)
class PList(Node):
    elems: tuple


@dataclass(frozen=True)
class PTuple(Node):
    elems: tuple


@dataclass(frozen=True)
class PRec(Node):
    """Record pattern; a `None` sub-pattern is a pun."""
    con: str
    fields: tuple


@dataclass(frozen=True)
class PAs(Node):
    name: str
    inner: Node


@dataclass(frozen=True)
class PBang(Node):
    inner: Node


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Var(Node):
    name: str


@dataclass(frozen=True)
class Con(Node):
    name: str


@dataclass(frozen=True)
class Lit(Node):
    text: str
    kind: str = "int"  # int | real | char | string


@dataclass(frozen=True)
class App(Node):
    func: Node
    args: tuple


@dataclass(frozen=True)
class InfixApp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Neg(Node):
    expr: Node


@dataclass(frozen=True)
class Lambda(Node):
    params: tuple
    body: Node


@dataclass(frozen=True)
class If(Node):
    cond: Node
    then: Node
    else_: Node


@dataclass(frozen=True)
class GuardedRhs(Node):
    guards: tuple  # of (cond, expr)


@dataclass(frozen=True)
class Rhs(Node):
    """Either a plain expression or guards, plus local bindings."""
    body: Node  # an expression or GuardedRhs
    where: tuple = ()


@dataclass(frozen=True)
class Alt(Node):
    pattern: Node
    rhs: Rhs


@dataclass(frozen=True)
class Case(Node):
    scrutinee: Node
    alts: tuple


@dataclass(frozen=True)
class Let(Node):
    binds: tuple
    body: Node


@dataclass(frozen=True)
class Tuple(Node):
    elems: tuple


@dataclass(frozen=True)
class List(Node):
    elems: tuple


@dataclass(frozen=True)
class Range(Node):
    start: Node
    then: Optional[Node] = None
    end: Optional[Node] = None


@dataclass(frozen=True)
class Gen(Node):
    pattern: Node
    source: Node


@dataclass(frozen=True)
class Guard(Node):
    cond: Node


@dataclass(frozen=True)
class Comp(Node):
    """List comprehension; more than one branch is a parallel comprehension."""
    expr: Node
    branches: tuple  # of tuples of Gen | Guard


@dataclass(frozen=True)
class RecCon(Node):
    con: str
    fields: tuple  # of (name, expr)


@dataclass(frozen=True)
class RecUpd(Node):
    record: Node
    fields: tuple


@dataclass(frozen=True)
class Sig(Node):
    expr: Node
    type: Node


# -- declarations ------------------------------------------------------------

@dataclass(frozen=True)
class Match(Node):
    patterns: tuple
    rhs: Rhs


@dataclass(frozen=True)
class FunBind(Node):
    name: str
    matches: tuple


@dataclass(frozen=True)
class PatBind(Node):
    pattern: Node
    rhs: Rhs


@dataclass(frozen=True)
class TypeSig(Node):
    names: tuple
    type: Node


@dataclass(frozen=True)
class Fixity(Node):
    assoc: str  # infixl | infixr | infix
    precedence: int
    ops: tuple


@dataclass(frozen=True)
class ConDecl(Node):
    name: str
    args: tuple = ()
    fields: Optional[tuple] = None  # record fields as (name, type)
    existentials: tuple = ()
    context: tuple = ()


@dataclass(frozen=True)
class DataDecl(Node):
    name: str
    vars: tuple
    ctors: tuple
    newtype: bool = False


@dataclass(frozen=True)
class TypeSyn(Node):
    name: str
    vars: tuple
    type: Node


@dataclass(frozen=True)
class ClassDecl(Node):
    context: tuple
    name: str
    vars: tuple
    fundeps: tuple = ()  # of (from-vars, to-vars)
    body: tuple = ()


@dataclass(frozen=True)
class InstDecl(Node):
    context: tuple
    cls: str
    types: tuple
    body: tuple = ()


@dataclass(frozen=True)
class Comment(Node):
    lines: tuple


@dataclass(frozen=True)
class Import(Node):
    module: str
    qualified: bool = False
    items: Optional[tuple] = None
    hiding: bool = False


@dataclass(frozen=True)
class Export(Node):
    """`kind` is var, type (bare name) or all (`T(..)`)."""
    kind: str
    name: str


@dataclass(frozen=True)
class Module(Node):
    name: str
    exports: Optional[tuple] = None
    pragmas: frozenset = field(default_factory=frozenset)
    imports: tuple = ()
    decls: tuple = ()


# -- traversal and extension demands -----------------------------------------

def children(node):
    for f in dataclasses.fields(node):
        yield from _nodes_in(getattr(node, f.name))


def _nodes_in(value):
    if isinstance(value, Node):
        yield value
    elif isinstance(value, tuple):
        for v in value:
            yield from _nodes_in(v)


def walk(node):
    yield node
    for c in children(node):
        yield from walk(c)


def demands(node) -> frozenset:
    """Extensions this node requires by itself, ignoring its children."""
    if isinstance(node, PBang):
        return frozenset({"BangPatterns"})
    if isinstance(node, ConDecl) and node.existentials:
        return frozenset({"ExistentialQuantification"})
    if isinstance(node, TForall):
        return frozenset({"RankNTypes"})
    if isinstance(node, ClassDecl):
        out = set()
        if len(node.vars) > 1:
            out.add("MultiParamTypeClasses")
        if node.fundeps:
            out.add("FunctionalDependencies")
        return frozenset(out)
    if isinstance(node, InstDecl) and len(node.types) > 1:
        return frozenset({"MultiParamTypeClasses"})
    if isinstance(node, PRec) and any(p is None for _, p in node.fields):
        return frozenset({"NamedFieldPuns"})
    if isinstance(node, Comp) and len(node.branches) > 1:
        return frozenset({"ParallelListComp"})
    if isinstance(node, Lit) and node.kind == "text":
        return frozenset({"OverloadedStrings"})
    return frozenset()


def required_extensions(m: Module) -> frozenset:
    """Union of per-node demands over the module's declarations."""
    out: set = set()
    for d in m.decls:
        for n in walk(d):
            out |= demands(n)
    return frozenset(out)


def demand_sites(m: Module) -> dict:
    """Map each demanded extension to the nodes demanding it."""
    sites: dict = {}
    for d in m.decls:
        for n in walk(d):
            for ext in demands(n):
                sites.setdefault(ext, []).append(n)
    return sites
