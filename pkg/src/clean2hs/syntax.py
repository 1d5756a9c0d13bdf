"""Clean abstract syntax.

Every node is a frozen dataclass. Source spans ride along for diagnostics
but never take part in equality, so two parses of differently formatted
text compare equal when they mean the same thing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .lexer import SourcePos

Span = Optional[tuple[SourcePos, SourcePos]]


def _span() -> Span:
    return field(default=None, compare=False, repr=False, kw_only=True)


# -- uniqueness attributes and types ----------------------------------------

@dataclass(frozen=True)
class Attr:
    kind: str = "none"  # none | unique | var | dot
    name: Optional[str] = None
    span: Span = _span()

    @property
    def is_none(self) -> bool:
        return self.kind == "none"

    def text(self) -> str:
        if self.kind == "unique":
            return "*"
        if self.kind == "var":
            return f"{self.name}:"
        if self.kind == "dot":
            return "."
        return ""


NO_ATTR = Attr()
UNIQUE = Attr("unique")


@dataclass(frozen=True)
class AttrType:
    attr: Attr = field(default=NO_ATTR, kw_only=True)
    strict: bool = field(default=False, kw_only=True)
    span: Span = _span()


@dataclass(frozen=True)
class TCon(AttrType):
    name: str


@dataclass(frozen=True)
class TVar(AttrType):
    name: str


@dataclass(frozen=True)
class TApp(AttrType):
    head: AttrType
    args: tuple[AttrType, ...]


@dataclass(frozen=True)
class TTuple(AttrType):
    elems: tuple[AttrType, ...]


@dataclass(frozen=True)
class TList(AttrType):
    elem: AttrType


@dataclass(frozen=True)
class TArray(AttrType):
    elem: AttrType
    flavour: str = ""  # "", "#" (unboxed) or "!" (strict)


@dataclass(frozen=True)
class TFun(AttrType):
    arg: AttrType
    result: AttrType


@dataclass(frozen=True)
class TOptional(AttrType):
    elem: AttrType


@dataclass(frozen=True)
class TForall(AttrType):
    vars: tuple[str, ...]
    body: AttrType


def type_children(t: AttrType) -> tuple[AttrType, ...]:
    if isinstance(t, TApp):
        return (t.head, *t.args)
    if isinstance(t, TTuple):
        return t.elems
    if isinstance(t, (TList, TArray, TOptional)):
        return (t.elem,)
    if isinstance(t, TFun):
        return (t.arg, t.result)
    if isinstance(t, TForall):
        return (t.body,)
    return ()


def iter_types(t: AttrType):
    yield t
    for c in type_children(t):
        yield from iter_types(c)


@dataclass(frozen=True)
class AttrConstraint:
    lesser: str
    greater: str
    span: Span = _span()


@dataclass(frozen=True)
class ClassConstraint:
    cls: str
    types: tuple[AttrType, ...]


@dataclass(frozen=True)
class FunSig:
    args: tuple[AttrType, ...]
    result: AttrType
    context: tuple[ClassConstraint, ...] = ()
    attr_constraints: tuple[AttrConstraint, ...] = ()
    span: Span = _span()

    def types(self) -> tuple[AttrType, ...]:
        return (*self.args, self.result)


# -- patterns ----------------------------------------------------------------

@dataclass(frozen=True)
class Pattern:
    span: Span = _span()


@dataclass(frozen=True)
class PVar(Pattern):
    name: str


@dataclass(frozen=True)
class PWild(Pattern):
    pass


@dataclass(frozen=True)
class PLit(Pattern):
    kind: str  # int | real | char | charlist | string
    text: str


@dataclass(frozen=True)
class PCon(Pattern):
    name: str
    args: tuple[Pattern, ...] = ()


@dataclass(frozen=True)
class PList(Pattern):
    """`[a, b]` or, with a tail, the cons form `[a, b : rest]`."""
    elems: tuple[Pattern, ...]
    tail: Optional[Pattern] = None


@dataclass(frozen=True)
class PTuple(Pattern):
    elems: tuple[Pattern, ...]


@dataclass(frozen=True)
class PRecord(Pattern):
    """Field patterns; a `None` sub-pattern is a punned field `{ f }`."""
    type_name: Optional[str]
    fields: tuple[tuple[str, Optional[Pattern]], ...]

    @property
    def punned(self) -> bool:
        return any(p is None for _, p in self.fields)


@dataclass(frozen=True)
class PAs(Pattern):
    name: str
    inner: Pattern


@dataclass(frozen=True)
class PDynamic(Pattern):
    inner: Pattern
    type: AttrType


def pattern_vars(p: Pattern) -> list[str]:
    """Variables bound by a pattern, in left-to-right order."""
    out: list[str] = []

    def go(p):
        if isinstance(p, PVar):
            out.append(p.name)
        elif isinstance(p, PCon):
            for a in p.args:
                go(a)
        elif isinstance(p, PList):
            for a in p.elems:
                go(a)
            if p.tail is not None:
                go(p.tail)
        elif isinstance(p, PTuple):
            for a in p.elems:
                go(a)
        elif isinstance(p, PRecord):
            for name, sub in p.fields:
                if sub is None:
                    out.append(name)
                else:
                    go(sub)
        elif isinstance(p, PAs):
            out.append(p.name)
            go(p.inner)
        elif isinstance(p, PDynamic):
            go(p.inner)

    go(p)
    return out


# -- expressions -------------------------------------------------------------

@dataclass(frozen=True)
class Expr:
    span: Span = _span()


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Con(Expr):
    name: str


@dataclass(frozen=True)
class Lit(Expr):
    kind: str  # int | real | char | charlist | string
    text: str


@dataclass(frozen=True)
class Apply(Expr):
    func: Expr
    args: tuple[Expr, ...]


@dataclass(frozen=True)
class Infix(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Neg(Expr):
    expr: Expr


@dataclass(frozen=True)
class Lambda(Expr):
    params: tuple[Pattern, ...]
    body: Expr


@dataclass(frozen=True)
class If(Expr):
    cond: Expr
    then: Expr
    else_: Expr


@dataclass(frozen=True)
class Alt:
    pattern: Pattern
    body: "Body"
    span: Span = _span()


@dataclass(frozen=True)
class Case(Expr):
    scrutinee: Expr
    alts: tuple[Alt, ...]


@dataclass(frozen=True)
class Let(Expr):
    defs: tuple["LocalDef", ...]
    body: Expr


@dataclass(frozen=True)
class Tuple(Expr):
    elems: tuple[Expr, ...]


@dataclass(frozen=True)
class ListLit(Expr):
    elems: tuple[Expr, ...]


@dataclass(frozen=True)
class ListCons(Expr):
    """`[x:xs]` and `[a, b : rest]`."""
    elems: tuple[Expr, ...]
    tail: Expr


@dataclass(frozen=True)
class Range(Expr):
    start: Expr
    then: Optional[Expr]
    end: Optional[Expr]


@dataclass(frozen=True)
class Generator:
    pattern: Pattern
    source: Expr
    array: bool = False  # `<-:` rather than `<-`


@dataclass(frozen=True)
class Qualifier:
    """Generators joined by `&` (parallel) followed by `|` filters."""
    generators: tuple[Generator, ...]
    guards: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Comprehension(Expr):
    expr: Expr
    qualifiers: tuple[Qualifier, ...]


@dataclass(frozen=True)
class ArrayComprehension(Expr):
    expr: Expr
    qualifiers: tuple[Qualifier, ...]


@dataclass(frozen=True)
class RecordLit(Expr):
    type_name: Optional[str]
    fields: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class RecordUpdate(Expr):
    record: Expr
    fields: tuple[tuple[str, Expr], ...]


@dataclass(frozen=True)
class FieldSelect(Expr):
    record: Expr
    field: str


@dataclass(frozen=True)
class UniqueFieldSelect(Expr):
    record: Expr
    field: str


@dataclass(frozen=True)
class ArrayLit(Expr):
    elems: tuple[Expr, ...]


@dataclass(frozen=True)
class ArrayIndex(Expr):
    array: Expr
    index: Expr


@dataclass(frozen=True)
class UniqueArrayIndex(Expr):
    array: Expr
    index: Expr


@dataclass(frozen=True)
class ArrayUpdate(Expr):
    array: Expr
    updates: tuple[tuple[Expr, Expr], ...]


@dataclass(frozen=True)
class DynamicIntro(Expr):
    expr: Expr


@dataclass(frozen=True)
class AsPredicate(Expr):
    expr: Expr
    pattern: Pattern


# -- bodies and definitions --------------------------------------------------

@dataclass(frozen=True)
class LetStep:
    strict: bool
    pattern: Pattern
    expr: Expr
    span: Span = _span()


@dataclass(frozen=True)
class GuardAlt:
    cond: Expr
    expr: Expr


@dataclass(frozen=True)
class Body:
    """Right-hand side: `#` steps, then one expression or guards, then locals.

    Exactly one of `expr` and `guards` is set. `default` is the trailing
    unguarded `= t` after a guard list.
    """
    steps: tuple[LetStep, ...] = ()
    expr: Optional[Expr] = None
    guards: tuple[GuardAlt, ...] = ()
    default: Optional[Expr] = None
    where: tuple["LocalDef", ...] = ()


@dataclass(frozen=True)
class Clause:
    patterns: tuple[Pattern, ...]
    body: Body
    span: Span = _span()


@dataclass(frozen=True)
class Fixity:
    assoc: str  # left | right | none
    precedence: int


@dataclass(frozen=True)
class FunDef:
    name: str
    fixity: Optional[Fixity] = None
    signature: Optional[FunSig] = None
    clauses: tuple[Clause, ...] = ()
    span: Span = _span()

    @property
    def is_operator(self) -> bool:
        return not (self.name[0].isalpha() or self.name[0] == "_")


@dataclass(frozen=True)
class PatBinding:
    pattern: Pattern
    body: Body
    span: Span = _span()


LocalDef = Union[FunDef, PatBinding]


@dataclass(frozen=True)
class CtorDef:
    name: str
    arg_types: tuple[AttrType, ...] = ()
    existentials: tuple[str, ...] = ()
    context: tuple[ClassConstraint, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class Synonym:
    rhs: AttrType


@dataclass(frozen=True)
class Algebraic:
    ctors: tuple[CtorDef, ...]


@dataclass(frozen=True)
class RecordField:
    name: str
    type: AttrType


@dataclass(frozen=True)
class Record:
    fields: tuple[RecordField, ...]


@dataclass(frozen=True)
class NewtypeLike:
    ctor: CtorDef


@dataclass(frozen=True)
class Abstract:
    pass


TypeBody = Union[Synonym, Algebraic, Record, NewtypeLike, Abstract]


@dataclass(frozen=True)
class TypeDef:
    name: str
    type_vars: tuple[str, ...]
    body: TypeBody
    attr: Attr = NO_ATTR
    span: Span = _span()


@dataclass(frozen=True)
class ClassVar:
    name: str
    dependent: bool = False  # `~m`: determined by the other parameters


@dataclass(frozen=True)
class ClassDef:
    name: str
    vars: tuple[ClassVar, ...]
    context: tuple[ClassConstraint, ...] = ()
    members: tuple[FunDef, ...] = ()
    single_member: bool = False  # `class f a :: t`
    span: Span = _span()


@dataclass(frozen=True)
class InstanceDef:
    cls: str
    types: tuple[AttrType, ...]
    context: tuple[ClassConstraint, ...] = ()
    members: tuple[FunDef, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class ImportEntry:
    kind: str  # function | type | class
    name: str
    qualified: bool = False


@dataclass(frozen=True)
class ImportDecl:
    module_name: str
    form: str  # whole-module | selective
    entries: tuple[ImportEntry, ...] = ()
    qualified: bool = False
    span: Span = _span()


@dataclass(frozen=True)
class GenericStub:
    """A generic declaration, derive clause or generic instance, kept verbatim."""
    name: str
    kind_var: str
    signature_text: str
    derives: tuple[str, ...] = ()
    span: Span = _span()


@dataclass(frozen=True)
class CleanModule:
    name: str
    kind: str  # definition | implementation
    imports: tuple[ImportDecl, ...] = ()
    typedefs: tuple[TypeDef, ...] = ()
    classes: tuple[ClassDef, ...] = ()
    instances: tuple[InstanceDef, ...] = ()
    functions: tuple[FunDef, ...] = ()
    generics: tuple[GenericStub, ...] = ()
    span: Span = _span()
