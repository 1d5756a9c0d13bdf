"""Clean AST to Haskell AST, rule by rule.

Each construct maps through a small local rule; the module-level
`Translator` carries options, the record table used to resolve record
literals, and the diagnostics collected on the way. Every clause gets
its own `FreshNameSupply`, reserved with every name that occurs in the
clause, so generated names can never capture or be captured.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, replace
from typing import Optional

from . import hs as H
from . import syntax as S
from .diagnostics import Diagnostic, diag
from .uniqueness import (ERASE_ACTIONS, ErasureEntry, UniquenessReport, check_constraints,
                         erase, erase_sig, propagate_sig)


@dataclass(frozen=True)
class TranslateOptions:
    string_type: str = "charlist"  # charlist | text
    real_type: str = "double"  # double | float
    parallel_mode: str = "zip"  # zip | extension
    no_puns: bool = False
    strictness: str = "bang"  # bang | ignore

    def __post_init__(self):
        checks = {"string_type": ("charlist", "text"), "real_type": ("double", "float"),
                  "parallel_mode": ("zip", "extension"), "strictness": ("bang", "ignore")}
        for name, allowed in checks.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}")


class Unsupported(Exception):
    def __init__(self, span, construct: str):
        self.span = span
        self.construct = construct
        super().__init__(construct)


class FreshNameSupply:
    """Primed names (`x'`, `x''`, ...) never present in `reserved`.

    Clean identifiers cannot contain a prime, so primed names are also
    disjoint from every source identifier.
    """

    def __init__(self, reserved=()):
        self.reserved: set[str] = set(reserved)
        self.counter = 0
        self.generated: list[str] = []

    def fresh(self, base: str, plain_ok: bool = False) -> str:
        base = base.rstrip("'") or "v"
        if plain_ok and base not in self.reserved:
            name = base
        else:
            n = 1
            while base + "'" * n in self.reserved:
                n += 1
            name = base + "'" * n
        self.reserved.add(name)
        self.counter += 1
        self.generated.append(name)
        return name


HASKELL_RESERVED = frozenset({
    "case", "class", "data", "default", "deriving", "do", "else", "foreign",
    "if", "import", "in", "infix", "infixl", "infixr", "instance", "let",
    "module", "newtype", "of", "then", "type", "where", "forall", "main",
})

BUILTIN_VARS = {"abort": "error", "toString": "show", "hd": "head", "tl": "tail",
                "isEmpty": "null"}
BUILTIN_CONS = {"?None": "Nothing", "?Just": "Just"}
BUILTIN_CLASSES = {"TC": "Typeable", "toString": "Show", "==": "Eq", "<": "Ord",
                   "+": "Num", "-": "Num", "*": "Num", "zero": "Num", "one": "Num",
                   "/": "Fractional"}
ASSOC = {"left": "infixl", "right": "infixr", "none": "infix"}


# -- name bookkeeping over the Clean AST -------------------------------------

def _children(node):
    for f in dataclasses.fields(node):
        if f.name == "span":
            continue
        yield from _nested(getattr(node, f.name))


def _nested(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        yield value
    elif isinstance(value, tuple):
        for v in value:
            yield from _nested(v)


def all_names(node) -> set[str]:
    """Every identifier-like string in a Clean subtree."""
    out: set[str] = set()

    def go(n):
        for f in dataclasses.fields(n):
            v = getattr(n, f.name)
            if isinstance(v, str):
                out.add(v)
            elif isinstance(v, tuple):
                for item in v:
                    if isinstance(item, str):
                        out.add(item)
                    elif isinstance(item, tuple):
                        out.update(x for x in item if isinstance(x, str))
        for c in _children(n):
            go(c)

    go(node)
    out.discard("")
    return out


def local_binders(defs) -> set[str]:
    out: set[str] = set()
    for d in defs:
        if isinstance(d, S.FunDef):
            out.add(d.name)
        else:
            out.update(S.pattern_vars(d.pattern))
    return out


def free_vars(node) -> set[str]:
    """Variables referenced but not bound inside a Clean subtree."""
    if isinstance(node, S.Var):
        return {node.name}
    if isinstance(node, S.Lambda):
        return free_vars(node.body) - {v for p in node.params for v in S.pattern_vars(p)}
    if isinstance(node, S.Let):
        bound = local_binders(node.defs)
        inner = free_vars(node.body).union(*(free_vars(d) for d in node.defs))
        return inner - bound
    if isinstance(node, S.Case):
        out = free_vars(node.scrutinee)
        for a in node.alts:
            out |= free_vars(a.body) - set(S.pattern_vars(a.pattern))
        return out
    if isinstance(node, (S.Comprehension, S.ArrayComprehension)):
        out, bound = set(), set()
        for q in node.qualifiers:
            for g in q.generators:
                out |= free_vars(g.source) - bound
            bound |= {v for g in q.generators for v in S.pattern_vars(g.pattern)}
            for c in q.guards:
                out |= free_vars(c) - bound
        return out | (free_vars(node.expr) - bound)
    if isinstance(node, S.Body):
        bound = local_binders(node.where)
        out = set().union(*(free_vars(d) for d in node.where)) if node.where else set()
        for step in node.steps:
            out |= free_vars(step.expr) - bound
            bound |= set(S.pattern_vars(step.pattern))
        rest = [node.expr, node.default, *[x for g in node.guards for x in (g.cond, g.expr)]]
        for e in rest:
            if e is not None:
                out |= free_vars(e) - bound
        return out - local_binders(node.where)
    if isinstance(node, S.FunDef):
        return set().union(*(free_vars(c) for c in node.clauses)) - {node.name} \
            if node.clauses else set()
    if isinstance(node, S.Clause):
        return free_vars(node.body) - {v for p in node.patterns for v in S.pattern_vars(p)}
    if isinstance(node, (S.PatBinding, S.Alt)):
        return free_vars(node.body)
    if isinstance(node, (S.Pattern, S.AttrType)):
        return set()
    out: set[str] = set()
    for c in _children(node):
        out |= free_vars(c)
    return out


def _capitalize(name: str) -> str:
    return name[:1].upper() + name[1:]


def _is_irrefutable(p: S.Pattern) -> bool:
    return isinstance(p, (S.PVar, S.PWild)) or (isinstance(p, S.PAs) and _is_irrefutable(p.inner))


# -- results -----------------------------------------------------------------

@dataclass
class Translation:
    module: H.Module
    diagnostics: list[Diagnostic]
    uniqueness: UniquenessReport
    fresh_log: list[tuple[frozenset, tuple]] = field(default_factory=list)


class Translator:
    def __init__(self, opts: TranslateOptions | None = None, module: S.CleanModule | None = None):
        self.opts = opts or TranslateOptions()
        self.diags: list[Diagnostic] = []
        self.report = UniquenessReport()
        self.fresh_log: list[tuple[frozenset, tuple]] = []
        self.needs: set[str] = set()  # auto imports: array | dynamic | text
        self.renamed: dict[str, str] = {}
        self.source_names: set[str] = set()
        self.records: dict[str, tuple[str, ...]] = {}
        self.class_names: dict[str, str] = {}
        self.global_names: set[str] = set()
        if module is not None:
            self.scan(module)

    # -- setup ---------------------------------------------------------------

    def scan(self, m: S.CleanModule) -> None:
        for td in m.typedefs:
            if isinstance(td.body, S.Record):
                self.records[td.name] = tuple(f.name for f in td.body.fields)
        self.global_names = {f.name for f in m.functions}
        self.source_names = all_names(m)
        taken = {td.name for td in m.typedefs} | {c.name for c in m.classes if not c.single_member}
        for c in m.classes:
            if c.single_member:
                name = _capitalize(c.name)
                if name in taken:
                    wanted = name
                    while name in taken:
                        name += "C"
                    self.diags.append(diag("class-name-collision", c.span,
                                           f"class name {wanted} is already taken; using {name}",
                                           suggestion=f"rename the class member {c.name}"))
                taken.add(name)
                self.class_names[c.name] = name

    def error(self, rule: str, span, message: str) -> None:
        self.diags.append(diag(rule, span, message))

    def name(self, name: str, span=None) -> str:
        """Target spelling of a source identifier."""
        if name in HASKELL_RESERVED:
            if name not in self.renamed:
                target = name + "_"
                while target in self.source_names:
                    target += "_"
                self.renamed[name] = target
                self.diags.append(diag("identifier-renamed", span,
                                       f"identifier {name!r} is reserved in the target; renamed to {target}"))
            return self.renamed[name]
        return name

    def class_name(self, name: str) -> str:
        if name in self.class_names:
            return self.class_names[name]
        if name in BUILTIN_CLASSES:
            return BUILTIN_CLASSES[name]
        return _capitalize(name) if name[:1].islower() else name

    # -- types ---------------------------------------------------------------

    def type(self, t: S.AttrType, top: bool = False):
        if isinstance(t, S.TCon):
            if t.name == "Real":
                return H.TCon("Double" if self.opts.real_type == "double" else "Float")
            if t.name == "String":
                if self.opts.string_type == "text":
                    self.needs.add("text")
                    return H.TCon("Text")
                return H.TCon("String")
            if t.name == "Dynamic":
                self.needs.add("dynamic")
            return H.TCon(t.name)
        if isinstance(t, S.TVar):
            return H.TVar(t.name)
        if isinstance(t, S.TApp):
            head = self.type(t.head)
            args = tuple(self.type(a) for a in t.args)
            if isinstance(head, H.TApp):
                return H.TApp(head.head, head.args + args)
            return H.TApp(head, args)
        if isinstance(t, S.TTuple):
            return H.TTuple(tuple(self.type(e) for e in t.elems))
        if isinstance(t, S.TList):
            return H.TList(self.type(t.elem))
        if isinstance(t, S.TArray):
            self.needs.add("array")
            return H.TApp(H.TCon("Array"), (H.TCon("Int"), self.type(t.elem)))
        if isinstance(t, S.TOptional):
            return H.TApp(H.TCon("Maybe"), (self.type(t.elem),))
        if isinstance(t, S.TFun):
            return H.TFun(self.type(t.arg), self.type(t.result))
        if isinstance(t, S.TForall):
            body = self.type(t.body)
            return body if top else H.TForall(t.vars, body)
        raise Unsupported(t.span, type(t).__name__)

    def field_type(self, t: S.AttrType):
        out = self.type(t)
        return H.TBang(out) if t.strict else out

    def context(self, ctx) -> tuple:
        out = []
        for c in ctx:
            a = H.Assert(self.class_name(c.cls), tuple(self.type(t) for t in c.types))
            if a.cls == "Typeable":
                self.needs.add("dynamic")
            if a not in out:
                out.append(a)
        return tuple(out)

    def erase_sig(self, sig: S.FunSig, what: str) -> S.FunSig:
        self.diags.extend(check_constraints(sig))
        before = len(self.report)
        plain, _ = erase_sig(propagate_sig(sig), self.report)
        self.note_erasure(before, sig.span, what)
        return plain

    def erase_type(self, t: S.AttrType) -> S.AttrType:
        return erase(t, self.report)[0]

    def note_erasure(self, before: int, span, what: str) -> None:
        dropped = self.report.entries[before:]
        if dropped:
            texts = " ".join(e.text for e in dropped)
            self.diags.append(diag("uniqueness-erased", span,
                                   f"dropped uniqueness annotations from {what}: {texts}"))

    def sig(self, sig: S.FunSig):
        """Curried target type of an attribute-free signature."""
        result = self.type(sig.result, top=True)
        for a in reversed(sig.args):
            result = H.TFun(self.type(a), result)
        ctx = self.context(sig.context)
        return H.Qual(ctx, result) if ctx else result

    # -- type definitions ----------------------------------------------------

    def typedef(self, td: S.TypeDef):
        before = len(self.report)
        if not td.attr.is_none:
            self.report.entries.append(ErasureEntry(td.attr.span or td.span, td.attr.text(),
                                                    ERASE_ACTIONS[td.attr.kind]))
        body = td.body
        if isinstance(body, S.Synonym):
            rhs = self.erase_type(body.rhs)
            decl = H.TypeSyn(td.name, td.type_vars, self.type(rhs))
        elif isinstance(body, S.Algebraic):
            decl = H.DataDecl(td.name, td.type_vars, tuple(self.ctor(c) for c in body.ctors))
        elif isinstance(body, S.Record):
            fields = tuple((f.name, self.field_type(self.erase_type(f.type))) for f in body.fields)
            decl = H.DataDecl(td.name, td.type_vars, (H.ConDecl(td.name, fields=fields),))
        elif isinstance(body, S.NewtypeLike):
            decl = H.DataDecl(td.name, td.type_vars, (self.ctor(body.ctor),), newtype=True)
        else:
            decl = H.DataDecl(td.name, td.type_vars, ())
        self.note_erasure(before, td.span, f"type {td.name}")
        return decl

    def ctor(self, c: S.CtorDef) -> H.ConDecl:
        args = tuple(self.field_type(self.erase_type(a)) for a in c.arg_types)
        ctx = tuple(H.Assert(self.class_name(k.cls), tuple(self.type(self.erase_type(t)) for t in k.types))
                    for k in c.context)
        return H.ConDecl(c.name, args, existentials=c.existentials, context=ctx)

    # -- classes and instances ----------------------------------------------

    def class_def(self, c: S.ClassDef) -> list:
        if c.single_member and not c.name[:1].isalpha():
            raise Unsupported(c.span, f"single-member operator class ({c.name})")
        name = self.class_name(c.name)
        vars_ = tuple(v.name for v in c.vars)
        deps = tuple(v.name for v in c.vars if v.dependent)
        free = tuple(v.name for v in c.vars if not v.dependent)
        fundeps = ((deps, free),) if deps and free else ()
        body = []
        for member in c.members:
            body += self.fundef(member, in_class=True)
        return [H.ClassDecl(self.context(c.context), name, vars_, fundeps, tuple(body))]

    def instance_def(self, inst: S.InstanceDef):
        before = len(self.report)
        types = tuple(self.type(self.erase_type(t)) for t in inst.types)
        self.note_erasure(before, inst.span, f"instance {inst.cls}")
        body = []
        for member in inst.members:
            body += [d for d in self.fundef(member) if not isinstance(d, H.TypeSig)]
        return H.InstDecl(self.context(inst.context), self.class_name(inst.cls), types, tuple(body))

    # -- functions -----------------------------------------------------------

    def fundef(self, fd: S.FunDef, env: dict | None = None, in_class: bool = False,
               name: str | None = None, ns: FreshNameSupply | None = None) -> list:
        """Fixity, signature and binding for one (possibly local) function."""
        env = env or {}
        hs_name = name or self.name(fd.name, fd.span)
        out: list = []
        strict_args: tuple[int, ...] = ()
        if fd.fixity is not None:
            out.append(H.Fixity(ASSOC[fd.fixity.assoc], fd.fixity.precedence, (hs_name,)))
        if fd.signature is not None:
            plain = self.erase_sig(fd.signature, f"the signature of {fd.name}")
            out.append(H.TypeSig((hs_name,), self.sig(plain)))
            if self.opts.strictness == "bang":
                strict_args = tuple(i for i, a in enumerate(fd.signature.args) if a.strict)
        if not fd.clauses:
            if not in_class:
                self.error("missing-body", fd.span, f"{fd.name} has a signature but no clauses")
            return out
        arities = {len(c.patterns) for c in fd.clauses}
        if len(arities) > 1:
            self.error("arity-mismatch", fd.span, f"clauses of {fd.name} have differing arities {sorted(arities)}")
        elif fd.signature is not None and arities != {len(fd.signature.args)}:
            self.error("arity-mismatch", fd.span,
                       f"{fd.name} has {arities.pop()} parameters but its signature has {len(fd.signature.args)}")
        if any(isinstance(p, S.PDynamic) for c in fd.clauses for p in c.patterns):
            matches = (self.dynamic_clauses(fd, env, ns),)
        else:
            matches = tuple(self.clause(c, env, ns) for c in fd.clauses)
        if strict_args:
            matches = tuple(replace(m, patterns=tuple(
                H.PBang(p) if i in strict_args and not isinstance(p, H.PBang) else p
                for i, p in enumerate(m.patterns))) for m in matches)
        out.append(H.FunBind(hs_name, matches))
        return out

    def supply(self, node, parent: FreshNameSupply | None = None) -> FreshNameSupply:
        """A supply for one clause; local functions extend their parent's."""
        names = all_names(node) | self.global_names
        if parent is not None:
            parent.reserved |= names
            return parent
        ns = FreshNameSupply(names)
        self.fresh_log.append((frozenset(names), ns))
        return ns

    def clause(self, c: S.Clause, env: dict, parent: FreshNameSupply | None = None) -> H.Match:
        ns = self.supply(c, parent)
        env = dict(env)
        pats = tuple(self.pattern(p, env, ns) for p in c.patterns)
        params = {v for p in c.patterns for v in S.pattern_vars(p)}
        return H.Match(pats, self.body(c.body, env, ns, params))

    def body(self, b: S.Body, env: dict, ns: FreshNameSupply, params: set[str]) -> H.Rhs:
        """Right-hand side with let-before steps turned into where-bindings."""
        where_env = dict(env)
        where_names = local_binders(b.where)
        for n in where_names:
            where_env[n] = self.name(n)
        where_decls = self.local_defs(b.where, where_env, ns)

        step_env = dict(where_env)
        taken = {env.get(p, p) for p in params} | {where_env[n] for n in where_names}
        where_free = set().union(*(free_vars(d) for d in b.where)) if b.where else set()
        seen_free: set[str] = set(where_free)
        step_binds = []
        for step in b.steps:
            expr = self.expr(step.expr, step_env, ns)
            seen_free |= free_vars(step.expr)
            binders = {}
            for x in S.pattern_vars(step.pattern):
                plain = self.name(x)
                if plain in taken or x in seen_free:
                    binders[x] = ns.fresh(plain)
                else:
                    binders[x] = plain
                taken.add(binders[x])
            step_env.update(binders)
            pat = self.pattern(step.pattern, dict(step_env), ns, binders=binders)
            if step.strict and self.opts.strictness == "bang":
                step_binds.append(H.PatBind(H.PBang(pat), H.Rhs(expr)))
            elif isinstance(pat, H.PVar):
                step_binds.append(H.FunBind(pat.name, (H.Match((), H.Rhs(expr)),)))
            else:
                step_binds.append(H.PatBind(pat, H.Rhs(expr)))

        if b.guards:
            guards = [(self.expr(g.cond, step_env, ns), self.expr(g.expr, step_env, ns)) for g in b.guards]
            if b.default is not None:
                guards.append((H.Var("otherwise"), self.expr(b.default, step_env, ns)))
            result = H.GuardedRhs(tuple(guards))
        else:
            result = self.expr(b.expr, step_env, ns)
        return H.Rhs(result, tuple(step_binds) + tuple(where_decls))

    def local_defs(self, defs, env: dict, ns: FreshNameSupply) -> list:
        out = []
        for d in defs:
            if isinstance(d, S.FunDef):
                out += self.fundef(d, env, name=env.get(d.name, self.name(d.name)), ns=ns)
            else:
                pat = self.pattern(d.pattern, dict(env), ns,
                                   binders={v: env.get(v, v) for v in S.pattern_vars(d.pattern)})
                rhs = self.body(d.body, env, ns, set())
                if isinstance(pat, H.PVar):
                    out.append(H.FunBind(pat.name, (H.Match((), rhs),)))
                else:
                    out.append(H.PatBind(pat, rhs))
        return out

    def dynamic_clauses(self, fd: S.FunDef, env: dict, parent: FreshNameSupply | None = None) -> H.Match:
        """Typed clauses plus a fallback become one case over `fromDynamic`."""
        clauses = fd.clauses
        positions = {i for c in clauses for i, p in enumerate(c.patterns) if isinstance(p, S.PDynamic)}
        if len(positions) != 1:
            raise Unsupported(fd.span, "dynamic patterns in several argument positions")
        k = positions.pop()
        arity = len(clauses[0].patterns)
        ns = self.supply(fd, parent)
        env = dict(env)
        params = []
        for j in range(arity):
            if j == k:
                params.append(ns.fresh("d", plain_ok=True))
                continue
            names = {c.patterns[j].name for c in clauses if isinstance(c.patterns[j], S.PVar)}
            if any(not isinstance(c.patterns[j], (S.PVar, S.PWild)) for c in clauses) or len(names) > 1:
                raise Unsupported(fd.span, "dynamic clauses must share plain variable parameters")
            params.append(self.name(names.pop()) if names else "_")
        d = params[k]
        alts = []
        fallback = None
        for c in clauses:
            p = c.patterns[k]
            if isinstance(p, S.PDynamic):
                cenv = dict(env)
                inner = self.pattern(p.inner, cenv, ns)
                rhs = self.body(c.body, cenv, ns, set(S.pattern_vars(p.inner)))
                ty = self.type(self.erase_type(p.type))
                scrut = H.App(H.Var("fromDynamic"), (H.Var(d),))
                if not any(isinstance(n, H.TVar) for n in H.walk(ty)):
                    scrut = H.Sig(scrut, H.TApp(H.TCon("Maybe"), (ty,)))
                alts.append((scrut, H.Alt(H.PCon("Just", (inner,)), rhs),
                             _is_irrefutable(p.inner) and not c.body.guards))
            else:
                if fallback is not None:
                    raise Unsupported(c.span, "more than one fallback clause after dynamic patterns")
                cenv = dict(env)
                if isinstance(p, S.PVar):
                    cenv[p.name] = d
                fallback = self.body(c.body, cenv, ns, set())
        self.needs.add("dynamic")
        expr = None
        for scrut, alt, total in reversed(alts):
            branches = [alt]
            if expr is not None or fallback is not None:
                rest = H.Rhs(expr) if expr is not None else fallback
                branches.append(H.Alt(H.PCon("Nothing") if total else H.PWild(), rest))
            expr = H.Case(scrut, tuple(branches))
        pats = tuple(H.PVar(n) if n != "_" else H.PWild() for n in params)
        return H.Match(pats, H.Rhs(expr))

    # -- patterns ------------------------------------------------------------

    def pattern(self, p: S.Pattern, env: dict, ns: FreshNameSupply, binders: dict | None = None):
        """Translate a pattern, binding its variables in `env` (mutated)."""
        def bind(name: str) -> str:
            target = binders[name] if binders and name in binders else self.name(name, p.span)
            env[name] = target
            return target

        if isinstance(p, S.PVar):
            return H.PVar(bind(p.name))
        if isinstance(p, S.PWild):
            return H.PWild()
        if isinstance(p, S.PLit):
            return H.PLit(self.literal(p.kind, p.text).text)
        if isinstance(p, S.PCon):
            return H.PCon(BUILTIN_CONS.get(p.name, p.name),
                          tuple(self.pattern(a, env, ns, binders) for a in p.args))
        if isinstance(p, S.PList):
            elems = tuple(self.pattern(a, env, ns, binders) for a in p.elems)
            if p.tail is None:
                return H.PList(elems)
            out = self.pattern(p.tail, env, ns, binders)
            for e in reversed(elems):
                out = H.PCons(e, out)
            return out
        if isinstance(p, S.PTuple):
            return H.PTuple(tuple(self.pattern(a, env, ns, binders) for a in p.elems))
        if isinstance(p, S.PRecord):
            con = self.record_con(p.type_name, [f for f, _ in p.fields], p.span)
            fields = []
            for fname, sub in p.fields:
                if sub is not None:
                    fields.append((fname, self.pattern(sub, env, ns, binders)))
                elif self.opts.no_puns:
                    var = ns.fresh(fname)
                    env[fname] = var
                    fields.append((fname, H.PVar(var)))
                else:
                    if binders and fname in binders and binders[fname] != fname:
                        fields.append((fname, H.PVar(bind(fname))))
                    else:
                        env[fname] = fname
                        fields.append((fname, None))
            return H.PRec(con, tuple(fields))
        if isinstance(p, S.PAs):
            name = bind(p.name)
            return H.PAs(name, self.pattern(p.inner, env, ns, binders))
        if isinstance(p, S.PDynamic):
            raise Unsupported(p.span, "dynamic pattern outside a function clause")
        raise Unsupported(p.span, type(p).__name__)

    def record_con(self, type_name: Optional[str], fields, span) -> str:
        if type_name:
            return type_name
        wanted = set(fields)
        matches = sorted(r for r, fs in self.records.items() if wanted <= set(fs))
        if len(matches) == 1:
            return matches[0]
        if not matches:
            self.error("record-unknown", span, f"no record type has fields {sorted(wanted)}")
            return "UnknownRecord"
        self.error("record-ambiguous", span,
                   f"fields {sorted(wanted)} match records {', '.join(matches)}; add a type name")
        return matches[0]

    # -- expressions ---------------------------------------------------------

    def literal(self, kind: str, text: str) -> H.Lit:
        if kind == "charlist":
            body = text.replace("\\'", "'").replace('"', '\\"')
            return H.Lit(f'"{body}"', "string")
        if kind == "string":
            return H.Lit(text, "text" if self.opts.string_type == "text" else "string")
        return H.Lit(text, kind)

    def var(self, name: str, env: dict, span=None):
        if name in env:
            return H.Var(env[name])
        if name not in self.global_names and name in BUILTIN_VARS:
            return H.Var(BUILTIN_VARS[name])
        return H.Var(self.name(name, span))

    def op(self, op: str) -> str:
        if op == "<>":
            return "/="
        if op == "+++":
            return "<>" if self.opts.string_type == "text" else "++"
        return op

    def expr(self, e: S.Expr, env: dict, ns: FreshNameSupply):
        t = lambda x: self.expr(x, env, ns)  # noqa: E731
        if isinstance(e, S.Var):
            return self.var(e.name, env, e.span)
        if isinstance(e, S.Con):
            return H.Con(BUILTIN_CONS.get(e.name, e.name))
        if isinstance(e, S.Lit):
            return self.literal(e.kind, e.text)
        if isinstance(e, S.Apply):
            if isinstance(e.func, S.Var) and e.func.name == "toInteger" and "toInteger" not in env \
                    and len(e.args) == 1 and isinstance(e.args[0], S.Lit) and e.args[0].kind == "int":
                return H.Sig(H.Lit(e.args[0].text), H.TCon("Integer"))
            func = t(e.func)
            args = tuple(t(a) for a in e.args)
            if isinstance(func, H.App):
                return H.App(func.func, func.args + args)
            return H.App(func, args)
        if isinstance(e, S.Infix):
            return H.InfixApp(self.op(e.op), t(e.left), t(e.right))
        if isinstance(e, S.Neg):
            return H.Neg(t(e.expr))
        if isinstance(e, S.Lambda):
            inner = dict(env)
            params = tuple(self.pattern(p, inner, ns) for p in e.params)
            return H.Lambda(params, self.expr(e.body, inner, ns))
        if isinstance(e, S.If):
            return H.If(t(e.cond), t(e.then), t(e.else_))
        if isinstance(e, S.Case):
            alts = []
            for a in e.alts:
                inner = dict(env)
                pat = self.pattern(a.pattern, inner, ns)
                alts.append(H.Alt(pat, self.body(a.body, inner, ns, set(S.pattern_vars(a.pattern)))))
            return H.Case(t(e.scrutinee), tuple(alts))
        if isinstance(e, S.Let):
            inner = dict(env)
            for n in local_binders(e.defs):
                inner[n] = self.name(n)
            return H.Let(tuple(self.local_defs(e.defs, inner, ns)), self.expr(e.body, inner, ns))
        if isinstance(e, S.Tuple):
            return H.Tuple(tuple(t(x) for x in e.elems))
        if isinstance(e, S.ListLit):
            return H.List(tuple(t(x) for x in e.elems))
        if isinstance(e, S.ListCons):
            out = t(e.tail)
            for x in reversed(e.elems):
                out = H.InfixApp(":", t(x), out)
            return out
        if isinstance(e, S.Range):
            return H.Range(t(e.start), e.then and t(e.then), e.end and t(e.end))
        if isinstance(e, S.Comprehension):
            inner = dict(env)
            branches = self.qualifiers(e.qualifiers, inner, ns, e.span)
            return H.Comp(self.expr(e.expr, inner, ns), branches)
        if isinstance(e, S.ArrayComprehension):
            return self.array_comprehension(e, env, ns)
        if isinstance(e, S.RecordLit):
            con = self.record_con(e.type_name, [f for f, _ in e.fields], e.span)
            return H.RecCon(con, tuple((f, t(x)) for f, x in e.fields))
        if isinstance(e, S.RecordUpdate):
            return H.RecUpd(t(e.record), tuple((f, t(x)) for f, x in e.fields))
        if isinstance(e, S.FieldSelect):
            return H.App(H.Var(e.field), (t(e.record),))
        if isinstance(e, S.UniqueFieldSelect):
            v = ns.fresh("v", plain_ok=True)
            pair = H.Tuple((H.App(H.Var(e.field), (H.Var(v),)), H.Var(v)))
            return H.App(H.Lambda((H.PVar(v),), pair), (t(e.record),))
        if isinstance(e, S.ArrayLit):
            self.needs.add("array")
            n = len(e.elems) - 1
            bounds = H.Tuple((H.Lit("0"), H.Lit(str(n)) if n >= 0 else H.Neg(H.Lit("1"))))
            pairs = H.List(tuple(H.Tuple((H.Lit(str(i)), t(x))) for i, x in enumerate(e.elems)))
            return H.App(H.Var("array"), (bounds, pairs))
        if isinstance(e, S.ArrayIndex):
            self.needs.add("array")
            return H.InfixApp("!", t(e.array), t(e.index))
        if isinstance(e, S.UniqueArrayIndex):
            self.needs.add("array")
            v = ns.fresh("v", plain_ok=True)
            pair = H.Tuple((H.InfixApp("!", H.Var(v), t(e.index)), H.Var(v)))
            return H.App(H.Lambda((H.PVar(v),), pair), (t(e.array),))
        if isinstance(e, S.ArrayUpdate):
            self.needs.add("array")
            updates = H.List(tuple(H.Tuple((t(i), t(x))) for i, x in e.updates))
            return H.InfixApp("//", t(e.array), updates)
        if isinstance(e, S.DynamicIntro):
            self.needs.add("dynamic")
            return H.App(H.Var("toDyn"), (t(e.expr),))
        if isinstance(e, S.AsPredicate):
            inner = dict(env)
            pat = self.pattern(e.pattern, inner, ns)
            return H.Case(t(e.expr), (H.Alt(pat, H.Rhs(H.Con("True"))),
                                      H.Alt(H.PWild(), H.Rhs(H.Con("False")))))
        raise Unsupported(e.span, type(e).__name__)

    def generator_source(self, g: S.Generator, env: dict, ns: FreshNameSupply):
        src = self.expr(g.source, env, ns)
        if g.array:
            self.needs.add("array")
            return H.App(H.Var("elems"), (src,))
        return src

    def qualifiers(self, quals, env: dict, ns: FreshNameSupply, span) -> tuple:
        """Comprehension qualifiers; `env` gains the generator binders."""
        parallel = [q for q in quals if len(q.generators) > 1]
        use_branches = self.opts.parallel_mode == "extension" and len(quals) == 1 \
            and parallel and not quals[0].guards
        if self.opts.parallel_mode == "extension" and parallel and not use_branches:
            self.diags.append(diag("parallel-fallback", span,
                                   "parallel generators combined with guards or further qualifiers; "
                                   "using zip to keep the semantics"))
        if use_branches:
            gens = quals[0].generators
            sources = [self.generator_source(g, env, ns) for g in gens]
            return tuple((H.Gen(self.pattern(g.pattern, env, ns), s),) for g, s in zip(gens, sources))
        stmts = []
        for q in quals:
            sources = [self.generator_source(g, env, ns) for g in q.generators]
            pats = [self.pattern(g.pattern, env, ns) for g in q.generators]
            if len(pats) == 1:
                stmts.append(H.Gen(pats[0], sources[0]))
            else:
                stmts.append(H.Gen(*_zip_all(pats, sources)))
            stmts += [H.Guard(self.expr(c, env, ns)) for c in q.guards]
        return (tuple(stmts),)

    def array_comprehension(self, e: S.ArrayComprehension, env: dict, ns: FreshNameSupply):
        self.needs.add("array")
        q = e.qualifiers
        if len(q) == 1 and len(q[0].generators) == 1 and q[0].generators[0].array and not q[0].guards:
            g = q[0].generators[0]
            src = self.expr(g.source, env, ns)
            inner = dict(env)
            i = ns.fresh("i", plain_ok=True)
            pat = H.PTuple((H.PVar(i), self.pattern(g.pattern, inner, ns)))
            body = H.Tuple((H.Var(i), self.expr(e.expr, inner, ns)))
            zipped = H.App(H.Var("zip"), (H.Range(H.Lit("0")), H.App(H.Var("elems"), (src,))))
            upper = H.InfixApp("-", H.App(H.Var("length"), (src,)), H.Lit("1"))
            comp = H.Comp(body, ((H.Gen(pat, zipped),),))
            return H.App(H.Var("array"), (H.Tuple((H.Lit("0"), upper)), comp))
        inner = dict(env)
        branches = self.qualifiers(e.qualifiers, inner, ns, e.span)
        comp = H.Comp(self.expr(e.expr, inner, ns), branches)
        xs = ns.fresh("xs", plain_ok=True)
        upper = H.InfixApp("-", H.App(H.Var("length"), (H.Var(xs),)), H.Lit("1"))
        build = H.App(H.Var("listArray"), (H.Tuple((H.Lit("0"), upper)), H.Var(xs)))
        return H.Let((H.FunBind(xs, (H.Match((), H.Rhs(comp)),)),), build)

    # -- module --------------------------------------------------------------

    def imports(self, m: S.CleanModule) -> list:
        out = []
        for imp in m.imports:
            if imp.module_name.startswith("Std"):
                self.diags.append(diag("stdenv-import", imp.span,
                                       f"import {imp.module_name} dropped; the Prelude covers it"))
                continue
            names = tuple(e.name if e.kind != "function" else self.name(e.name) for e in imp.entries)
            if imp.form == "whole-module":
                out.append(H.Import(imp.module_name, qualified=imp.qualified))
            elif any(e.qualified for e in imp.entries):
                out.append(H.Import(imp.module_name, qualified=True, items=names))
                out.append(H.Import(imp.module_name, items=names, hiding=True))
            else:
                out.append(H.Import(imp.module_name, qualified=imp.qualified, items=names))
        return out

    def start(self, fd: S.FunDef) -> list:
        world = bool(fd.clauses and fd.clauses[0].patterns) or (
            fd.signature is not None and fd.signature.args)
        if world:
            self.diags.append(diag("start-world", fd.span,
                                   "Start threads the World; renamed to main, "
                                   "the world-passing effects need a manual port to IO"))
            return self.fundef(fd, name="main")
        taken = self.global_names | {n for c in fd.clauses for n in all_names(c)}
        name = FreshNameSupply(taken).fresh("start", plain_ok=True)
        self.diags.append(diag("start-pure", fd.span, f"pure Start bound as {name}; main prints it"))
        decls = self.fundef(fd, name=name)
        decls.append(H.TypeSig(("main",), H.TApp(H.TCon("IO"), (H.TCon("()"),))))
        decls.append(H.FunBind("main", (H.Match((), H.Rhs(H.App(H.Var("print"), (H.Var(name),)))),)))
        return decls

    def guarded(self, make, span, what: str) -> list:
        try:
            return make()
        except Unsupported as exc:
            rule = "dynamic-unsupported" if "dynamic" in exc.construct else "unsupported"
            self.diags.append(diag(rule, exc.span or span, f"{what}: unsupported construct {exc.construct}"))
            return []

    def module(self, m: S.CleanModule, exports=None) -> H.Module:
        decls: list = []
        for td in m.typedefs:
            decls += self.guarded(lambda: [self.typedef(td)], td.span, f"type {td.name}")
        for c in m.classes:
            decls += self.guarded(lambda: self.class_def(c), c.span, f"class {c.name}")
        for inst in m.instances:
            decls += self.guarded(lambda: [self.instance_def(inst)], inst.span, f"instance {inst.cls}")
        for fd in m.functions:
            if fd.name == "Start":
                decls += self.guarded(lambda: self.start(fd), fd.span, "Start")
            else:
                decls += self.guarded(lambda: self.fundef(fd), fd.span, f"function {fd.name}")
        for g in m.generics:
            self.diags.append(diag("generics-unsupported", g.span,
                                   f"generic function {g.name} has no Haskell counterpart; port it by hand "
                                   f"(for example with GHC.Generics)"))
            if g.signature_text.startswith("derive "):
                text = f"derive {g.name} {', '.join(g.derives)}"
            elif g.signature_text.startswith(f"{g.name} "):
                text = g.signature_text  # a generic instance
            else:
                head = " ".join(x for x in ("generic", g.name, g.kind_var) if x)
                text = f"{head} :: {g.signature_text}" if g.signature_text else head
            decls.append(H.Comment(("manual port needed:", text)))

        imports = self.imports(m)
        auto = {"array": H.Import("Data.Array"), "dynamic": H.Import("Data.Dynamic"),
                "text": H.Import("Data.Text", items=("Text",))}
        present = {i.module for i in imports}
        for key in sorted(self.needs):
            if auto[key].module not in present:
                imports.append(auto[key])
        hs_exports = None
        if exports is not None:
            hs_exports = tuple(self.export(item) for item in exports)
        out = H.Module(m.name, hs_exports, frozenset(), tuple(imports), tuple(decls))
        return replace(out, pragmas=H.required_extensions(out))

    def export(self, item) -> H.Export:
        kind, name = item
        if kind == "function":
            return H.Export("var", "main" if name == "Start" else self.name(name))
        if kind == "class":
            return H.Export("all", self.class_name(name))
        return H.Export("all" if kind == "type-with-ctors" else "type", name)


def _zip_all(pats: list, sources: list):
    """Pair parallel generators: zip, zip3, or nested zips beyond three."""
    if len(pats) == 2:
        return H.PTuple(tuple(pats)), H.App(H.Var("zip"), tuple(sources))
    if len(pats) == 3:
        return H.PTuple(tuple(pats)), H.App(H.Var("zip3"), tuple(sources))
    rest_pat, rest_src = _zip_all(pats[1:], sources[1:])
    return H.PTuple((pats[0], rest_pat)), H.App(H.Var("zip"), (sources[0], rest_src))


# -- public entry points ------------------------------------------------------

def translate_module_full(m: S.CleanModule, exports=None,
                          opts: TranslateOptions | None = None) -> Translation:
    tr = Translator(opts, m)
    out = tr.module(m, exports)
    diags = sorted(tr.diags, key=Diagnostic.sort_key)
    log = [(names, tuple(ns.generated)) for names, ns in tr.fresh_log]
    return Translation(out, diags, tr.report, log)


def translate_module(m: S.CleanModule, exports=None, opts: TranslateOptions | None = None):
    """Translate an implementation module; returns (module, diagnostics)."""
    t = translate_module_full(m, exports, opts)
    return t.module, t.diagnostics


def translate_typedef(d: S.TypeDef, opts: TranslateOptions | None = None):
    tr = Translator(opts)
    if isinstance(d.body, S.Record):
        tr.records[d.name] = tuple(f.name for f in d.body.fields)
    decl = tr.typedef(d)
    return decl, frozenset().union(*(H.demands(n) for n in H.walk(decl)))


def translate_sig(s: S.FunSig, opts: TranslateOptions | None = None):
    tr = Translator(opts)
    t = tr.sig(tr.erase_sig(s, "signature"))
    return t, frozenset().union(*(H.demands(n) for n in H.walk(t)))


def translate_class(c: S.ClassDef, opts: TranslateOptions | None = None):
    tr = Translator(opts, S.CleanModule("M", "implementation", classes=(c,)))
    decls = tr.class_def(c)
    return decls, frozenset().union(*(H.demands(n) for d in decls for n in H.walk(d)))


def translate_expr(e: S.Expr, ns: FreshNameSupply | None = None,
                   opts: TranslateOptions | None = None, module: S.CleanModule | None = None):
    """Translate one expression; returns (expr, extensions, diagnostics)."""
    tr = Translator(opts, module)
    ns = ns or FreshNameSupply(all_names(e))
    out = tr.expr(e, {}, ns)
    return out, frozenset().union(*(H.demands(n) for n in H.walk(out))), tr.diags


def translate_let_before(clause: S.Clause, ns: FreshNameSupply | None = None,
                         opts: TranslateOptions | None = None) -> H.Match:
    """One clause whose body is a `#` chain, as a match with where-bindings."""
    tr = Translator(opts)
    if ns is None:
        return tr.clause(clause, {})
    env: dict = {}
    pats = tuple(tr.pattern(p, env, ns) for p in clause.patterns)
    params = {v for p in clause.patterns for v in S.pattern_vars(p)}
    return H.Match(pats, tr.body(clause.body, env, ns, params))
