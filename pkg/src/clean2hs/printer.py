"""Canonical Clean pretty-printer.

Produces source the parser reads back to an equal AST. Clean has no
explicit-brace layout, so `case`, `let` and `where` blocks are printed on
separate lines; a multi-line fragment embedded after some prefix has its
continuation lines indented to the fragment's starting column, which keeps
every layout block to the right of the block that encloses it.
"""

from __future__ import annotations

from . import syntax as S
from .parser import BUILTIN_FIXITIES, DEFAULT_FIXITY

Doc = list[str]

# Expression contexts, loosest first.
TOP = 0        # followed by a delimiter: greedy forms may stay bare
INNER = 1      # full operator expressions, but no lambda/case/let/=:
OPERAND = 2    # operand of an infix operator
ARG = 3        # function argument or postfix selection target

_GREEDY = (S.Lambda, S.Case, S.Let, S.AsPredicate)


def _hcat(a: Doc, b: Doc) -> Doc:
    """Append b after a's last line, hanging b's later lines under its start."""
    pad = " " * len(a[-1])
    return a[:-1] + [a[-1] + b[0]] + [pad + line if line else line for line in b[1:]]


def _cat(*parts) -> Doc:
    out: Doc = [""]
    for p in parts:
        out = _hcat(out, [p] if isinstance(p, str) else p)
    return out


def _indent(doc: Doc, n: int) -> Doc:
    return [" " * n + line if line else line for line in doc]


def _join(docs: list[Doc], sep: str) -> Doc:
    out: Doc = docs[0]
    for d in docs[1:]:
        out = _cat(out, sep, d)
    return out


def _name(name: str) -> str:
    return name if name[0].isalpha() or name[0] == "_" else f"({name})"


def _paren(doc: Doc) -> Doc:
    return _cat("(", doc, ")")


def _bracket(open_: str, doc: Doc, close: str) -> Doc:
    # `['` would start a char-list literal
    if open_.endswith("[") and doc[0].startswith("'"):
        open_ += " "
    return _cat(open_, doc, close)


# -- types ---------------------------------------------------------------------

def _prefix(t: S.AttrType) -> str:
    return ("!" if t.strict else "") + t.attr.text()


def type_doc(t: S.AttrType, atomic: bool = False) -> str:
    """Render a type; `atomic` forces parentheses around applications and arrows."""
    pre = _prefix(t)
    if isinstance(t, S.TCon):
        core = t.name
    elif isinstance(t, S.TVar):
        core = t.name
    elif isinstance(t, S.TList):
        core = f"[{type_doc(t.elem)}]"
    elif isinstance(t, S.TArray):
        core = f"{{{t.flavour}{type_doc(t.elem)}}}"
    elif isinstance(t, S.TTuple):
        core = "(" + ", ".join(type_doc(e) for e in t.elems) + ")"
    elif isinstance(t, S.TOptional):
        core = "?" + type_doc(t.elem, atomic=True)
    elif isinstance(t, S.TForall):
        core = f"(A.{' '.join(t.vars)}: {type_doc(t.body)})"
    else:
        if isinstance(t, S.TApp):
            core = " ".join(type_doc(x, atomic=True) for x in (t.head, *t.args))
        else:
            core = f"{type_doc(t.arg, atomic=True)} -> {type_doc(t.result)}"
        if atomic or pre:
            core = f"({core})"
    return pre + core


def context_doc(ctx) -> str:
    return " & ".join(f"{_name(c.cls)} " + " ".join(type_doc(t, atomic=True) for t in c.types)
                      for c in ctx)


def sig_doc(sig: S.FunSig) -> str:
    if sig.args:
        text = " ".join(type_doc(a, atomic=True) for a in sig.args) + " -> " + type_doc(sig.result)
    elif isinstance(sig.result, S.TFun) and sig.result.attr.is_none and not sig.result.strict:
        text = f"({type_doc(sig.result)})"
    else:
        text = type_doc(sig.result)
    if sig.context:
        text += " | " + context_doc(sig.context)
    if sig.attr_constraints:
        text += ", [" + ", ".join(f"{c.lesser}<={c.greater}" for c in sig.attr_constraints) + "]"
    return text


# -- patterns --------------------------------------------------------------------

def _lit(kind: str, text: str) -> str:
    return f"['{text}']" if kind == "charlist" else text


def pattern_doc(p: S.Pattern, atomic: bool = False) -> str:
    if isinstance(p, S.PVar):
        return p.name
    if isinstance(p, S.PWild):
        return "_"
    if isinstance(p, S.PLit):
        text = _lit(p.kind, p.text)
        return f"({text})" if atomic and text.startswith("-") else text
    if isinstance(p, S.PCon):
        if not p.args:
            return p.name
        text = p.name + " " + " ".join(pattern_doc(a, True) for a in p.args)
        return f"({text})" if atomic else text
    if isinstance(p, S.PTuple):
        return "(" + ", ".join(pattern_doc(e) for e in p.elems) + ")"
    if isinstance(p, S.PList):
        inner = ", ".join(pattern_doc(e) for e in p.elems)
        if p.tail is not None:
            inner += " : " + pattern_doc(p.tail)
        return f"[ {inner}]" if inner.startswith("'") else f"[{inner}]"
    if isinstance(p, S.PRecord):
        fields = ", ".join(f if sub is None else f"{f} = {pattern_doc(sub)}" for f, sub in p.fields)
        head = f"{p.type_name} | " if p.type_name else ""
        return f"{{{head}{fields}}}"
    if isinstance(p, S.PAs):
        return f"{p.name}=:{pattern_doc(p.inner, True)}"
    if isinstance(p, S.PDynamic):
        return f"({pattern_doc(p.inner)} :: {type_doc(p.type)})"
    raise TypeError(f"cannot print pattern {p!r}")


# -- expressions -----------------------------------------------------------------

class Printer:
    def __init__(self, fixities: dict[str, S.Fixity] | None = None):
        self.fixities = dict(BUILTIN_FIXITIES)
        self.fixities.update(fixities or {})

    def fixity(self, op: str) -> S.Fixity:
        return self.fixities.get(op, DEFAULT_FIXITY)

    def expr(self, e: S.Expr, ctx: int = TOP) -> Doc:
        if isinstance(e, _GREEDY):
            doc = self.greedy(e)
            return doc if ctx == TOP else _paren(doc)
        if isinstance(e, S.Infix):
            doc = self.infix(e)
            return doc if ctx <= INNER else _paren(doc)
        if isinstance(e, (S.Apply, S.If, S.DynamicIntro)):
            doc = self.application(e)
            return doc if ctx <= OPERAND else _paren(doc)
        if isinstance(e, S.Neg):
            return _cat("(-", self.expr(e.expr, ARG if isinstance(e.expr, S.Neg) else OPERAND), ")")
        return self.atom(e)

    def infix(self, e: S.Infix) -> Doc:
        fx = self.fixity(e.op)

        def side(child: S.Expr, left: bool) -> Doc:
            if isinstance(child, S.Infix):
                cfx = self.fixity(child.op)
                bare = cfx.precedence > fx.precedence or (
                    cfx.precedence == fx.precedence
                    and (cfx.assoc != "right" if left else fx.assoc == "right"))
                doc = self.infix(child)
                return doc if bare else _paren(doc)
            return self.expr(child, OPERAND)

        return _cat(side(e.left, True), f" {e.op} ", side(e.right, False))

    def application(self, e) -> Doc:
        if isinstance(e, S.Apply):
            return _join([self.expr(x, ARG) for x in (e.func, *e.args)], " ")
        if isinstance(e, S.If):
            return _cat("if ", _join([self.expr(x, ARG) for x in (e.cond, e.then, e.else_)], " "))
        return _cat("dynamic ", self.expr(e.expr, ARG))

    def greedy(self, e) -> Doc:
        if isinstance(e, S.Lambda):
            params = " ".join(pattern_doc(p, True) for p in e.params)
            return _cat(f"\\{params} -> ", self.expr(e.body))
        if isinstance(e, S.AsPredicate):
            return _cat(self.expr(e.expr, INNER), " =: ", pattern_doc(e.pattern))
        if isinstance(e, S.Case):
            head = _cat("case ", self.expr(e.scrutinee, INNER), " of")
            alts = [line for a in e.alts for line in self.body(pattern_doc(a.pattern), a.body, "->")]
            return head + _indent(alts, 2)
        defs = [self.local_def(d) for d in e.defs]
        doc = _cat("let ", defs[0])
        for d in defs[1:]:
            doc = doc + _indent(d, 4)
        return _hcat(doc, _cat(" in ", self.expr(e.body)))

    def atom(self, e: S.Expr) -> Doc:
        if isinstance(e, S.Var):
            return [_name(e.name)]
        if isinstance(e, S.Con):
            return [e.name]
        if isinstance(e, S.Lit):
            return [_lit(e.kind, e.text)]
        if isinstance(e, S.Tuple):
            return _cat("(", self.seq(e.elems), ")")
        if isinstance(e, S.ListLit):
            return _bracket("[", self.seq(e.elems), "]") if e.elems else ["[]"]
        if isinstance(e, S.ListCons):
            return _bracket("[", _cat(self.seq(e.elems), " : ", self.expr(e.tail)), "]")
        if isinstance(e, S.Range):
            parts = [self.expr(e.start, INNER)]
            if e.then is not None:
                parts += [", ", self.expr(e.then, INNER)]
            parts.append(" ..")
            if e.end is not None:
                parts += [" ", self.expr(e.end, INNER)]
            return _bracket("[", _cat(*parts), "]")
        if isinstance(e, S.Comprehension):
            return _bracket("[", _cat(self.expr(e.expr, INNER), " \\\\ ", self.qualifiers(e.qualifiers)), "]")
        if isinstance(e, S.ArrayComprehension):
            return _cat("{", self.expr(e.expr, INNER), " \\\\ ", self.qualifiers(e.qualifiers), "}")
        if isinstance(e, S.ArrayLit):
            return _cat("{", self.seq(e.elems), "}") if e.elems else ["{}"]
        if isinstance(e, S.RecordLit):
            head = f"{e.type_name} | " if e.type_name else ""
            return _cat("{", head, self.fields(e.fields), "}")
        if isinstance(e, S.RecordUpdate):
            return _cat("{", self.expr(e.record, INNER), " & ", self.fields(e.fields), "}")
        if isinstance(e, S.ArrayUpdate):
            ups = _join([_cat(_bracket("[", self.expr(i), "]"), " = ", self.expr(v)) for i, v in e.updates], ", ")
            return _cat("{", self.expr(e.array, INNER), " & ", ups, "}")
        if isinstance(e, S.FieldSelect):
            return _cat(self.expr(e.record, ARG), f".{e.field}")
        if isinstance(e, S.UniqueFieldSelect):
            return _cat(self.expr(e.record, ARG), f"!{e.field}")
        if isinstance(e, S.ArrayIndex):
            return _cat(self.expr(e.array, ARG), _bracket(".[", self.expr(e.index), "]"))
        if isinstance(e, S.UniqueArrayIndex):
            return _cat(self.expr(e.array, ARG), _bracket("![", self.expr(e.index), "]"))
        raise TypeError(f"cannot print expression {e!r}")

    def seq(self, elems) -> Doc:
        return _join([self.expr(x) for x in elems], ", ")

    def fields(self, fields) -> Doc:
        return _join([_cat(f"{name} = ", self.expr(v)) for name, v in fields], ", ")

    def qualifiers(self, quals) -> Doc:
        docs = []
        for q in quals:
            gens = [_cat(pattern_doc(g.pattern), " <-: " if g.array else " <- ", self.expr(g.source, INNER))
                    for g in q.generators]
            doc = _join(gens, " & ")
            for guard in q.guards:
                doc = _cat(doc, " | ", self.expr(guard, INNER))
            docs.append(doc)
        return _join(docs, ", ")

    # -- definitions ---------------------------------------------------------

    def body(self, head: str, b: S.Body, eq: str) -> Doc:
        if not (b.steps or b.guards or b.where):
            return _cat(head, f" {eq} ", self.expr(b.expr))
        lines: Doc = [head]
        for st in b.steps:
            lines += _indent(_cat("#! " if st.strict else "# ", pattern_doc(st.pattern), " = ",
                                  self.expr(st.expr)), 2)
        for g in b.guards:
            lines += _indent(_cat("| ", self.expr(g.cond, INNER), f" {eq} ", self.expr(g.expr)), 2)
        tail = b.default if b.guards else b.expr
        if tail is not None:
            lines += _indent(_cat(f"{eq} ", self.expr(tail)), 2)
        if b.where:
            lines += ["  where"] + _indent(self.defs(b.where), 4)
        return lines

    def defs(self, defs) -> Doc:
        return [line for d in defs for line in self.local_def(d)]

    def local_def(self, d) -> Doc:
        if isinstance(d, S.PatBinding):
            return self.body(pattern_doc(d.pattern), d.body, "=")
        return self.fundef(d)

    def fundef(self, fd: S.FunDef) -> Doc:
        name = _name(fd.name)
        lines: Doc = []
        fix = ""
        if fd.fixity is not None:
            kw = {"left": "infixl", "right": "infixr", "none": "infix"}[fd.fixity.assoc]
            fix = f" {kw} {fd.fixity.precedence}"
        if fd.signature is not None:
            lines.append(f"{name}{fix} :: {sig_doc(fd.signature)}")
        elif fix:
            lines.append(name + fix)
        for c in fd.clauses:
            head = " ".join([name, *(pattern_doc(p, True) for p in c.patterns)])
            lines += self.body(head, c.body, "=")
        return lines


# -- modules ---------------------------------------------------------------------

def _attr_prefix(attr: S.Attr) -> str:
    return attr.text()


def _ctor(c: S.CtorDef) -> str:
    text = ""
    if c.existentials:
        text = f"E.{' '.join(c.existentials)}: "
    text += " ".join([c.name, *(type_doc(t, atomic=True) for t in c.arg_types)])
    if c.context:
        text += " & " + context_doc(c.context)
    return text


def typedef_doc(td: S.TypeDef) -> str:
    head = " ".join([f":: {_attr_prefix(td.attr)}{td.name}", *td.type_vars])
    b = td.body
    if isinstance(b, S.Synonym):
        return f"{head} :== {type_doc(b.rhs)}"
    if isinstance(b, S.NewtypeLike):
        return f"{head} =: {_ctor(b.ctor)}"
    if isinstance(b, S.Record):
        return f"{head} = {{" + ", ".join(f"{f.name} :: {type_doc(f.type)}" for f in b.fields) + "}"
    if isinstance(b, S.Algebraic):
        return f"{head} = " + " | ".join(_ctor(c) for c in b.ctors)
    return head


def _import(imp: S.ImportDecl) -> str:
    if imp.form == "whole-module":
        return f"import {'qualified ' if imp.qualified else ''}{imp.module_name}"
    entries = []
    for e in imp.entries:
        if e.kind == "type":
            entries.append(f"::{e.name}")
        elif e.kind == "class":
            entries.append(f"class {_name(e.name)}")
        else:
            entries.append(_name(e.name))
    if imp.entries and all(e.qualified for e in imp.entries):
        return f"import {imp.module_name} => qualified " + ", ".join(entries)
    return f"from {imp.module_name} import " + ", ".join(entries)


def _generic(g: S.GenericStub) -> str:
    # derive lines and generic instances keep their full source text
    if g.signature_text.startswith(("derive ", f"{g.name} ")):
        return g.signature_text
    head = " ".join(x for x in ("generic", g.name, g.kind_var) if x)
    return f"{head} :: {g.signature_text}" if g.signature_text else head


def module_fixities(m: S.CleanModule) -> dict[str, S.Fixity]:
    out = {}
    for fd in (*m.functions, *(f for c in m.classes for f in c.members)):
        if fd.fixity is not None:
            out[fd.name] = fd.fixity
    return out


def print_module(m: S.CleanModule) -> str:
    pr = Printer(module_fixities(m))
    kw = "definition" if m.kind == "definition" else "implementation"
    blocks: list[Doc] = [[f"{kw} module {m.name}"]]
    if m.imports:
        blocks.append([_import(i) for i in m.imports])
    blocks += [[typedef_doc(td)] for td in m.typedefs]
    for c in m.classes:
        vars_ = " ".join(("~" if v.dependent else "") + v.name for v in c.vars)
        ctx = f" | {context_doc(c.context)}" if c.context else ""
        if c.single_member:
            member = c.members[0]
            fix = ""
            if member.fixity is not None:
                kw_ = {"left": "infixl", "right": "infixr", "none": "infix"}[member.fixity.assoc]
                fix = f" {kw_} {member.fixity.precedence}"
            blocks.append([f"class {_name(c.name)}{fix} {vars_}{ctx} :: {sig_doc(member.signature)}"])
        else:
            head = f"class {_name(c.name)} {vars_}{ctx}"
            blocks.append([head + " where"] + _indent(pr.defs(c.members), 2) if c.members else [head])
    for inst in m.instances:
        head = f"instance {_name(inst.cls)} " + " ".join(type_doc(t, atomic=True) for t in inst.types)
        if inst.context:
            head += f" | {context_doc(inst.context)}"
        blocks.append([head + " where"] + _indent(pr.defs(inst.members), 2) if inst.members else [head])
    blocks += [[_generic(g)] for g in m.generics]
    blocks += [pr.fundef(fd) for fd in m.functions]
    lines: Doc = []
    for b in blocks:
        if lines:
            lines.append("")
        lines += b
    return "\n".join(line.rstrip() for line in lines) + "\n"


def print_expr(e: S.Expr, fixities: dict[str, S.Fixity] | None = None) -> str:
    return "\n".join(Printer(fixities).expr(e))


def print_pattern(p: S.Pattern) -> str:
    return pattern_doc(p)


def print_type(t) -> str:
    return sig_doc(t) if isinstance(t, S.FunSig) else type_doc(t)
