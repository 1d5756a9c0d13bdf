"""Render the Haskell AST as source text."""

from __future__ import annotations

from dataclasses import dataclass

from . import hs as H

# Prelude fixities: operator -> (assoc, precedence)
STANDARD_FIXITIES: dict[str, tuple[str, int]] = {
    "$": ("infixr", 0), "$!": ("infixr", 0), "seq": ("infixr", 0),
    ">>": ("infixl", 1), ">>=": ("infixl", 1),
    "||": ("infixr", 2), "&&": ("infixr", 3),
    "==": ("infix", 4), "/=": ("infix", 4), "<": ("infix", 4), "<=": ("infix", 4),
    ">": ("infix", 4), ">=": ("infix", 4), "elem": ("infix", 4), "notElem": ("infix", 4),
    ":": ("infixr", 5), "++": ("infixr", 5),
    "+": ("infixl", 6), "-": ("infixl", 6), "<>": ("infixr", 6),
    "*": ("infixl", 7), "/": ("infixl", 7), "div": ("infixl", 7), "mod": ("infixl", 7),
    "rem": ("infixl", 7), "quot": ("infixl", 7),
    "^": ("infixr", 8), "^^": ("infixr", 8), "**": ("infixr", 8),
    ".": ("infixr", 9), "!!": ("infixl", 9), "!": ("infixl", 9), "//": ("infixl", 9),
}
DEFAULT_FIXITY = ("infixl", 9)

# Precedence levels for non-operator forms.
OPEN = -1   # lambda, if, case, let, type annotation: extend as far right as possible
BRACED = 9.75  # `case e of { ... }` ends at its brace: any operand, never an argument
APP = 10
RECORD = 10.5  # `r { f = e }` binds tighter than application
ATOM = 11

_OPEN_FORMS = (H.Lambda, H.If, H.Let)


@dataclass(frozen=True)
class RenderStyle:
    indent_width: int = 2
    max_line: int = 100
    pragma_style: str = "one-per-line"  # or "combined"

    def __post_init__(self):
        if self.indent_width < 1:
            raise ValueError("indent_width must be at least 1")
        if self.pragma_style not in ("one-per-line", "combined"):
            raise ValueError(f"unknown pragma style {self.pragma_style!r}")


def is_operator(name: str) -> bool:
    return not (name[0].isalpha() or name[0] == "_" or name[0] in "([")


def var_name(name: str) -> str:
    return f"({name})" if is_operator(name) else name


def op_name(name: str) -> str:
    return name if is_operator(name) else f"`{name}`"


class Renderer:
    def __init__(self, style: RenderStyle | None = None, fixities: dict | None = None):
        self.style = style or RenderStyle()
        self.fixities = dict(STANDARD_FIXITIES)
        self.fixities.update(fixities or {})
        self.ind = " " * self.style.indent_width

    # -- types ---------------------------------------------------------------

    def type(self, t, level: int = 0) -> str:
        """level 0: anywhere; 1: left of an arrow; 2: type argument."""
        if isinstance(t, (H.TCon, H.TVar)):
            return t.name
        if isinstance(t, H.TList):
            return f"[{self.type(t.elem)}]"
        if isinstance(t, H.TTuple):
            return "(" + ", ".join(self.type(e) for e in t.elems) + ")"
        if isinstance(t, H.TApp):
            text = " ".join([self.type(t.head, 2)] + [self.type(a, 2) for a in t.args])
            return f"({text})" if level >= 2 else text
        if isinstance(t, H.TFun):
            text = f"{self.type(t.arg, 1)} -> {self.type(t.result)}"
            return f"({text})" if level >= 1 else text
        if isinstance(t, H.TForall):
            text = f"forall {' '.join(t.vars)}. {self.type(t.body)}"
            return f"({text})" if level >= 1 else text
        if isinstance(t, H.TBang):
            return "!" + self.type(t.inner, 2)
        if isinstance(t, H.Qual):
            text = f"{self.context(t.context)}{self.type(t.body)}"
            return f"({text})" if level >= 1 else text
        raise TypeError(f"not a type: {t!r}")

    def context(self, ctx) -> str:
        if not ctx:
            return ""
        items = [self.assertion(a) for a in ctx]
        if len(items) == 1:
            return items[0] + " => "
        return "(" + ", ".join(items) + ") => "

    def assertion(self, a: H.Assert) -> str:
        return " ".join([a.cls] + [self.type(t, 2) for t in a.types])

    # -- patterns ------------------------------------------------------------

    def pat(self, p, atomic: bool = False) -> str:
        if isinstance(p, H.PVar):
            return var_name(p.name)
        if isinstance(p, H.PWild):
            return "_"
        if isinstance(p, H.PLit):
            return f"({p.text})" if atomic and p.text.startswith("-") else p.text
        if isinstance(p, H.PCon):
            if not p.args:
                return p.name
            text = " ".join([p.name] + [self.pat(a, True) for a in p.args])
            return f"({text})" if atomic else text
        if isinstance(p, H.PCons):
            head = self.pat(p.head, isinstance(p.head, H.PCons))
            text = f"{head} : {self.pat(p.tail)}"
            return f"({text})" if atomic else text
        if isinstance(p, H.PList):
            return "[" + ", ".join(self.pat(e) for e in p.elems) + "]"
        if isinstance(p, H.PTuple):
            return "(" + ", ".join(self.pat(e) for e in p.elems) + ")"
        if isinstance(p, H.PRec):
            fields = ", ".join(name if sub is None else f"{name} = {self.pat(sub)}"
                               for name, sub in p.fields)
            text = f"{p.con} {{{fields}}}" if fields else f"{p.con} {{}}"
            return f"({text})" if atomic else text
        if isinstance(p, H.PAs):
            return f"{p.name}@{self.pat(p.inner, True)}"
        if isinstance(p, H.PBang):
            return "!" + self.pat(p.inner, True)
        raise TypeError(f"not a pattern: {p!r}")

    # -- expressions ---------------------------------------------------------

    def fixity(self, op: str) -> tuple[str, int]:
        return self.fixities.get(op, DEFAULT_FIXITY)

    def prec(self, e) -> float:
        if isinstance(e, H.Case):
            return BRACED
        if isinstance(e, (H.Lambda, H.If, H.Let, H.Sig)):
            return OPEN
        if isinstance(e, H.InfixApp):
            return self.fixity(e.op)[1]
        if isinstance(e, H.Neg):
            return 6
        if isinstance(e, H.App):
            return APP
        if isinstance(e, (H.RecCon, H.RecUpd)):
            return RECORD
        return ATOM

    def expr(self, e, min_prec: float = OPEN, tail: bool = True) -> str:
        """`tail`: nothing follows the text before a closing delimiter, so an
        open form (lambda, if, let) may stay bare as an operand."""
        paren = self.prec(e) < min_prec and not (tail and min_prec < APP and isinstance(e, _OPEN_FORMS))
        text = self._expr(e, tail or paren)
        return f"({text})" if paren else text

    def _expr(self, e, tail: bool = True) -> str:
        if isinstance(e, H.Var):
            return var_name(e.name)
        if isinstance(e, H.Con):
            return var_name(e.name) if e.name != "()" else "()"
        if isinstance(e, H.Lit):
            return e.text
        if isinstance(e, H.App):
            return " ".join([self.expr(e.func, APP, False)] + [self.expr(a, ATOM, False) for a in e.args])
        if isinstance(e, H.InfixApp):
            assoc, p = self.fixity(e.op)
            left = self.expr(e.left, p if assoc == "infixl" else p + 0.5, False)
            # a negated right operand needs the operator to bind looser than `-`
            right_prec = p if assoc == "infixr" and not (p >= 6 and isinstance(e.right, H.Neg)) else p + 0.5
            right = self.expr(e.right, right_prec, tail)
            return f"{left} {op_name(e.op)} {right}"
        if isinstance(e, H.Neg):
            inner = self.expr(e.expr, 7, tail)
            return ("- " if inner.startswith("\\") else "-") + inner
        if isinstance(e, H.Lambda):
            params = " ".join(self.pat(p, True) for p in e.params)
            return f"\\{params} -> {self.expr(e.body)}"
        if isinstance(e, H.If):
            return f"if {self.expr(e.cond)} then {self.expr(e.then)} else {self.expr(e.else_)}"
        if isinstance(e, H.Case):
            alts = "; ".join(self.rhs_inline(self.pat(a.pattern), a.rhs, "->") for a in e.alts)
            return f"case {self.expr(e.scrutinee)} of {{ {alts} }}"
        if isinstance(e, H.Let):
            return f"let {{ {self.decls_inline(e.binds)} }} in {self.expr(e.body)}"
        if isinstance(e, H.Tuple):
            return "(" + ", ".join(self.expr(x) for x in e.elems) + ")"
        if isinstance(e, H.List):
            return "[" + ", ".join(self.expr(x) for x in e.elems) + "]"
        if isinstance(e, H.Range):
            text = self.expr(e.start)
            if e.then is not None:
                text += ", " + self.expr(e.then)
            text += " .."
            if e.end is not None:
                text += " " + self.expr(e.end)
            return f"[{text}]"
        if isinstance(e, H.Comp):
            branches = " | ".join(", ".join(self.stmt(s) for s in b) for b in e.branches)
            return f"[{self.expr(e.expr)} | {branches}]"
        if isinstance(e, H.RecCon):
            return f"{e.con} {{{self.field_binds(e.fields)}}}"
        if isinstance(e, H.RecUpd):
            return f"{self.expr(e.record, ATOM, False)} {{{self.field_binds(e.fields)}}}"
        if isinstance(e, H.Sig):
            return f"{self.expr(e.expr, 0, False)} :: {self.type(e.type)}"
        raise TypeError(f"not an expression: {e!r}")

    def field_binds(self, fields) -> str:
        inner = ", ".join(f"{name} = {self.expr(v)}" for name, v in fields)
        return f" {inner} " if inner else ""

    def stmt(self, s) -> str:
        if isinstance(s, H.Gen):
            return f"{self.pat(s.pattern)} <- {self.expr(s.source)}"
        return self.expr(s.cond)

    # -- right-hand sides and declarations -----------------------------------

    def rhs_inline(self, head: str, rhs: H.Rhs, eq: str) -> str:
        if isinstance(rhs.body, H.GuardedRhs):
            text = head + "".join(f" | {self.expr(c)} {eq} {self.expr(x)}" for c, x in rhs.body.guards)
        else:
            text = f"{head} {eq} {self.expr(rhs.body)}"
        if rhs.where:
            text += f" where {{ {self.decls_inline(rhs.where)} }}"
        return text

    def rhs_lines(self, head: str, rhs: H.Rhs, eq: str, indent: str) -> list[str]:
        inner = indent + self.ind
        body = rhs.body
        if isinstance(body, H.GuardedRhs):
            lines = [indent + head]
            lines += [f"{inner}| {self.expr(c)} {eq} {self.expr(x)}" for c, x in body.guards]
        elif isinstance(body, H.Case):
            lines = [f"{indent}{head} {eq} case {self.expr(body.scrutinee)} of"]
            for alt in body.alts:
                lines += self.rhs_lines(self.pat(alt.pattern), alt.rhs, "->", inner)
        else:
            lines = [f"{indent}{head} {eq} {self.expr(body)}"]
        if rhs.where:
            lines.append(inner + "where")
            for d in rhs.where:
                lines += self.decl_lines(d, inner + self.ind)
        return lines

    def match_head(self, name: str, m: H.Match) -> str:
        return " ".join([var_name(name)] + [self.pat(p, True) for p in m.patterns])

    def decls_inline(self, decls) -> str:
        parts = []
        for d in decls:
            if isinstance(d, H.FunBind):
                parts += [self.rhs_inline(self.match_head(d.name, m), m.rhs, "=") for m in d.matches]
            elif isinstance(d, H.PatBind):
                parts.append(self.rhs_inline(self.pat(d.pattern), d.rhs, "="))
            else:
                parts += [line.strip() for line in self.decl_lines(d, "")]
        return "; ".join(parts)

    def decl_lines(self, d, indent: str = "") -> list[str]:
        if isinstance(d, H.FunBind):
            lines = []
            for m in d.matches:
                lines += self.rhs_lines(self.match_head(d.name, m), m.rhs, "=", indent)
            return lines
        if isinstance(d, H.PatBind):
            return self.rhs_lines(self.pat(d.pattern), d.rhs, "=", indent)
        if isinstance(d, H.TypeSig):
            names = ", ".join(var_name(n) for n in d.names)
            return [f"{indent}{names} :: {self.type(d.type)}"]
        if isinstance(d, H.Fixity):
            return [f"{indent}{d.assoc} {d.precedence} " + ", ".join(op_name(o) for o in d.ops)]
        if isinstance(d, H.TypeSyn):
            head = " ".join((d.name, *d.vars))
            return [f"{indent}type {head} = {self.type(d.type)}"]
        if isinstance(d, H.DataDecl):
            return self.data_lines(d, indent)
        if isinstance(d, H.ClassDecl):
            head = " ".join((d.name, *d.vars))
            if d.fundeps:
                head += " | " + ", ".join(f"{' '.join(a)} -> {' '.join(b)}" for a, b in d.fundeps)
            return self.with_body(f"{indent}class {self.context(d.context)}{head}", d.body, indent)
        if isinstance(d, H.InstDecl):
            head = " ".join([d.cls] + [self.type(t, 2) for t in d.types])
            return self.with_body(f"{indent}instance {self.context(d.context)}{head}", d.body, indent)
        if isinstance(d, H.Comment):
            return [f"{indent}-- {line}".rstrip() for line in d.lines]
        raise TypeError(f"not a declaration: {d!r}")

    def with_body(self, head: str, body, indent: str) -> list[str]:
        if not body:
            return [head]
        lines = [head + " where"]
        for d in body:
            lines += self.decl_lines(d, indent + self.ind)
        return lines

    def con_decl(self, c: H.ConDecl) -> str:
        text = ""
        if c.existentials:
            text += f"forall {' '.join(c.existentials)}. "
        text += self.context(c.context)
        if c.fields is not None:
            fields = ", ".join(f"{n} :: {self.type(t)}" for n, t in c.fields)
            return text + f"{c.name} {{ {fields} }}"
        return text + " ".join([c.name] + [self.type(a, 2) for a in c.args])

    def data_lines(self, d: H.DataDecl, indent: str) -> list[str]:
        keyword = "newtype" if d.newtype else "data"
        head = f"{indent}{keyword} {' '.join((d.name, *d.vars))}"
        if not d.ctors:
            return [head]
        ctors = [self.con_decl(c) for c in d.ctors]
        one_line = f"{head} = {' | '.join(ctors)}"
        if len(one_line) <= self.style.max_line or len(ctors) == 1:
            return [one_line]
        inner = indent + self.ind
        return [head] + [f"{inner}{'=' if i == 0 else '|'} {c}" for i, c in enumerate(ctors)]

    # -- module --------------------------------------------------------------

    def export(self, x: H.Export) -> str:
        if x.kind == "all":
            return f"{x.name}(..)"
        return var_name(x.name) if x.kind == "var" else x.name

    def import_line(self, i: H.Import) -> str:
        text = "import " + ("qualified " if i.qualified else "") + i.module
        if i.items is not None:
            text += (" hiding" if i.hiding else "") + " (" + ", ".join(var_name(n) for n in i.items) + ")"
        return text

    def module(self, m: H.Module) -> str:
        lines = []
        pragmas = sorted(m.pragmas)
        if pragmas and self.style.pragma_style == "combined":
            lines.append("{-# LANGUAGE " + ", ".join(pragmas) + " #-}")
        else:
            lines += [f"{{-# LANGUAGE {p} #-}}" for p in pragmas]
        header = f"module {m.name}"
        if m.exports is not None:
            header += " (" + ", ".join(self.export(x) for x in m.exports) + ")"
        lines.append(header + " where")
        if m.imports:
            lines.append("")
            lines += [self.import_line(i) for i in m.imports]
        previous = None
        for d in m.decls:
            if not isinstance(previous, (H.TypeSig, H.Fixity)):
                lines.append("")
            lines += self.decl_lines(d)
            previous = d
        return "\n".join(line.rstrip() for line in lines) + "\n"


def module_fixities(m: H.Module) -> dict:
    out = {}
    for d in m.decls:
        if isinstance(d, H.Fixity):
            for op in d.ops:
                out[op] = (d.assoc, d.precedence)
    return out


def emit(m: H.Module, style: RenderStyle | None = None) -> str:
    """Render a whole module; the output always ends with one newline."""
    return Renderer(style, module_fixities(m)).module(m)


def emit_expr(e, style: RenderStyle | None = None, fixities: dict | None = None) -> str:
    return Renderer(style, fixities).expr(e)
