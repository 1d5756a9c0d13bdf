"""Recursive-descent parser for the supported Clean subset."""

from __future__ import annotations

from dataclasses import replace

from . import syntax as S
from .lexer import Token, TokenKind, layout_insert, tokenize

# StdEnv fixities for the operators the corpus uses. User operators without a
# fixity declaration fall back to DEFAULT_FIXITY.
BUILTIN_FIXITIES: dict[str, S.Fixity] = {
    "||": S.Fixity("right", 2),
    "&&": S.Fixity("right", 3),
    "==": S.Fixity("none", 4),
    "<>": S.Fixity("none", 4),
    "<": S.Fixity("none", 4),
    "<=": S.Fixity("none", 4),
    ">": S.Fixity("none", 4),
    ">=": S.Fixity("none", 4),
    "++": S.Fixity("right", 5),
    "+++": S.Fixity("right", 5),
    "+": S.Fixity("left", 6),
    "-": S.Fixity("left", 6),
    "*": S.Fixity("left", 7),
    "/": S.Fixity("left", 7),
    "^": S.Fixity("right", 8),
    "!!": S.Fixity("left", 9),
}
DEFAULT_FIXITY = S.Fixity("left", 9)

# Symbols with a fixed syntactic role; never binary operators in expressions.
RESERVED_OPS = frozenset({
    "=", "|", "#", "#!", "->", "<-", "<-:", "\\\\", "\\", "&", "::", "=:",
    ".", "!", "..", ":==", ":=", "~", "A.", "E.", "?",
})

ASSOC_KEYWORDS = {"infixl": "left", "infixr": "right", "infix": "none"}


class ParseError(Exception):
    def __init__(self, token: Token, expected: set[str] | frozenset[str] | tuple = (),
                 message: str = ""):
        self.token = token
        self.span = token.span
        self.expected = frozenset(expected)
        found = repr(token)
        exp = ", ".join(sorted(self.expected))
        text = message or (f"expected one of {{{exp}}}, found {found}" if exp else f"unexpected {found}")
        super().__init__(f"{token.start}: {text}")


class KindMismatch(ParseError):
    pass


def _split_token(tok: Token, n: int) -> tuple[Token, Token]:
    """Split an operator token after its first n characters."""
    mid = S.SourcePos(tok.start.line, tok.start.column + n, tok.start.byte_offset + n)
    head = Token(TokenKind.OPERATOR, tok.text[:n], tok.start, mid)
    rest_text = tok.text[n:]
    kind = TokenKind.PUNCT if rest_text in (":", ",") else TokenKind.OPERATOR
    return head, Token(kind, rest_text, mid, tok.end)


def scan_fixities(tokens: list[Token]) -> dict[str, S.Fixity]:
    """Collect `(op) infixl n` declarations before expressions are parsed."""
    table = dict(BUILTIN_FIXITIES)
    toks = [t for t in tokens if t.kind is not TokenKind.LAYOUT]
    for i in range(len(toks) - 3):
        a, op, b, kw = toks[i:i + 4]
        if a.is_("(") and b.is_(")") and op.kind is TokenKind.OPERATOR \
                and kw.kind is TokenKind.KEYWORD and kw.text in ASSOC_KEYWORDS:
            prec = 9
            if i + 4 < len(toks) and toks[i + 4].kind is TokenKind.INT:
                prec = int(toks[i + 4].text)
            table[op.text] = S.Fixity(ASSOC_KEYWORDS[kw.text], prec)
    return table


class Parser:
    def __init__(self, tokens: list[Token], fixities: dict[str, S.Fixity] | None = None):
        self.toks = list(tokens)
        self.i = 0
        self.fixities = fixities if fixities is not None else scan_fixities(tokens)
        eof_at = tokens[-1].end if tokens else S.SourcePos(1, 1, 0)
        self.eof = Token(TokenKind.LAYOUT, "", eof_at, eof_at, "eof")

    # -- token helpers -------------------------------------------------------

    def peek(self, k: int = 0) -> Token:
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else self.eof

    def next(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return any(tok.is_(t) for t in texts)

    def at_layout(self, kind: str) -> bool:
        return self.peek().layout == kind

    def at_end_of_item(self) -> bool:
        return self.peek().layout in ("sep", "close", "eof")

    def accept(self, text: str) -> Token | None:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        if self.at(text):
            return self.next()
        # `->*World`, `::*a`: split glued operator runs at a known prefix
        tok = self.peek()
        if tok.kind is TokenKind.OPERATOR and tok.text.startswith(text) and len(tok.text) > len(text):
            head, rest = _split_token(tok, len(text))
            self.toks[self.i] = rest
            return head
        raise ParseError(tok, {text})

    def expect_layout(self, kind: str) -> Token:
        if self.peek().layout != kind:
            raise ParseError(self.peek(), {f"<{kind}>"})
        return self.next()

    def expect_kind(self, *kinds: TokenKind) -> Token:
        tok = self.peek()
        if tok.kind not in kinds:
            raise ParseError(tok, {k.value for k in kinds})
        return self.next()

    def span_from(self, start: Token):
        prev = self.toks[self.i - 1] if self.i > 0 else start
        return (start.start, prev.end)

    def block(self, item):
        """Parse `{ item ; item ... }` delimited by layout markers."""
        self.expect_layout("open")
        items = []
        while not self.at_layout("close"):
            if self.accept_layout("sep"):
                continue
            items.append(item())
            if not (self.at_layout("sep") or self.at_layout("close")):
                raise ParseError(self.peek(), {"<sep>", "<close>"})
        self.next()
        return items

    def accept_layout(self, kind: str) -> bool:
        if self.peek().layout == kind:
            self.next()
            return True
        return False

    # -- module ----------------------------------------------------------------

    def parse_module(self, expected_kind: str | None = None) -> S.CleanModule:
        self.expect_layout("open")
        while self.accept_layout("sep"):
            pass
        head = self.peek()
        kind = "implementation"
        if self.at("definition"):
            self.next()
            kind = "definition"
        elif self.at("implementation") or self.at("system"):
            self.next()
        self.expect("module")
        name = self.module_name()
        if expected_kind is not None and kind != expected_kind:
            raise KindMismatch(head, {f"{expected_kind} module"},
                               f"header declares a {kind} module, expected {expected_kind}")

        imports, typedefs, classes, instances, generics = [], [], [], [], []
        functions: dict[str, S.FunDef] = {}
        order: list[str] = []

        def add_function(fd: S.FunDef):
            if fd.signature is not None and fd.name in functions and functions[fd.name].signature:
                raise ParseError(tok, (), f"duplicate signature for {fd.name}")
            if fd.name not in functions:
                functions[fd.name] = fd
                order.append(fd.name)
            else:
                functions[fd.name] = _merge_fundefs(functions[fd.name], fd)

        while not self.at_layout("close"):
            if self.accept_layout("sep"):
                continue
            tok = self.peek()
            if self.at("import"):
                imports.extend(self.import_decl())
            elif self.at("from"):
                imports.append(self.from_import())
            elif self.at("::"):
                typedefs.append(self.typedef())
            elif self.at("class"):
                classes.append(self.class_def())
            elif self.at("instance"):
                instances.append(self.instance_def())
            elif self.at("generic") or self.at("derive"):
                generics.append(self.generic_stub())
            elif self.is_generic_instance():
                generics.append(self.generic_instance())
            elif tok.kind in (TokenKind.IDENT,) or tok.is_("Start") or self.at_operator_name():
                for fd in self.function_item():
                    add_function(fd)
            else:
                raise ParseError(tok, {"import", "from", "::", "class", "instance", "generic",
                                       "derive", "<function definition>"})
            if not (self.at_layout("sep") or self.at_layout("close")):
                raise ParseError(self.peek(), {"<sep>", "<close>"})
        self.next()
        if self.peek().layout != "eof":
            raise ParseError(self.peek(), {"<end of input>"})

        funs = tuple(functions[n] for n in order)
        if kind == "definition":
            for fd in funs:
                if fd.clauses:
                    raise ParseError(head, (), f"definition module defines a body for {fd.name}")
        return S.CleanModule(name, kind, tuple(imports), tuple(typedefs), tuple(classes),
                             tuple(instances), funs, tuple(generics), span=(head.start, head.end))

    def module_name(self) -> str:
        tok = self.expect_kind(TokenKind.CONID, TokenKind.IDENT)
        parts = [tok.text]
        while self.at(".") and self.peek(1).kind in (TokenKind.CONID, TokenKind.IDENT):
            self.next()
            parts.append(self.next().text)
        return ".".join(parts)

    # -- imports ---------------------------------------------------------------

    def import_decl(self) -> list[S.ImportDecl]:
        start = self.expect("import")
        qualified = False
        if self.peek().is_("qualified") and self.peek(1).kind is TokenKind.CONID:
            self.next()
            qualified = True
        names = [self.module_name()]
        if self.accept("=>"):
            self.expect("qualified")
            entries = tuple(replace(e, qualified=True) for e in self.import_entries())
            return [S.ImportDecl(names[0], "selective", entries, span=self.span_from(start))]
        while self.accept(","):
            names.append(self.module_name())
        return [S.ImportDecl(n, "whole-module", (), qualified, span=self.span_from(start)) for n in names]

    def from_import(self) -> S.ImportDecl:
        start = self.expect("from")
        name = self.module_name()
        self.expect("import")
        qualified = bool(self.accept("qualified"))
        entries = tuple(replace(e, qualified=qualified) for e in self.import_entries())
        return S.ImportDecl(name, "selective", entries, span=self.span_from(start))

    def import_entries(self) -> list[S.ImportEntry]:
        entries = [self.import_entry()]
        while self.accept(","):
            entries.append(self.import_entry())
        return entries

    def import_entry(self) -> S.ImportEntry:
        if self.accept("::"):
            name = self.expect_kind(TokenKind.CONID, TokenKind.IDENT).text
            if self.accept("("):
                while not self.at(")"):
                    self.next()
                self.expect(")")
            return S.ImportEntry("type", name)
        if self.accept("class"):
            return S.ImportEntry("class", self.name_or_op())
        return S.ImportEntry("function", self.name_or_op())

    def name_or_op(self) -> str:
        if self.at("("):
            self.next()
            op = self.expect_kind(TokenKind.OPERATOR).text
            self.expect(")")
            return op
        tok = self.peek()
        if tok.kind in (TokenKind.IDENT, TokenKind.CONID, TokenKind.OPERATOR) or tok.is_("Start"):
            return self.next().text
        raise ParseError(tok, {"<name>"})

    # -- type definitions -----------------------------------------------------

    def typedef(self) -> S.TypeDef:
        start = self.expect("::")
        attr = self.attribute()
        name = self.expect_kind(TokenKind.CONID).text
        tvars = []
        while not self.at_end_of_item() and not self.at("=", ":==", "=:"):
            self.attribute()
            tvars.append(self.expect_kind(TokenKind.IDENT).text)
        if self.accept(":=="):
            body = S.Synonym(self.parse_type())
        elif self.accept("=:"):
            body = S.NewtypeLike(self.ctor_def())
        elif self.accept("="):
            if self.at("{"):
                body = self.record_body()
            else:
                ctors = [self.ctor_def()]
                while self.accept("|"):
                    ctors.append(self.ctor_def())
                body = S.Algebraic(tuple(ctors))
        else:
            body = S.Abstract()
        return S.TypeDef(name, tuple(tvars), body, attr, span=self.span_from(start))

    def record_body(self) -> S.Record:
        lb = self.expect("{")
        fields = []
        seen = set()
        while True:
            ftok = self.expect_kind(TokenKind.IDENT)
            if ftok.text in seen:
                raise ParseError(ftok, (), f"duplicate record field {ftok.text}")
            seen.add(ftok.text)
            self.expect("::")
            fields.append(S.RecordField(ftok.text, self.parse_type()))
            if not self.accept(","):
                break
        self.expect("}")
        if not fields:
            raise ParseError(lb, (), "empty record")
        return S.Record(tuple(fields))

    def ctor_def(self) -> S.CtorDef:
        start = self.peek()
        exvars: list[str] = []
        if self.accept("E."):
            exvars.append(self.expect_kind(TokenKind.IDENT).text)
            while not self.at(":"):
                exvars.append(self.expect_kind(TokenKind.IDENT).text)
            self.expect(":")
        name = self.expect_kind(TokenKind.CONID).text
        args = []
        while self.starts_atype():
            args.append(self.atype())
        context: tuple[S.ClassConstraint, ...] = ()
        if self.accept("&"):
            context = self.context()
        return S.CtorDef(name, tuple(args), tuple(exvars), context, span=self.span_from(start))

    # -- types -----------------------------------------------------------------

    def attribute(self) -> S.Attr:
        tok = self.peek()
        if tok.is_("*"):
            self.next()
            return S.Attr("unique", span=tok.span)
        if tok.is_("."):
            self.next()
            return S.Attr("dot", span=tok.span)
        if tok.kind is TokenKind.IDENT and self.peek(1).is_(":") and not self.peek(2).is_(":"):
            self.next()
            self.next()
            return S.Attr("var", tok.text, span=tok.span)
        return S.NO_ATTR

    def starts_atype(self) -> bool:
        tok = self.peek()
        if tok.kind in (TokenKind.CONID, TokenKind.IDENT):
            return True
        if tok.is_("(") or tok.is_("[") or tok.is_("{") or tok.is_("A."):
            return True
        if tok.kind is TokenKind.OPERATOR and tok.text and all(c in "!*.?" for c in tok.text):
            return True
        return False

    def _prefix_ops(self) -> tuple[bool, S.Attr]:
        """Consume `!`, `*`, `.` and `u:` prefixes in any order."""
        strict = False
        attr = S.NO_ATTR
        while True:
            tok = self.peek()
            if tok.kind is TokenKind.OPERATOR and tok.text and tok.text[0] in "!*." \
                    and all(c in "!*." for c in tok.text):
                if len(tok.text) > 1:
                    head, rest = _split_token(tok, 1)
                    self.toks[self.i] = rest
                    tok = head
                else:
                    self.next()
                if tok.text == "!":
                    strict = True
                elif tok.text == "*":
                    attr = S.Attr("unique", span=tok.span)
                else:
                    attr = S.Attr("dot", span=tok.span)
                continue
            if tok.kind is TokenKind.IDENT and self.peek(1).is_(":"):
                self.next()
                self.next()
                attr = S.Attr("var", tok.text, span=tok.span)
                continue
            return strict, attr

    def atype(self) -> S.AttrType:
        start = self.peek()
        strict, attr = self._prefix_ops()
        tok = self.peek()
        if tok.is_("?"):
            self.next()
            inner = self.atype()
            t: S.AttrType = S.TOptional(inner)
        elif tok.kind is TokenKind.CONID:
            self.next()
            t = S.TCon(tok.text)
        elif tok.kind is TokenKind.IDENT:
            self.next()
            t = S.TVar(tok.text)
        elif tok.is_("A."):
            t = self.forall_type()
        elif tok.is_("("):
            self.next()
            if self.accept(")"):
                t = S.TCon("()")
            else:
                first = self.parse_type()
                if self.at(","):
                    elems = [first]
                    while self.accept(","):
                        elems.append(self.parse_type())
                    self.expect(")")
                    t = S.TTuple(tuple(elems))
                else:
                    self.expect(")")
                    if strict or not attr.is_none:
                        t = replace(first, strict=strict or first.strict,
                                    attr=attr if not attr.is_none else first.attr,
                                    span=self.span_from(start))
                        return t
                    return replace(first, span=self.span_from(start))
        elif tok.is_("["):
            self.next()
            t = S.TList(self.parse_type())
            self.expect("]")
        elif tok.is_("{"):
            self.next()
            flavour = ""
            if self.at("#") or self.at("!"):
                flavour = self.next().text
            t = S.TArray(self.parse_type(), flavour)
            self.expect("}")
        else:
            raise ParseError(tok, {"<type>"})
        return replace(t, strict=strict, attr=attr, span=self.span_from(start))

    def forall_type(self) -> S.AttrType:
        self.expect("A.")
        vars_ = [self.expect_kind(TokenKind.IDENT).text]
        while not self.at(":"):
            vars_.append(self.expect_kind(TokenKind.IDENT).text)
        self.expect(":")
        return S.TForall(tuple(vars_), self.parse_type())

    def parse_type(self) -> S.AttrType:
        """Full type: juxtaposed types before `->` are separate arguments."""
        start = self.peek()
        if self.at("A."):
            return self.forall_type()
        parts = [self.atype()]
        while self.starts_atype():
            parts.append(self.atype())
        if self.at("->") or (self.peek().kind is TokenKind.OPERATOR and self.peek().text.startswith("->")):
            self.expect("->")
            result = self.parse_type()
            for arg in reversed(parts):
                result = S.TFun(arg, result, span=self.span_from(start))
            return result
        if len(parts) == 1:
            return parts[0]
        return S.TApp(parts[0], tuple(parts[1:]), span=self.span_from(start))

    def context(self) -> tuple[S.ClassConstraint, ...]:
        """`C0 v0 & C1, C2 v1` -> (C0 v0), (C1 v1), (C2 v1)."""
        out = []
        while True:
            classes = [self.class_name()]
            while self.at(",") and not self.peek(1).is_("["):
                self.next()
                classes.append(self.class_name())
            types = []
            while self.starts_atype() and not self.at("&"):
                types.append(self.atype())
            if not types:
                raise ParseError(self.peek(), {"<type variable>"})
            out.extend(S.ClassConstraint(c, tuple(types)) for c in classes)
            if not self.accept("&"):
                return tuple(out)

    def class_name(self) -> str:
        tok = self.peek()
        if tok.kind in (TokenKind.CONID, TokenKind.IDENT):
            return self.next().text
        if tok.kind is TokenKind.OPERATOR and tok.text not in RESERVED_OPS:
            return self.next().text
        if tok.is_("("):
            return self.name_or_op()
        raise ParseError(tok, {"<class name>"})

    def attr_constraints(self) -> tuple[S.AttrConstraint, ...]:
        self.expect("[")
        out = []
        while True:
            lesser = [self.expect_kind(TokenKind.IDENT)]
            while self.peek().kind is TokenKind.IDENT:
                lesser.append(self.next())
            self.expect("<=")
            greater = self.expect_kind(TokenKind.IDENT)
            out.extend(S.AttrConstraint(t.text, greater.text, span=(t.start, greater.end)) for t in lesser)
            if not self.accept(","):
                break
        self.expect("]")
        return tuple(out)

    def signature(self) -> S.FunSig:
        """Type after `::` in a function or member signature."""
        start = self.peek()
        parts = [self.atype()]
        while self.starts_atype():
            parts.append(self.atype())
        if self.at("->") or (self.peek().kind is TokenKind.OPERATOR and self.peek().text.startswith("->")):
            self.expect("->")
            args = tuple(parts)
            result = self.parse_type()
        elif len(parts) == 1:
            args, result = (), parts[0]
        else:
            args, result = (), S.TApp(parts[0], tuple(parts[1:]))
        context: tuple[S.ClassConstraint, ...] = ()
        constraints: tuple[S.AttrConstraint, ...] = ()
        while True:
            if self.at("|") and not context:
                self.next()
                context = self.context()
            elif self.at(",") and self.peek(1).is_("[") and not constraints:
                self.next()
                constraints = self.attr_constraints()
            else:
                break
        return S.FunSig(args, result, context, constraints, span=self.span_from(start))

    # -- classes and instances ---------------------------------------------

    def class_def(self) -> S.ClassDef:
        start = self.expect("class")
        name = self.name_or_op()
        fixity = self.fixity()
        cvars = []
        while self.peek().kind is TokenKind.IDENT or self.at("~") or self.at("*") or self.at("."):
            dependent = bool(self.accept("~"))
            self.attribute()
            cvars.append(S.ClassVar(self.expect_kind(TokenKind.IDENT).text, dependent))
        if not cvars:
            raise ParseError(self.peek(), {"<class variable>"})
        context: tuple[S.ClassConstraint, ...] = ()
        if self.accept("|"):
            context = self.context()
        if self.accept("::"):
            sig = self.signature()
            member = S.FunDef(name, fixity, sig, (), span=self.span_from(start))
            return S.ClassDef(name, tuple(cvars), context, (member,), True, span=self.span_from(start))
        members: list[S.FunDef] = []
        if self.accept("where"):
            for item in self.block(self.local_item):
                for d in item:
                    if not isinstance(d, S.FunDef):
                        raise ParseError(start, (), "pattern binding in class body")
                    members = _add_local(members, d)
        return S.ClassDef(name, tuple(cvars), context, tuple(members), False, span=self.span_from(start))

    def instance_def(self) -> S.InstanceDef:
        start = self.expect("instance")
        cls = self.class_name()
        types = []
        while self.starts_atype():
            types.append(self.atype())
        if not types:
            raise ParseError(self.peek(), {"<type>"})
        context: tuple[S.ClassConstraint, ...] = ()
        if self.accept("|"):
            context = self.context()
        members: list[S.FunDef] = []
        if self.accept("where"):
            for item in self.block(self.local_item):
                for d in item:
                    if not isinstance(d, S.FunDef):
                        raise ParseError(start, (), "pattern binding in instance body")
                    members = _add_local(members, d)
        return S.InstanceDef(cls, tuple(types), context, tuple(members), span=self.span_from(start))

    # -- generics -------------------------------------------------------------

    def skip_item(self) -> list[Token]:
        """Consume tokens to the end of the current layout item."""
        taken = []
        depth = 0
        while True:
            tok = self.peek()
            if tok.layout == "eof":
                return taken
            if depth == 0 and tok.layout in ("sep", "close"):
                return taken
            if tok.layout == "open":
                depth += 1
            elif tok.layout == "close":
                depth -= 1
            taken.append(self.next())

    def generic_stub(self) -> S.GenericStub:
        start = self.peek()
        toks = self.skip_item()
        words = [t.text for t in toks if t.kind is not TokenKind.LAYOUT]
        text = " ".join(words)
        if start.text == "generic":
            name = words[1] if len(words) > 1 else ""
            kind_var = words[2] if len(words) > 2 and words[2] != "::" else ""
            sig = text.split("::", 1)[1].strip() if "::" in words else ""
            return S.GenericStub(name, kind_var, sig, (), span=(start.start, toks[-1].end))
        name = words[1] if len(words) > 1 else ""
        derives = tuple(w for w in words[2:] if w != ",")
        return S.GenericStub(name, "", text, derives, span=(start.start, toks[-1].end))

    def is_generic_instance(self) -> bool:
        return self.peek().kind is TokenKind.IDENT and self.peek(1).is_("{") and self.peek(2).text.startswith("|")

    def generic_instance(self) -> S.GenericStub:
        start = self.peek()
        toks = self.skip_item()
        text = " ".join(t.text for t in toks if t.kind is not TokenKind.LAYOUT)
        return S.GenericStub(start.text, "", text, (), span=(start.start, toks[-1].end))

    # -- functions ------------------------------------------------------------

    def at_operator_name(self) -> bool:
        return self.at("(") and self.peek(1).kind is TokenKind.OPERATOR and self.peek(2).is_(")")

    def fixity(self) -> S.Fixity | None:
        tok = self.peek()
        if tok.kind is TokenKind.KEYWORD and tok.text in ASSOC_KEYWORDS:
            self.next()
            prec = 9
            if self.peek().kind is TokenKind.INT:
                prec = int(self.next().text)
                if not 0 <= prec <= 9:
                    raise ParseError(tok, (), "precedence outside 0..9")
            return S.Fixity(ASSOC_KEYWORDS[tok.text], prec)
        return None

    def function_item(self) -> list[S.FunDef]:
        """A signature or one clause of a top-level or local function."""
        start = self.peek()
        name = self.name_or_op()
        fixity = self.fixity()
        if self.accept("::"):
            sig = self.signature()
            return [S.FunDef(name, fixity, sig, (), span=self.span_from(start))]
        if fixity is not None:
            return [S.FunDef(name, fixity, None, (), span=self.span_from(start))]
        pats = []
        while self.starts_apattern():
            pats.append(self.apattern())
        body = self.body(("=",))
        clause = S.Clause(tuple(pats), body, span=self.span_from(start))
        return [S.FunDef(name, None, None, (clause,), span=self.span_from(start))]

    def local_item(self) -> list[S.LocalDef]:
        tok = self.peek()
        if (tok.kind is TokenKind.IDENT and not self.peek(1).is_("=:")) or self.at_operator_name():
            return self.function_item()
        start = self.peek()
        pat = self.pattern()
        body = self.body(("=",))
        return [S.PatBinding(pat, body, span=self.span_from(start))]

    def local_block(self) -> tuple[S.LocalDef, ...]:
        defs: list[S.LocalDef] = []
        for item in self.block(self.local_item):
            for d in item:
                if isinstance(d, S.FunDef):
                    defs = _add_local(defs, d)
                else:
                    defs.append(d)
        return tuple(defs)

    def body(self, eq: tuple[str, ...]) -> S.Body:
        steps = []
        while self.at("#") or self.at("#!"):
            st = self.next()
            pat = self.pattern()
            self.expect("=")
            e = self.expr()
            steps.append(S.LetStep(st.text == "#!", pat, e, span=self.span_from(st)))
        expr = None
        guards = []
        default = None
        if self.at("|"):
            while self.accept("|"):
                cond = self.expr()
                self.expect_one(eq)
                guards.append(S.GuardAlt(cond, self.expr()))
            if self.at(*eq):
                self.next()
                default = self.expr()
        else:
            self.expect_one(eq)
            expr = self.expr()
        where: tuple[S.LocalDef, ...] = ()
        if self.at("where") or self.at("with"):
            self.next()
            where = self.local_block()
        return S.Body(tuple(steps), expr, tuple(guards), default, where)

    def expect_one(self, texts: tuple[str, ...]) -> Token:
        for t in texts:
            if self.at(t):
                return self.next()
        tok = self.peek()
        for t in sorted(texts, key=len, reverse=True):
            if tok.kind is TokenKind.OPERATOR and tok.text.startswith(t):
                return self.expect(t)
        raise ParseError(tok, set(texts))

    # -- patterns ---------------------------------------------------------------

    def starts_apattern(self) -> bool:
        tok = self.peek()
        if tok.kind in (TokenKind.IDENT, TokenKind.CONID, TokenKind.INT, TokenKind.REAL,
                        TokenKind.CHAR, TokenKind.CHARLIST, TokenKind.STRING):
            return True
        return tok.is_("(") or tok.is_("[") or tok.is_("{")

    def pattern(self) -> S.Pattern:
        start = self.peek()
        if start.kind is TokenKind.CONID:
            self.next()
            args = []
            while self.starts_apattern():
                args.append(self.apattern())
            return S.PCon(start.text, tuple(args), span=self.span_from(start))
        if start.is_("-") and self.peek(1).kind in (TokenKind.INT, TokenKind.REAL):
            self.next()
            lit = self.next()
            return S.PLit(_lit_kind(lit), "-" + lit.text, span=self.span_from(start))
        return self.apattern()

    def apattern(self) -> S.Pattern:
        start = self.peek()
        tok = self.next()
        if tok.kind is TokenKind.IDENT:
            if tok.text == "_":
                return S.PWild(span=tok.span)
            if self.at("=:"):
                self.next()
                inner = self.apattern()
                return S.PAs(tok.text, inner, span=self.span_from(start))
            return S.PVar(tok.text, span=tok.span)
        if tok.kind is TokenKind.CONID:
            return S.PCon(tok.text, (), span=tok.span)
        if tok.kind in (TokenKind.INT, TokenKind.REAL, TokenKind.CHAR, TokenKind.CHARLIST, TokenKind.STRING):
            return S.PLit(_lit_kind(tok), _lit_text(tok), span=tok.span)
        if tok.is_("("):
            if self.accept(")"):
                return S.PCon("()", (), span=self.span_from(start))
            first = self.pattern()
            if self.accept("::"):
                t = self.parse_type()
                self.expect(")")
                return S.PDynamic(first, t, span=self.span_from(start))
            if self.at(","):
                elems = [first]
                while self.accept(","):
                    elems.append(self.pattern())
                self.expect(")")
                return S.PTuple(tuple(elems), span=self.span_from(start))
            self.expect(")")
            return first
        if tok.is_("["):
            if self.accept("]"):
                return S.PList((), None, span=self.span_from(start))
            elems = [self.pattern()]
            while self.accept(","):
                elems.append(self.pattern())
            tail = None
            if self.accept(":"):
                tail = self.pattern()
            self.expect("]")
            return S.PList(tuple(elems), tail, span=self.span_from(start))
        if tok.is_("{"):
            type_name = None
            if self.peek().kind is TokenKind.CONID and self.peek(1).is_("|"):
                type_name = self.next().text
                self.next()
            fields = []
            while True:
                fname = self.expect_kind(TokenKind.IDENT).text
                sub = None
                if self.accept("="):
                    sub = self.pattern()
                fields.append((fname, sub))
                if not self.accept(","):
                    break
            self.expect("}")
            return S.PRecord(type_name, tuple(fields), span=self.span_from(start))
        self.i -= 1
        raise ParseError(tok, {"<pattern>"})

    # -- expressions ------------------------------------------------------------

    def starts_aexp(self) -> bool:
        tok = self.peek()
        if tok.kind in (TokenKind.IDENT, TokenKind.CONID, TokenKind.INT, TokenKind.REAL,
                        TokenKind.CHAR, TokenKind.CHARLIST, TokenKind.STRING):
            return tok.text != "_"
        return tok.is_("(") or tok.is_("[") or tok.is_("{")

    def at_binop(self) -> bool:
        tok = self.peek()
        return tok.kind is TokenKind.OPERATOR and tok.text not in RESERVED_OPS

    def expr(self) -> S.Expr:
        start = self.peek()
        e = self.opexpr()
        if self.at("=:"):
            self.next()
            pat = self.pattern()
            return S.AsPredicate(e, pat, span=self.span_from(start))
        return e

    def opexpr(self) -> S.Expr:
        operands = [self.operand()]
        ops: list[Token] = []
        while self.at_binop():
            ops.append(self.next())
            operands.append(self.operand())
        return self._resolve(operands, ops)

    def _resolve(self, operands: list[S.Expr], ops: list[Token]) -> S.Expr:
        # precedence climbing over an already-split operand/operator list
        pos = 0

        def climb(min_prec: int) -> S.Expr:
            nonlocal pos
            left = operands[pos]
            while pos < len(ops):
                op = ops[pos]
                fx = self.fixities.get(op.text, DEFAULT_FIXITY)
                if fx.precedence < min_prec:
                    break
                pos += 1
                next_min = fx.precedence if fx.assoc == "right" else fx.precedence + 1
                right = climb(next_min)
                span = (left.span[0], right.span[1]) if left.span and right.span else None
                left = S.Infix(op.text, left, right, span=span)
            return left

        return climb(0)

    def operand(self) -> S.Expr:
        start = self.peek()
        if self.at("-") or self.at("~"):
            self.next()
            return S.Neg(self.operand(), span=self.span_from(start))
        if self.at("\\"):
            self.next()
            params = [self.apattern()]
            while self.starts_apattern():
                params.append(self.apattern())
            self.expect_one(("->", ".", "="))
            body = self.expr()
            return S.Lambda(tuple(params), body, span=self.span_from(start))
        if self.at("if"):
            self.next()
            cond = self.selexp()
            then = self.selexp()
            else_ = self.selexp()
            return S.If(cond, then, else_, span=self.span_from(start))
        if self.at("case"):
            self.next()
            scrut = self.expr()
            self.expect("of")
            alts = self.block(self.alt)
            return S.Case(scrut, tuple(alts), span=self.span_from(start))
        if self.at("let"):
            self.next()
            defs = self.local_block()
            self.expect("in")
            return S.Let(defs, self.expr(), span=self.span_from(start))
        if self.at("dynamic"):
            self.next()
            return S.DynamicIntro(self.selexp(), span=self.span_from(start))
        head = self.selexp()
        args = []
        while self.starts_aexp():
            args.append(self.selexp())
        if args:
            return S.Apply(head, tuple(args), span=self.span_from(start))
        return head

    def alt(self) -> S.Alt:
        start = self.peek()
        pat = self.pattern()
        body = self.body(("->", "="))
        return S.Alt(pat, body, span=self.span_from(start))

    def selexp(self) -> S.Expr:
        start = self.peek()
        e = self.aexp()
        while True:
            if self.at(".") and self.peek(1).kind is TokenKind.IDENT:
                self.next()
                e = S.FieldSelect(e, self.next().text, span=self.span_from(start))
            elif self.at(".") and self.peek(1).is_("["):
                self.next()
                self.next()
                idx = self.expr()
                self.expect("]")
                e = S.ArrayIndex(e, idx, span=self.span_from(start))
            elif self.at("!") and self.peek(1).kind is TokenKind.IDENT:
                self.next()
                e = S.UniqueFieldSelect(e, self.next().text, span=self.span_from(start))
            elif self.at("!") and self.peek(1).is_("["):
                self.next()
                self.next()
                idx = self.expr()
                self.expect("]")
                e = S.UniqueArrayIndex(e, idx, span=self.span_from(start))
            else:
                return e

    def aexp(self) -> S.Expr:
        start = self.peek()
        tok = self.peek()
        if tok.kind is TokenKind.IDENT and tok.text != "_":
            self.next()
            return S.Var(tok.text, span=tok.span)
        if tok.kind is TokenKind.CONID:
            self.next()
            return S.Con(tok.text, span=tok.span)
        if tok.kind in (TokenKind.INT, TokenKind.REAL, TokenKind.CHAR, TokenKind.CHARLIST, TokenKind.STRING):
            self.next()
            return S.Lit(_lit_kind(tok), _lit_text(tok), span=tok.span)
        if tok.is_("("):
            self.next()
            if self.accept(")"):
                return S.Con("()", span=self.span_from(start))
            if self.peek().kind is TokenKind.OPERATOR and self.peek(1).is_(")") \
                    and self.peek().text != "\\":
                op = self.next().text
                self.next()
                return S.Var(op, span=self.span_from(start))
            first = self.expr()
            if self.at(","):
                elems = [first]
                while self.accept(","):
                    elems.append(self.expr())
                self.expect(")")
                return S.Tuple(tuple(elems), span=self.span_from(start))
            self.expect(")")
            return first
        if tok.is_("["):
            return self.list_expr()
        if tok.is_("{"):
            return self.brace_expr()
        raise ParseError(tok, {"<expression>"})

    def list_expr(self) -> S.Expr:
        start = self.expect("[")
        if self.accept("]"):
            return S.ListLit((), span=self.span_from(start))
        first = self.expr()
        if self.accept("\\\\"):
            quals = self.qualifiers()
            self.expect("]")
            return S.Comprehension(first, quals, span=self.span_from(start))
        if self.accept(".."):
            end = None if self.at("]") else self.expr()
            self.expect("]")
            return S.Range(first, None, end, span=self.span_from(start))
        elems = [first]
        while self.accept(","):
            elems.append(self.expr())
            if len(elems) == 2 and self.accept(".."):
                end = None if self.at("]") else self.expr()
                self.expect("]")
                return S.Range(elems[0], elems[1], end, span=self.span_from(start))
        if self.accept(":"):
            tail = self.expr()
            self.expect("]")
            return S.ListCons(tuple(elems), tail, span=self.span_from(start))
        self.expect("]")
        return S.ListLit(tuple(elems), span=self.span_from(start))

    def qualifiers(self) -> tuple[S.Qualifier, ...]:
        quals = [self.qualifier()]
        while self.accept(","):
            quals.append(self.qualifier())
        return tuple(quals)

    def qualifier(self) -> S.Qualifier:
        gens = [self.generator()]
        while self.accept("&"):
            gens.append(self.generator())
        guards = []
        while self.accept("|"):
            guards.append(self.expr())
        return S.Qualifier(tuple(gens), tuple(guards))

    def generator(self) -> S.Generator:
        pat = self.pattern()
        if self.accept("<-:"):
            return S.Generator(pat, self.expr(), True)
        self.expect("<-")
        return S.Generator(pat, self.expr(), False)

    def brace_expr(self) -> S.Expr:
        start = self.expect("{")
        if self.accept("}"):
            return S.ArrayLit((), span=self.span_from(start))
        if self.peek().kind is TokenKind.CONID and self.peek(1).is_("|"):
            type_name = self.next().text
            self.next()
            return S.RecordLit(type_name, self.field_assigns(), span=self.span_from(start))
        if self.peek().kind is TokenKind.IDENT and self.peek(1).is_("="):
            return S.RecordLit(None, self.field_assigns(), span=self.span_from(start))
        first = self.expr()
        if self.accept("&"):
            if self.at("["):
                updates = []
                while True:
                    self.expect("[")
                    idx = self.expr()
                    self.expect("]")
                    self.expect("=")
                    updates.append((idx, self.expr()))
                    if not self.accept(","):
                        break
                self.expect("}")
                return S.ArrayUpdate(first, tuple(updates), span=self.span_from(start))
            fields = []
            while True:
                fname = self.expect_kind(TokenKind.IDENT).text
                self.expect("=")
                fields.append((fname, self.expr()))
                if not self.accept(","):
                    break
            self.expect("}")
            return S.RecordUpdate(first, tuple(fields), span=self.span_from(start))
        if self.accept("\\\\"):
            quals = self.qualifiers()
            self.expect("}")
            return S.ArrayComprehension(first, quals, span=self.span_from(start))
        elems = [first]
        while self.accept(","):
            elems.append(self.expr())
        self.expect("}")
        return S.ArrayLit(tuple(elems), span=self.span_from(start))

    def field_assigns(self) -> tuple[tuple[str, S.Expr], ...]:
        fields = []
        while True:
            fname = self.expect_kind(TokenKind.IDENT).text
            self.expect("=")
            fields.append((fname, self.expr()))
            if not self.accept(","):
                break
        self.expect("}")
        return tuple(fields)


def _lit_kind(tok: Token) -> str:
    return {
        TokenKind.INT: "int", TokenKind.REAL: "real", TokenKind.CHAR: "char",
        TokenKind.CHARLIST: "charlist", TokenKind.STRING: "string",
    }[tok.kind]


def _lit_text(tok: Token) -> str:
    if tok.kind is TokenKind.CHARLIST:
        return tok.text[2:-2]  # strip `['` and `']`
    return tok.text


def _merge_fundefs(a: S.FunDef, b: S.FunDef) -> S.FunDef:
    return S.FunDef(
        a.name,
        a.fixity or b.fixity,
        a.signature or b.signature,
        a.clauses + b.clauses,
        span=a.span,
    )


def _add_local(defs: list, fd: S.FunDef) -> list:
    for k, d in enumerate(defs):
        if isinstance(d, S.FunDef) and d.name == fd.name:
            defs[k] = _merge_fundefs(d, fd)
            return defs
    defs.append(fd)
    return defs


# -- entry points ---------------------------------------------------------------

def parse_module(tokens: list[Token], expected_kind: str | None = None) -> S.CleanModule:
    """Parse a layout-marked token stream into a CleanModule."""
    return Parser(tokens).parse_module(expected_kind)


def parse_source(source: str, expected_kind: str | None = None) -> S.CleanModule:
    return parse_module(layout_insert(tokenize(source)), expected_kind)


def _parse_fragment(source: str, rule: str):
    p = Parser(layout_insert(tokenize(source)))
    p.expect_layout("open")
    result = getattr(p, rule)()
    p.expect_layout("close")
    if p.peek().layout != "eof":
        raise ParseError(p.peek(), {"<end of input>"})
    return result


def parse_expr(source: str) -> S.Expr:
    """Parse a single-line expression (no layout blocks)."""
    return _parse_fragment(source, "expr")


def parse_type(source: str) -> S.FunSig | S.AttrType:
    """Parse a type; a trailing `| context` or `, [u<=v]` yields a FunSig."""
    sig = _parse_fragment(source, "signature")
    if sig.args or sig.context or sig.attr_constraints:
        return sig
    return sig.result


def parse_pattern(source: str) -> S.Pattern:
    return _parse_fragment(source, "pattern")
