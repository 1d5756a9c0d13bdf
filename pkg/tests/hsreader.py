"""A small Haskell reader for the subset the emitter produces.

Test-only: it turns emitted text (and hand-written expected files) back
into the translator's target AST so outputs can be compared structurally.
Line comments at the top level become `Comment` declarations; block
comments are discarded.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from clean2hs import hs as H
from clean2hs.emitter import DEFAULT_FIXITY, STANDARD_FIXITIES

SYMBOL_CHARS = set("!#$%&*+./<=>?@\\^|-~:")
RESERVED_OPS = {"..", "::", "=", "\\", "|", "<-", "->", "@", "=>"}
KEYWORDS = {"case", "class", "data", "else", "if", "import", "in", "infix", "infixl",
            "infixr", "instance", "let", "module", "newtype", "of", "then", "type",
            "where", "qualified", "hiding", "forall"}
LAYOUT_OPENERS = {"where", "let", "of"}


class ReadError(Exception):
    pass


@dataclass
class Tok:
    kind: str  # var con sym int real char string special comment pragma vopen vsemi vclose eof
    text: str
    line: int = 0
    col: int = 0


_NUMBER = re.compile(r"0[xX][0-9a-fA-F]+|\d+(\.\d+)?([eE][+-]?\d+)?")


def lex(src: str) -> list[Tok]:
    out: list[Tok] = []
    i, line, col = 0, 1, 1

    def adv(n: int):
        nonlocal i, line, col
        for _ in range(n):
            if src[i] == "\n":
                line, col = line + 1, 1
            else:
                col += 1
            i += 1

    while i < len(src):
        c = src[i]
        if c in " \t\r\n":
            adv(1)
            continue
        start_line, start_col = line, col
        if src.startswith("{-#", i):
            j = src.index("#-}", i) + 3
            out.append(Tok("pragma", src[i:j], start_line, start_col))
            adv(j - i)
            continue
        if src.startswith("{-", i):
            depth, j = 0, i
            while True:
                if src.startswith("{-", j):
                    depth, j = depth + 1, j + 2
                elif src.startswith("-}", j):
                    depth, j = depth - 1, j + 2
                    if depth == 0:
                        break
                elif j >= len(src):
                    raise ReadError("unterminated block comment")
                else:
                    j += 1
            adv(j - i)
            continue
        m = re.match(r"--+", src[i:])
        if m and (i + m.end() >= len(src) or src[i + m.end()] not in SYMBOL_CHARS):
            j = src.find("\n", i)
            j = len(src) if j < 0 else j
            out.append(Tok("comment", src[i:j], start_line, start_col))
            adv(j - i)
            continue
        if c.isalpha() or c == "_":
            m = re.match(r"(?:[A-Z][\w']*\.)*[A-Za-z_][\w']*", src[i:])
            text = m.group(0)
            kind = "con" if text.split(".")[-1][0].isupper() else "var"
            if text in KEYWORDS:
                kind = "keyword"
            out.append(Tok(kind, text, start_line, start_col))
            adv(len(text))
            continue
        if c.isdigit():
            m = _NUMBER.match(src, i)
            text = m.group(0)
            kind = "real" if ("." in text or "e" in text.lower()) and not text.lower().startswith("0x") else "int"
            out.append(Tok(kind, text, start_line, start_col))
            adv(len(text))
            continue
        if c in "\"'":
            j = i + 1
            while src[j] != c:
                j += 2 if src[j] == "\\" else 1
            out.append(Tok("char" if c == "'" else "string", src[i:j + 1], start_line, start_col))
            adv(j + 1 - i)
            continue
        if c in "()[],;{}`":
            out.append(Tok("special", c, start_line, start_col))
            adv(1)
            continue
        if c in SYMBOL_CHARS:
            j = i
            while j < len(src) and src[j] in SYMBOL_CHARS:
                j += 1
            out.append(Tok("sym", src[i:j], start_line, start_col))
            adv(j - i)
            continue
        raise ReadError(f"unexpected character {c!r} at {line}:{col}")
    return out


def layout(tokens: list[Tok]) -> list[Tok]:
    """Insert virtual braces and semicolons for implicit layout blocks."""
    out: list[Tok] = []
    stack: list[int] = []  # column of each implicit block; 0 marks an explicit brace
    pending = False
    last_line = 0
    body_started = False
    for k, t in enumerate(tokens):
        if not body_started and t.kind == "keyword" and t.text == "module":
            pass
        if pending:
            pending = False
            if t.text == "{" and t.kind == "special":
                stack.append(0)
                out.append(t)
                last_line = t.line
                continue
            stack.append(t.col)
            out.append(Tok("vopen", "{", t.line, t.col))
        elif t.line > last_line and stack:
            while stack and stack[-1] and t.col < stack[-1]:
                out.append(Tok("vclose", "}", t.line, t.col))
                stack.pop()
            if stack and stack[-1] and t.col == stack[-1]:
                out.append(Tok("vsemi", ";", t.line, t.col))
        if t.kind == "keyword" and t.text == "in" and stack and stack[-1]:
            out.append(Tok("vclose", "}", t.line, t.col))
            stack.pop()
        if t.kind == "special" and t.text == "}" and stack and stack[-1] == 0:
            stack.pop()
        out.append(t)
        last_line = t.line
        if t.kind == "keyword" and t.text in LAYOUT_OPENERS:
            pending = True
    if pending:
        out += [Tok("vopen", "{"), Tok("vclose", "}")]
    while stack:
        if stack.pop():
            out.append(Tok("vclose", "}"))
    out.append(Tok("eof", ""))
    return out


class Reader:
    def __init__(self, tokens: list[Tok], fixities: dict):
        self.toks = tokens
        self.i = 0
        self.fix = dict(STANDARD_FIXITIES)
        self.fix.update(fixities)
        self.overloaded = False

    # -- token helpers -------------------------------------------------------

    def peek(self, k: int = 0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.peek()
        self.i += 1
        return t

    def at(self, text: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.text == text and t.kind not in ("string", "char", "comment")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Tok:
        if not self.at(text):
            t = self.peek()
            raise ReadError(f"expected {text!r}, found {t.kind} {t.text!r} at {t.line}:{t.col}")
        return self.next()

    def open_block(self) -> str:
        t = self.next()
        if t.text != "{":
            raise ReadError(f"expected block at {t.line}:{t.col}")
        return "vclose" if t.kind == "vopen" else "special"

    def at_close(self, closer: str) -> bool:
        t = self.peek()
        return t.kind == closer and t.text == "}" or t.kind == "eof"

    def separator(self) -> bool:
        t = self.peek()
        if t.text == ";" and t.kind in ("vsemi", "special"):
            self.i += 1
            return True
        return False

    def close_block(self, closer: str) -> None:
        t = self.peek()
        if t.kind == "eof" and closer == "vclose":
            return
        if not (t.kind == closer and t.text == "}"):
            raise ReadError(f"expected end of block, found {t.text!r} at {t.line}:{t.col}")
        self.i += 1

    # -- module --------------------------------------------------------------

    def module(self) -> H.Module:
        pragmas = set()
        while self.peek().kind == "pragma":
            body = self.next().text[3:-3].strip()
            assert body.startswith("LANGUAGE")
            pragmas |= {p.strip() for p in body[len("LANGUAGE"):].split(",")}
        self.overloaded = "OverloadedStrings" in pragmas
        self.expect("module")
        name = self.next().text
        exports = None
        if self.accept("("):
            exports = []
            while not self.accept(")"):
                exports.append(self.export())
                self.accept(",")
            exports = tuple(exports)
        self.expect("where")
        closer = self.open_block()
        imports, decls = [], []
        while not self.at_close(closer):
            if self.separator():
                continue
            if self.at("import"):
                imports.append(self.import_decl())
            else:
                decls.extend(self.top_decl())
        self.close_block(closer)
        return H.Module(name, exports, frozenset(pragmas), tuple(imports), tuple(_group(decls)))

    def export(self) -> H.Export:
        if self.accept("("):
            op = self.next().text
            self.expect(")")
            return H.Export("var", op)
        t = self.next()
        if t.kind == "var":
            return H.Export("var", t.text)
        if self.accept("("):
            self.expect("..")
            self.expect(")")
            return H.Export("all", t.text)
        return H.Export("type", t.text)

    def import_decl(self) -> H.Import:
        self.expect("import")
        qualified = self.accept("qualified")
        name = self.next().text
        hiding = self.accept("hiding")
        items = None
        if self.accept("("):
            items = []
            while not self.accept(")"):
                if self.accept("("):
                    items.append(self.next().text)
                    self.expect(")")
                else:
                    items.append(self.next().text)
                self.accept(",")
            items = tuple(items)
        return H.Import(name, qualified, items, hiding)

    def top_decl(self) -> list:
        t = self.peek()
        if t.kind == "comment":
            lines = []
            line = t.line
            while self.peek().kind == "comment" and self.peek().line == line:
                text = self.next().text[2:]
                lines.append(text[1:] if text.startswith(" ") else text)
                line += 1
                self.separator()
            return [H.Comment(tuple(lines))]
        if self.at("type"):
            self.next()
            name = self.next().text
            vars_ = self.tyvars()
            self.expect("=")
            return [H.TypeSyn(name, vars_, self.type())]
        if self.at("data") or self.at("newtype"):
            newtype = self.next().text == "newtype"
            name = self.next().text
            vars_ = self.tyvars()
            ctors = []
            if self.accept("="):
                ctors.append(self.con_decl())
                while self.accept("|"):
                    ctors.append(self.con_decl())
            return [H.DataDecl(name, vars_, tuple(ctors), newtype)]
        if self.at("class"):
            self.next()
            ctx, head = self.context_and_head()
            fundeps = []
            if self.accept("|"):
                while True:
                    left = []
                    while self.peek().kind == "var":
                        left.append(self.next().text)
                    self.expect("->")
                    right = []
                    while self.peek().kind == "var":
                        right.append(self.next().text)
                    fundeps.append((tuple(left), tuple(right)))
                    if not self.accept(","):
                        break
            body = self.where_body()
            cls = head.head.name if isinstance(head, H.TApp) else head.name
            vars_ = tuple(a.name for a in head.args) if isinstance(head, H.TApp) else ()
            return [H.ClassDecl(ctx, cls, vars_, tuple(fundeps), body)]
        if self.at("instance"):
            self.next()
            ctx, head = self.context_and_head()
            body = self.where_body()
            return [H.InstDecl(ctx, head.head.name, head.args, body)]
        return self.decl()

    def where_body(self) -> tuple:
        if not self.accept("where"):
            return ()
        return tuple(_group(self.decl_block()))

    def decl_block(self) -> list:
        closer = self.open_block()
        decls = []
        while not self.at_close(closer):
            if self.separator():
                continue
            decls.extend(self.decl())
        self.close_block(closer)
        return decls

    def tyvars(self) -> tuple:
        out = []
        while self.peek().kind == "var":
            out.append(self.next().text)
        return tuple(out)

    def context_and_head(self):
        t = self.btype()
        if self.accept("=>"):
            return self.to_context(t), self.btype()
        return (), t

    def to_context(self, t) -> tuple:
        items = t.elems if isinstance(t, H.TTuple) else (t,)
        return tuple(H.Assert(x.head.name, x.args) if isinstance(x, H.TApp) else H.Assert(x.name, ())
                     for x in items)

    def con_decl(self) -> H.ConDecl:
        existentials = ()
        if self.accept("forall"):
            existentials = self.tyvars()
            self.expect(".")
        ctx = ()
        save = self.i
        t = self.btype(bangs=True)
        if self.accept("=>"):
            ctx = self.to_context(t)
        else:
            self.i = save
        name = self.next().text
        if self.accept("{"):
            fields = []
            while not self.accept("}"):
                fname = self.next().text
                self.expect("::")
                fields.append((fname, self.type(bangs=True)))
                self.accept(",")
            return H.ConDecl(name, (), tuple(fields), existentials, ctx)
        args = []
        while self.starts_atype():
            args.append(self.atype(bangs=True))
        return H.ConDecl(name, tuple(args), None, existentials, ctx)

    # -- types ---------------------------------------------------------------

    def starts_atype(self) -> bool:
        t = self.peek()
        return t.kind in ("var", "con") or (t.kind == "special" and t.text in "([") or t.text == "!"

    def type(self, bangs: bool = False):
        if self.accept("forall"):
            vars_ = self.tyvars()
            self.expect(".")
            return H.TForall(vars_, self.type())
        t = self.btype(bangs)
        if self.accept("=>"):
            return H.Qual(self.to_context(t), self.type())
        if self.accept("->"):
            return H.TFun(t, self.type())
        return t

    def btype(self, bangs: bool = False):
        head = self.atype(bangs)
        args = []
        while self.starts_atype() and not self.at("!"):
            args.append(self.atype(bangs))
        return H.TApp(head, tuple(args)) if args else head

    def atype(self, bangs: bool = False):
        t = self.next()
        if t.text == "!" and bangs:
            return H.TBang(self.atype())
        if t.kind == "var":
            return H.TVar(t.text)
        if t.kind == "con":
            return H.TCon(t.text)
        if t.text == "[":
            inner = self.type()
            self.expect("]")
            return H.TList(inner)
        if t.text == "(":
            if self.accept(")"):
                return H.TCon("()")
            items = [self.type()]
            while self.accept(","):
                items.append(self.type())
            self.expect(")")
            return items[0] if len(items) == 1 else H.TTuple(tuple(items))
        raise ReadError(f"bad type token {t.text!r} at {t.line}:{t.col}")

    # -- declarations --------------------------------------------------------

    def decl(self) -> list:
        if self.peek().kind == "keyword" and self.peek().text in ("infixl", "infixr", "infix"):
            assoc = self.next().text
            prec = int(self.next().text)
            ops = [self.op_token()]
            while self.accept(","):
                ops.append(self.op_token())
            return [H.Fixity(assoc, prec, tuple(ops))]
        save = self.i
        names = self.sig_names()
        if names is not None and self.accept("::"):
            return [H.TypeSig(tuple(names), self.type())]
        self.i = save
        name = self.binder_name()
        if name is not None:
            pats = []
            while not (self.at("=") or self.at("|")):
                pats.append(self.apat())
            return [H.FunBind(name, (H.Match(tuple(pats), self.rhs("=")),))]
        self.i = save
        pat = self.pat()
        return [H.PatBind(pat, self.rhs("="))]

    def op_token(self) -> str:
        if self.accept("`"):
            name = self.next().text
            self.expect("`")
            return name
        return self.next().text

    def sig_names(self):
        names = []
        while True:
            n = self.binder_name()
            if n is None:
                return None
            names.append(n)
            if not self.accept(","):
                return names

    def binder_name(self):
        t = self.peek()
        if t.kind == "var" and not self.at("@", 1):
            self.i += 1
            return t.text
        if t.text == "(" and self.peek(1).kind == "sym" and self.at(")", 2):
            self.i += 3
            return self.toks[self.i - 2].text
        return None

    def rhs(self, eq: str) -> H.Rhs:
        if self.at("|"):
            guards = []
            while self.accept("|"):
                cond = self.expr()
                self.expect(eq)
                guards.append((cond, self.expr()))
            body = H.GuardedRhs(tuple(guards))
        else:
            self.expect(eq)
            body = self.expr()
        where = ()
        if self.accept("where"):
            where = tuple(_group(self.decl_block()))
        return H.Rhs(body, where)

    # -- patterns ------------------------------------------------------------

    def pat(self):
        p = self.lpat()
        if self.at(":"):
            self.next()
            return H.PCons(p, self.pat())
        return p

    def lpat(self):
        t = self.peek()
        if t.kind == "con" and not self.at("{", 1):
            self.next()
            args = []
            while self.starts_apat():
                args.append(self.apat())
            return H.PCon(t.text, tuple(args))
        if t.text == "-" and self.peek(1).kind in ("int", "real"):
            self.next()
            return H.PLit("-" + self.next().text)
        return self.apat()

    def starts_apat(self) -> bool:
        t = self.peek()
        return t.kind in ("var", "con", "int", "real", "char", "string") or \
            (t.kind == "special" and t.text in "([") or t.text == "!"

    def apat(self):
        t = self.next()
        if t.text == "!":
            return H.PBang(self.apat())
        if t.kind == "var":
            if t.text == "_":
                return H.PWild()
            if self.accept("@"):
                return H.PAs(t.text, self.apat())
            return H.PVar(t.text)
        if t.kind == "con":
            if self.accept("{"):
                fields = []
                while not self.accept("}"):
                    fname = self.next().text
                    fields.append((fname, self.pat() if self.accept("=") else None))
                    self.accept(",")
                return H.PRec(t.text, tuple(fields))
            return H.PCon(t.text)
        if t.kind in ("int", "real", "char", "string"):
            return H.PLit(t.text)
        if t.text == "(":
            if self.accept(")"):
                return H.PCon("()")
            items = [self.pat()]
            while self.accept(","):
                items.append(self.pat())
            self.expect(")")
            return items[0] if len(items) == 1 else H.PTuple(tuple(items))
        if t.text == "[":
            items = []
            while not self.accept("]"):
                items.append(self.pat())
                self.accept(",")
            return H.PList(tuple(items))
        raise ReadError(f"bad pattern token {t.text!r} at {t.line}:{t.col}")

    # -- expressions ---------------------------------------------------------

    def expr(self):
        e = self.infix(0)
        if self.accept("::"):
            return H.Sig(e, self.type())
        return e

    def op_at(self):
        t = self.peek()
        if t.kind == "sym" and t.text not in RESERVED_OPS:
            return t.text, 1
        if t.text == "`" and t.kind == "special":
            return self.peek(1).text, 3
        return None

    def infix(self, min_prec: float):
        if self.at("-") and self.peek().kind == "sym":
            t = self.next()
            if min_prec >= 6:  # prefix minus is an infixl 6 operator in disguise
                raise ReadError(f"cannot mix prefix '-' here at {t.line}:{t.col}")
            left = H.Neg(self.infix(7))
            last = ("infixl", 6)
        else:
            left = self.exp10()
            last = None
        while True:
            found = self.op_at()
            if found is None:
                return left
            op, width = found
            assoc, prec = self.fix.get(op, DEFAULT_FIXITY)
            if prec < min_prec:
                return left
            if last is not None and last[1] == prec and (assoc == "infix" or assoc != last[0]):
                t = self.peek()
                raise ReadError(f"precedence parsing error at {op!r} {t.line}:{t.col}")
            last = (assoc, prec)
            self.i += width
            right = self.infix(prec if assoc == "infixr" else prec + 0.5)
            left = H.InfixApp(op, left, right)

    def exp10(self):
        if self.accept("\\"):
            params = []
            while not self.at("->"):
                params.append(self.apat())
            self.expect("->")
            return H.Lambda(tuple(params), self.expr())
        if self.accept("if"):
            c = self.expr()
            self.expect("then")
            a = self.expr()
            self.expect("else")
            return H.If(c, a, self.expr())
        if self.accept("let"):
            binds = tuple(_group(self.decl_block()))
            self.expect("in")
            return H.Let(binds, self.expr())
        if self.accept("case"):
            scrut = self.expr()
            self.expect("of")
            closer = self.open_block()
            alts = []
            while not self.at_close(closer):
                if self.separator():
                    continue
                pat = self.pat()
                alts.append(H.Alt(pat, self.rhs("->")))
            self.close_block(closer)
            return H.Case(scrut, tuple(alts))
        func = self.aexp()
        args = []
        while self.starts_aexp():
            args.append(self.aexp())
        return H.App(func, tuple(args)) if args else func

    def starts_aexp(self) -> bool:
        t = self.peek()
        return t.kind in ("var", "con", "int", "real", "char", "string") or \
            (t.kind == "special" and t.text in "([")

    def aexp(self):
        e = self.aexp0()
        while self.at("{") and self.peek().kind == "special":
            self.next()
            fields = []
            while not self.accept("}"):
                name = self.next().text
                self.expect("=")
                fields.append((name, self.expr()))
                self.accept(",")
            e = H.RecCon(e.name, tuple(fields)) if isinstance(e, H.Con) else H.RecUpd(e, tuple(fields))
        return e

    def aexp0(self):
        t = self.next()
        if t.kind == "var":
            return H.Var(t.text)
        if t.kind == "con":
            return H.Con(t.text)
        if t.kind in ("int", "real", "char"):
            return H.Lit(t.text, t.kind)
        if t.kind == "string":
            return H.Lit(t.text, "text" if self.overloaded else "string")
        if t.text == "(":
            if self.accept(")"):
                return H.Con("()")
            if self.peek().kind == "sym" and self.at(")", 1):
                op = self.next().text
                self.next()
                return H.Con(op) if op.startswith(":") else H.Var(op)
            items = [self.expr()]
            while self.accept(","):
                items.append(self.expr())
            self.expect(")")
            return items[0] if len(items) == 1 else H.Tuple(tuple(items))
        if t.text == "[":
            return self.bracket()
        raise ReadError(f"bad expression token {t.text!r} at {t.line}:{t.col}")

    def bracket(self):
        if self.accept("]"):
            return H.List(())
        first = self.expr()
        if self.accept(".."):
            end = None if self.at("]") else self.expr()
            self.expect("]")
            return H.Range(first, None, end)
        if self.at("|"):
            self.next()
            branches = [self.stmts()]
            while self.accept("|"):
                branches.append(self.stmts())
            self.expect("]")
            return H.Comp(first, tuple(branches))
        items = [first]
        while self.accept(","):
            items.append(self.expr())
            if self.accept(".."):
                end = None if self.at("]") else self.expr()
                self.expect("]")
                return H.Range(first, items[1], end)
        self.expect("]")
        return H.List(tuple(items))

    def stmts(self) -> tuple:
        out = [self.stmt()]
        while self.accept(","):
            out.append(self.stmt())
        return tuple(out)

    def stmt(self):
        save = self.i
        try:
            p = self.pat()
            if self.accept("<-"):
                return H.Gen(p, self.expr())
        except ReadError:
            pass
        self.i = save
        return H.Guard(self.expr())


def _group(decls: list) -> list:
    """Merge consecutive clauses of one function into a single FunBind."""
    out: list = []
    for d in decls:
        if isinstance(d, H.FunBind) and out and isinstance(out[-1], H.FunBind) and out[-1].name == d.name:
            out[-1] = H.FunBind(d.name, out[-1].matches + d.matches)
        else:
            out.append(d)
    return out


def _fixities(tokens: list[Tok]) -> dict:
    out = {}
    for k, t in enumerate(tokens):
        if t.kind == "keyword" and t.text in ("infixl", "infixr", "infix") and k + 2 < len(tokens):
            op = tokens[k + 2]
            name = tokens[k + 3].text if op.text == "`" else op.text
            out[name] = (t.text, int(tokens[k + 1].text))
    return out


def read_module(src: str) -> H.Module:
    tokens = lex(src)
    return Reader(layout(tokens), _fixities(tokens)).module()
