import re

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from clean2hs import hs as H
from clean2hs.emitter import RenderStyle, emit, emit_expr
from hsreader import ReadError, read_module


def binding(e, name="f") -> H.FunBind:
    return H.FunBind(name, (H.Match((), H.Rhs(e)),))


def module_of(*decls, **kw) -> H.Module:
    return H.Module("M", decls=tuple(decls), **kw)


def v(name):
    return H.Var(name)


def infix(op, a, b):
    return H.InfixApp(op, a, b)


@pytest.mark.parametrize("e,text", [
    (infix("-", infix("-", v("a"), v("b")), v("c")), "a - b - c"),
    (infix("-", v("a"), infix("-", v("b"), v("c"))), "a - (b - c)"),
    (infix("++", v("a"), infix("++", v("b"), v("c"))), "a ++ b ++ c"),
    (infix("++", infix("++", v("a"), v("b")), v("c")), "(a ++ b) ++ c"),
    (infix("==", infix("==", v("a"), v("b")), v("c")), "(a == b) == c"),
    (infix("*", infix("+", v("a"), v("b")), v("c")), "(a + b) * c"),
    (infix("+", infix("*", v("a"), v("b")), v("c")), "a * b + c"),
    (H.App(v("f"), (H.App(v("g"), (v("x"),)), v("y"))), "f (g x) y"),
    (H.App(v("f"), (H.Neg(H.Lit("1")),)), "f (-1)"),
    (H.App(v("f"), (H.Lambda((H.PVar("x"),), v("x")),)), "f (\\x -> x)"),
    (infix("+", v("a"), H.Lambda((H.PVar("x"),), v("x"))), "a + \\x -> x"),
    (infix("+", H.Lambda((H.PVar("x"),), v("x")), v("a")), "(\\x -> x) + a"),
    (H.Tuple((infix("+", v("a"), v("b")), v("c"))), "(a + b, c)"),
    (H.App(v("map"), (v("+"),)), "map (+)"),
    (infix("+", H.Case(v("x"), (H.Alt(H.PVar("a"), H.Rhs(v("a"))),)), v("y")), "case x of { a -> a } + y"),
    (H.App(v("f"), (H.Case(v("x"), (H.Alt(H.PVar("a"), H.Rhs(v("a"))),)),)), "f (case x of { a -> a })"),
    (H.Neg(H.InfixApp("*", v("a"), v("b"))), "-a * b"),
    (infix("*", v("a"), H.Neg(v("b"))), "a * (-b)"),
])
def test_minimal_parentheses(e, text):
    assert emit_expr(e) == text


def test_where_block_is_indented_under_the_binding():
    rhs = H.Rhs(v("y"), (binding(H.Lit("1"), "y"),))
    text = emit(module_of(H.FunBind("f", (H.Match((H.PVar("x"),), rhs),))))
    assert "f x = y\n  where\n    y = 1\n" in text


def test_indent_width_is_configurable():
    rhs = H.Rhs(v("y"), (binding(H.Lit("1"), "y"),))
    text = emit(module_of(H.FunBind("f", (H.Match((), rhs),))), RenderStyle(indent_width=4))
    assert "\n    where\n        y = 1\n" in text


def test_guards_get_one_line_each():
    g = H.GuardedRhs(((infix(">", v("x"), H.Lit("0")), H.Lit("1")), (v("otherwise"), H.Lit("0"))))
    text = emit(module_of(H.FunBind("f", (H.Match((H.PVar("x"),), H.Rhs(g)),))))
    assert "f x\n  | x > 0 = 1\n  | otherwise = 0\n" in text


def test_pragmas_are_sorted_and_one_per_line():
    m = module_of(binding(H.Lit("1")), pragmas=frozenset({"RankNTypes", "BangPatterns"}))
    assert emit(m).startswith("{-# LANGUAGE BangPatterns #-}\n{-# LANGUAGE RankNTypes #-}\nmodule M where\n")


def test_combined_pragma_style():
    m = module_of(binding(H.Lit("1")), pragmas=frozenset({"RankNTypes", "BangPatterns"}))
    text = emit(m, RenderStyle(pragma_style="combined"))
    assert text.startswith("{-# LANGUAGE BangPatterns, RankNTypes #-}\n")


def test_no_pragmas_no_header_lines():
    assert emit(module_of(binding(H.Lit("1")))).startswith("module M where\n")


def test_export_list_forms():
    m = H.Module("M", exports=(H.Export("var", "f"), H.Export("type", "T"), H.Export("all", "R"),
                               H.Export("var", "<+>")))
    assert emit(m).splitlines()[0] == "module M (f, T, R(..), (<+>)) where"


def test_bad_style_is_rejected():
    with pytest.raises(ValueError):
        RenderStyle(pragma_style="sideways")
    with pytest.raises(ValueError):
        RenderStyle(indent_width=0)


# -- random expressions: re-read equality and parenthesis minimality ----------------

OPS = ["+", "-", "*", "++", "==", "&&", "||", ".", "$", "<>", ":"]
leaf = st.one_of(st.sampled_from(["x", "y", "xs"]).map(H.Var), st.integers(0, 99).map(lambda n: H.Lit(str(n))),
                 st.sampled_from(["Nothing", "True"]).map(H.Con))
pvar = st.sampled_from(["a", "b"]).map(H.PVar)


def _app(func, args):
    # application is n-ary: a nested head merges into one node
    if isinstance(func, H.App):
        return H.App(func.func, func.args + args)
    return H.App(func, args)


def _compound(inner):
    return st.one_of(
        st.tuples(st.sampled_from(OPS), inner, inner).map(lambda t: H.InfixApp(*t)),
        st.tuples(inner, st.lists(inner, min_size=1, max_size=2)).map(lambda t: _app(t[0], tuple(t[1]))),
        inner.map(H.Neg),
        st.tuples(st.lists(pvar, min_size=1, max_size=2), inner).map(lambda t: H.Lambda(tuple(t[0]), t[1])),
        st.tuples(inner, inner, inner).map(lambda t: H.If(*t)),
        st.lists(inner, min_size=2, max_size=3).map(lambda es: H.Tuple(tuple(es))),
        st.lists(inner, max_size=3).map(lambda es: H.List(tuple(es))),
        st.tuples(inner, st.lists(st.tuples(pvar, inner), min_size=1, max_size=2))
          .map(lambda t: H.Case(t[0], tuple(H.Alt(p, H.Rhs(e)) for p, e in t[1]))),
    )


exprs = st.recursive(leaf, _compound, max_leaves=8)


def _reread(e):
    return read_module(emit(module_of(binding(e)))).decls[0].matches[0].rhs.body


@given(exprs)
@settings(max_examples=400, deadline=None)
def test_emitted_expression_reads_back_equal(e):
    assert _reread(e) == e


def _paren_pairs(text: str):
    stack, pairs = [], []
    for i, c in enumerate(text):
        if c == "(":
            stack.append(i)
        elif c == ")":
            pairs.append((stack.pop(), i))
    return pairs


@given(exprs)
@settings(max_examples=300, deadline=None)
def test_every_parenthesis_pair_is_needed(e):
    text = emit_expr(e)
    assume("\n" not in text)
    for a, b in _paren_pairs(text):
        stripped = text[:a] + " " + text[a + 1:b] + " " + text[b + 1:]
        try:
            changed = read_module(f"module M where\n\nf = {stripped}\n").decls[0].matches[0].rhs.body != e
        except (ReadError, IndexError):
            changed = True
        assert changed, f"redundant parentheses at {a} in {text!r}"


@given(exprs)
@settings(max_examples=200, deadline=None)
def test_no_trailing_whitespace_and_one_final_newline(e):
    text = emit(module_of(binding(e)))
    assert text.endswith("\n") and not text.endswith("\n\n")
    assert not re.search(r"[ \t]$", text, re.M)
