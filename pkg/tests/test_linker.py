import pytest

from clean2hs.linker import ModuleNameMismatch, link, translate_linked
from clean2hs.parser import parse_source
from clean2hs.pipeline import convert

ICL = """implementation module M

f :: Int -> Int
f x = g x

g :: Int -> Int
g x = x
"""
DCL = "definition module M\n\nf :: Int -> Int\n"


def rule_ids(result):
    return [d.rule_id for d in result.diagnostics]


def test_exports_follow_the_definition_module():
    r = convert(ICL, DCL)
    assert r.text.splitlines()[0] == "module M (f) where"
    private = [d for d in r.diagnostics if d.rule_id == "link-private"]
    assert len(private) == 1 and private[0].severity == "info" and "g" in private[0].message


def test_private_function_is_still_emitted():
    assert "g x = x" in convert(ICL, DCL).text


def test_no_definition_module_means_no_export_list():
    r = convert(ICL)
    assert r.text.splitlines()[0] == "module M where"
    assert "link-standalone" in rule_ids(r)


def test_type_and_class_export_forms():
    icl = ("implementation module M\n\n:: T = A | B\n:: R = { x :: Int }\n:: S :== Int\n"
           "class C a where\n    m :: a -> a\n")
    dcl = "definition module M\n\n:: T\n:: R = { x :: Int }\n:: S :== Int\nclass C a where\n    m :: a -> a\n"
    header = convert(icl, dcl).text.splitlines()[0]
    assert header == "module M (T, R(..), S, C(..)) where"


def test_abstract_type_hides_constructors():
    icl = "implementation module M\n\n:: T = A | B\n"
    assert convert(icl, "definition module M\n\n:: T\n").text.splitlines()[0] == "module M (T) where"


def test_missing_implementation_is_an_error():
    r = convert(ICL, DCL + "h :: Int\n")
    missing = [d for d in r.diagnostics if d.rule_id == "link-missing"]
    assert missing and missing[0].severity == "error"


def test_signature_mismatch_is_an_error():
    r = convert(ICL, "definition module M\n\nf :: Int -> Bool\n")
    assert "link-signature-mismatch" in rule_ids(r) and not r.ok


def test_attribute_only_difference_is_a_warning():
    icl = "implementation module M\n\nf :: *{#Int} -> *{#Int}\nf a = a\n"
    r = convert(icl, "definition module M\n\nf :: {#Int} -> {#Int}\n")
    mismatch = [d for d in r.diagnostics if d.rule_id == "link-attr-mismatch"]
    assert len(mismatch) == 1 and mismatch[0].severity == "warning" and r.ok


def test_module_name_mismatch_raises_from_link():
    icl = parse_source("implementation module M\n\nf = 1\n")
    dcl = parse_source("definition module N\n\nf :: Int\n")
    with pytest.raises(ModuleNameMismatch) as exc:
        link(dcl, icl)
    assert (exc.value.dcl_name, exc.value.icl_name) == ("N", "M")


def test_module_name_mismatch_stops_the_pipeline():
    r = convert("implementation module M\n\nf = 1\n", "definition module N\n\nf :: Int\n")
    assert r.text is None and rule_ids(r) == ["module-name-mismatch"]


def test_link_returns_exports_in_declaration_order():
    icl = parse_source("implementation module M\n\na = 1\nb = 2\nc = 3\n")
    dcl = parse_source("definition module M\n\nc :: Int\na :: Int\n")
    exports, diags = link(dcl, icl)
    assert exports.names() == ["c", "a"] and len(exports) == 2
    assert [d.rule_id for d in diags] == ["link-private"]


def test_translate_linked_without_dcl():
    module, diags = translate_linked(None, parse_source(ICL))
    assert module.exports is None and [d.rule_id for d in diags] == ["link-standalone"]
