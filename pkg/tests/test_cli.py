import json
import subprocess
import sys

import pytest

from clean2hs.cli import RunConfig, main, run

GOOD = "implementation module Good\n\nf :: Int -> Int\nf x = x + 1\n"
BAD = "implementation module Bad\n\nf :: Int -> Int\nf x y = x\n"
GENERIC = "implementation module Gen\n\ngeneric gEq a :: a a -> Bool\n\nf = 1\n"


@pytest.fixture(autouse=True)
def no_color(monkeypatch):
    monkeypatch.setenv("CLEAN2HS_COLOR", "never")


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_success_writes_haskell_file(tmp_path):
    src = write(tmp_path, "Good.icl", GOOD)
    out = tmp_path / "out"
    assert main([str(src), "--out", str(out)]) == 0
    assert (out / "Good.hs").read_text().startswith("module Good where\n")


def test_errors_exit_one(tmp_path, capsys):
    src = write(tmp_path, "Bad.icl", BAD)
    assert main([str(src), "--out", str(tmp_path)]) == 1
    assert "error[arity-mismatch]" in capsys.readouterr().err


def test_parse_failure_exits_one_and_writes_nothing(tmp_path):
    src = write(tmp_path, "Broken.icl", "implementation module Broken\n\nf = (1,\n")
    assert main([str(src), "--out", str(tmp_path)]) == 1
    assert not (tmp_path / "Broken.hs").exists()


def test_missing_file_exits_two(tmp_path):
    assert main([str(tmp_path / "Nope.icl"), "--out", str(tmp_path)]) == 2


def test_wrong_extension_exits_two(tmp_path):
    src = write(tmp_path, "Good.txt", GOOD)
    assert main([str(src)]) == 2


def test_bad_flag_exits_two(tmp_path):
    assert main(["--string", "bytes", str(tmp_path / "Good.icl")]) == 2


def test_generic_stub_exits_zero_with_warning(tmp_path, capsys):
    src = write(tmp_path, "Gen.icl", GENERIC)
    assert main([str(src), "--out", str(tmp_path)]) == 0
    assert "warning[generics-unsupported]" in capsys.readouterr().err


def test_fail_on_warning(tmp_path):
    src = write(tmp_path, "Gen.icl", GENERIC)
    assert main([str(src), "--out", str(tmp_path), "--fail-on-warning"]) == 1


def test_report_lists_every_file(tmp_path):
    good = write(tmp_path, "Good.icl", GOOD)
    gen = write(tmp_path, "Gen.icl", GENERIC)
    report = tmp_path / "report.json"
    main([str(good), str(gen), "--out", str(tmp_path), "--report", str(report)])
    entries = json.loads(report.read_text())
    assert [e["file"] for e in entries] == [str(good), str(gen)]
    assert set(entries[0]) == {"file", "diagnostics", "uniqueness"}
    assert set(entries[0]["uniqueness"]) == {"erased_unique", "erased_vars", "erased_dots", "constraints"}
    rules = [d["rule_id"] for d in entries[1]["diagnostics"]]
    assert "generics-unsupported" in rules
    for entry in entries:
        keys = [(d["line"], d["column"], d["rule_id"]) for d in entry["diagnostics"]]
        assert keys == sorted(keys)


def test_report_counts_uniqueness(tmp_path):
    src = write(tmp_path, "U.icl", "implementation module U\n\nf :: *a -> *a\nf x = x\n")
    report = tmp_path / "r.json"
    main([str(src), "--out", str(tmp_path), "--report", str(report)])
    assert json.loads(report.read_text())[0]["uniqueness"]["erased_unique"] == 2


def test_sibling_definition_module_is_used(tmp_path):
    write(tmp_path, "M.dcl", "definition module M\n\nf :: Int -> Int\n")
    src = write(tmp_path, "M.icl", "implementation module M\n\nf :: Int -> Int\nf x = g x\n\ng x = x\n")
    assert main([str(src), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "M.hs").read_text().startswith("module M (f) where\n")


def test_module_name_differs_from_file_name(tmp_path, capsys):
    src = write(tmp_path, "Other.icl", GOOD)
    assert main([str(src), "--out", str(tmp_path)]) == 0
    assert "warning[module-name-mismatch]" in capsys.readouterr().err


def test_options_reach_the_translator(tmp_path):
    src = write(tmp_path, "S.icl", 'implementation module S\n\ns = "hi"\nr :: Real\nr = 1.0\n')
    main([str(src), "--out", str(tmp_path), "--string", "text", "--real", "float"])
    text = (tmp_path / "S.hs").read_text()
    assert "OverloadedStrings" in text and "r :: Float" in text


def test_output_is_deterministic(tmp_path):
    src = write(tmp_path, "Good.icl", GOOD)
    main([str(src), "--out", str(tmp_path / "a")])
    main([str(src), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "Good.hs").read_bytes() == (tmp_path / "b" / "Good.hs").read_bytes()


def test_run_config_requires_inputs(tmp_path):
    with pytest.raises(ValueError):
        RunConfig(inputs=(), output_dir=tmp_path)


def test_run_with_config(tmp_path):
    src = write(tmp_path, "Good.icl", GOOD)
    assert run(RunConfig(inputs=(src,), output_dir=tmp_path / "o")) == 0


def test_module_entry_point(tmp_path):
    src = write(tmp_path, "Good.icl", GOOD)
    proc = subprocess.run([sys.executable, "-m", "clean2hs", str(src), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and (tmp_path / "Good.hs").exists()
