"""Command-line entry point: `clean2hs [options] FILE.icl ...`."""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .diagnostics import Diagnostic, diag
from .pipeline import Result, convert
from .translator import TranslateOptions
from .uniqueness import UniquenessReport

EXIT_OK, EXIT_ERRORS, EXIT_USAGE = 0, 1, 2

_COLORS = {"error": "\033[31m", "warning": "\033[33m", "info": "\033[36m"}


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple[Path, ...]
    output_dir: Path
    options: TranslateOptions = TranslateOptions()
    report_path: Optional[Path] = None
    fail_on_warning: bool = False

    def __post_init__(self):
        if not self.inputs:
            raise ValueError("at least one input file is required")


@dataclass
class FileOutcome:
    path: Path
    result: Optional[Result]
    diagnostics: list[Diagnostic]
    io_error: Optional[str] = None


def report_entry(file: str, diags: Sequence[Diagnostic], uniq: UniquenessReport) -> dict:
    ordered = sorted(diags, key=lambda d: (d.line, d.column, d.rule_id))
    return {
        "file": file,
        "diagnostics": [
            {"severity": d.severity, "rule_id": d.rule_id, "line": d.line,
             "column": d.column, "message": d.message}
            for d in ordered
        ],
        "uniqueness": uniq.counts,
    }


def report_json(diags: Sequence[Diagnostic], uniq: UniquenessReport, file: str = "") -> str:
    return json.dumps(report_entry(file, diags, uniq), indent=2)


def _use_color(stream) -> bool:
    mode = os.environ.get("CLEAN2HS_COLOR", "auto")
    if mode == "always":
        return True
    if mode == "never":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def _print_diag(path: Path, d: Diagnostic, stream, color: bool) -> None:
    text = f"{path}:{d}"
    if color:
        text = f"{_COLORS[d.severity]}{text}\033[0m"
    print(text, file=stream)


def process(path: Path, options: TranslateOptions) -> FileOutcome:
    try:
        source = path.read_text(encoding="utf-8")
        dcl_path = path.with_suffix(".dcl")
        dcl = dcl_path.read_text(encoding="utf-8") if dcl_path.is_file() else None
    except (OSError, UnicodeDecodeError) as exc:
        return FileOutcome(path, None, [], io_error=f"{path}: {exc}")
    result = convert(source, dcl, options)
    diags = list(result.diagnostics)
    if result.module is not None and result.module.name != path.stem:
        diags.append(diag("module-name-mismatch", None,
                          f"module header {result.module.name} differs from file name {path.stem}"))
    return FileOutcome(path, result, diags)


def run(config: RunConfig, err=None) -> int:
    err = err or sys.stderr
    color = _use_color(err)
    with ThreadPoolExecutor() as pool:
        outcomes = list(pool.map(lambda p: process(p, config.options), config.inputs))

    code = EXIT_OK
    entries = []
    for o in outcomes:
        if o.io_error:
            print(o.io_error, file=err)
            return EXIT_USAGE
        for d in sorted(o.diagnostics, key=Diagnostic.sort_key):
            _print_diag(o.path, d, err, color)
        if o.result.text is not None:
            target = config.output_dir / f"{o.path.stem}.hs"
            try:
                config.output_dir.mkdir(parents=True, exist_ok=True)
                target.write_text(o.result.text, encoding="utf-8")
            except OSError as exc:
                print(f"{target}: {exc}", file=err)
                return EXIT_USAGE
        severities = {d.severity for d in o.diagnostics}
        if "error" in severities or o.result.text is None:
            code = EXIT_ERRORS
        elif config.fail_on_warning and "warning" in severities:
            code = EXIT_ERRORS
        entries.append(report_entry(str(o.path), o.diagnostics, o.result.uniqueness))

    if config.report_path is not None:
        try:
            config.report_path.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")
        except OSError as exc:
            print(f"{config.report_path}: {exc}", file=err)
            return EXIT_USAGE
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="clean2hs", description="Translate Clean modules to Haskell.")
    p.add_argument("inputs", nargs="+", type=Path, metavar="FILE.icl")
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: .)")
    p.add_argument("--string", choices=("charlist", "text"), default="charlist")
    p.add_argument("--real", choices=("double", "float"), default="double")
    p.add_argument("--parallel", choices=("zip", "extension"), default="zip")
    p.add_argument("--no-puns", action="store_true", help="expand punned record patterns")
    p.add_argument("--strictness", choices=("bang", "ignore"), default="bang",
                   help="how strict argument annotations are translated")
    p.add_argument("--report", type=Path, help="write a JSON diagnostics report")
    p.add_argument("--fail-on-warning", action="store_true")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    for path in args.inputs:
        if path.suffix != ".icl":
            print(f"{path}: expected an .icl file", file=sys.stderr)
            return EXIT_USAGE
    config = RunConfig(
        inputs=tuple(args.inputs),
        output_dir=args.out,
        options=TranslateOptions(string_type=args.string, real_type=args.real,
                                 parallel_mode=args.parallel, no_puns=args.no_puns,
                                 strictness=args.strictness),
        report_path=args.report,
        fail_on_warning=args.fail_on_warning,
    )
    return run(config)
