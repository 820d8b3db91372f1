"""Command-line front end: ``protogame list | analyze | verify | export``.

Exit codes: 0 success, 1 at least one claim disagrees with its expectation,
2 usage error, 3 unknown protocol or missing file, 4 game-spec parse error,
5 parameter file or constraint violation.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from typing import Optional

from .catalog import ProtocolEntry, get_protocol, list_protocols, resolve_name
from .gamespec import ParseError, export, load
from .model import ConstraintViolation, ModelError, parse_rational
from .report import analyze, list_report, render_markdown, to_json, verify
from .sampling import SamplingError

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_UNKNOWN, EXIT_PARSE, EXIT_PARAMS = range(6)
VARIANTS = ("rational", "naive", "with-abort", "all")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="protogame",
        description="Exact game-theoretic analysis of two-party cryptographic protocols.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list", help="list catalog protocols and aliases")
    p.add_argument("--format", choices=("json", "md"), default="md")
    p.add_argument("-o", "--output")

    for name, text in (("analyze", "payoff spectra, classification and equilibria"),
                       ("verify", "analysis plus an audit of every claim")):
        p = sub.add_parser(name, help=text)
        p.add_argument("target", help="catalog name, alias or .gamespec file")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--samples", type=_positive_int, default=1000)
        p.add_argument("--params", metavar="FILE", help="explicit parameter values, one 'name = p/q' per line")
        p.add_argument("--format", choices=("json", "md"), default="json")
        p.add_argument("-o", "--output")
        p.add_argument("--variant", choices=VARIANTS, default="all")

    p = sub.add_parser("export", help="print a protocol in canonical game-spec form")
    p.add_argument("target")
    p.add_argument("-o", "--output")
    return parser


def resolve_target(target: str) -> tuple[ProtocolEntry, str]:
    """Catalog names and aliases win over same-named files."""
    if resolve_name(target) is not None:
        return get_protocol(target), "catalog"
    if os.path.isfile(target):
        with open(target, encoding="utf-8") as fh:
            text = fh.read()
        try:
            return load(text), "file"
        except ParseError as exc:
            raise CliError(EXIT_PARSE, f"{target}:{exc}")
    names, aliases = list_protocols()
    raise CliError(EXIT_UNKNOWN, f"unknown protocol or file {target!r}; "
                                 f"valid names: {', '.join(names + sorted(aliases))}")


_PARAM_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(\S+)\s*$")


def read_params(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(EXIT_USAGE, f"cannot read params file: {exc}")
    params = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        m = _PARAM_LINE.match(line)
        if not m:
            raise CliError(EXIT_PARAMS, f"{path}:{lineno}: expected 'name = p/q'")
        name, value = m.groups()
        if name in params:
            raise CliError(EXIT_PARAMS, f"{path}:{lineno}: {name} given twice")
        try:
            params[name] = parse_rational(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise CliError(EXIT_PARAMS, f"{path}:{lineno}: {exc}")
    return params


def _emit(text: str, output: Optional[str]):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run(args) -> int:
    if args.command == "list":
        rows = list_report()
        _emit(to_json(rows) if args.format == "json" else render_markdown(rows), args.output)
        return EXIT_OK

    entry, source = resolve_target(args.target)
    if args.command == "export":
        _emit(export(entry), args.output)
        return EXIT_OK

    variant = args.variant.replace("-", "_")
    if variant != "all" and variant not in entry.variants:
        raise CliError(EXIT_USAGE, f"{entry.name} has no {args.variant} game; "
                                   f"available: {', '.join(entry.variants)}")
    params = read_params(args.params) if args.params else None
    build = analyze if args.command == "analyze" else verify
    try:
        report = build(entry, seed=args.seed, samples=args.samples, params=params,
                       variant=variant, source=source)
    except ConstraintViolation as exc:
        raise CliError(EXIT_PARAMS, f"parameters violate {exc.constraint}")
    except SamplingError as exc:
        raise CliError(EXIT_PARAMS, f"cannot sample parameters: {exc}")
    except (ModelError, ValueError) as exc:
        if params is None:
            raise
        raise CliError(EXIT_PARAMS, str(exc))
    _emit(to_json(report) if args.format == "json" else render_markdown(report), args.output)
    if args.command == "verify" and not report["summary"]["ok"]:
        print("claims disagreeing with expectation: " + ", ".join(report["summary"]["mismatched"]),
              file=sys.stderr)
        return EXIT_MISMATCH
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _run(args)
    except CliError as exc:
        print(f"protogame: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
