"""Command-line interface: ``tinylinks {run,analyze,legacy,fuzz}``."""
from __future__ import annotations

import argparse
import json
import sys

from .abstract import analyze
from .concrete import SAFE, SKIPPED, run
from .harness import GenConfig, soundness_check
from .legacy import typecheck_legacy
from .parser import ParseError, parse

EXIT_OK, EXIT_REJECT, EXIT_WRONG, EXIT_PARSE, EXIT_USAGE = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


class _UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tinylinks", description="Run and analyse TinyLinks programs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_ in [
        ("run", "evaluate a program concretely"),
        ("analyze", "run the types-and-effects analysis"),
        ("legacy", "check with the original type-and-effect rules"),
    ]:
        c = sub.add_parser(name, help=help_)
        c.add_argument("input", help="source file, or - for stdin")
        c.add_argument("--json", action="store_true", help="machine-readable output")
        if name == "run":
            c.add_argument("--max-steps", type=int, default=100_000)

    f = sub.add_parser("fuzz", help="exhaustive differential soundness check")
    f.add_argument("--depth", type=int, default=3)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--preds", default="p,q", help="comma-separated predicate names")
    f.add_argument("--max-steps", type=int, default=100_000)
    f.add_argument("--workers", type=int, default=None)
    f.add_argument("--json", action="store_true")
    return p


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _emit(args, text: str, payload: dict) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _cmd_run(args) -> int:
    report = run(parse(_read(args.input)), args.max_steps)
    _emit(args, report.render(), report.to_json())
    if report.verdict == SKIPPED:
        print(f"step budget of {args.max_steps} exhausted", file=sys.stderr)
        return EXIT_REJECT
    return EXIT_OK if report.verdict == SAFE else EXIT_WRONG


def _cmd_analyze(args) -> int:
    report = analyze(parse(_read(args.input)))
    text = report.render()
    if not report.safe:
        text += f"\n{report.verdict}: {report.reason}" + (f" ({report.message})" if report.message else "")
    else:
        text += f"\n{report.verdict}"
    _emit(args, text, report.to_json())
    return EXIT_OK if report.safe else EXIT_REJECT


def _cmd_legacy(args) -> int:
    j = typecheck_legacy(parse(_read(args.input)))
    verdict = "accept" if j.accepted else "reject"
    payload = {"verdict": verdict, "judgment": j.render()}
    _emit(args, f"{j.render()}\n{verdict}", payload)
    return EXIT_OK if j.accepted else EXIT_REJECT


def _cmd_fuzz(args) -> int:
    preds = tuple(p.strip() for p in args.preds.split(",") if p.strip())
    if args.depth < 1 or not preds:
        raise _UsageError("--depth must be positive and --preds non-empty")
    cfg = GenConfig(max_depth=args.depth, preds=preds, seed=args.seed, max_steps=args.max_steps)
    report = soundness_check(cfg, workers=args.workers)
    _emit(args, report.render(), report.summary())
    return EXIT_OK if report.sound else EXIT_REJECT


_COMMANDS = {"run": _cmd_run, "analyze": _cmd_analyze, "legacy": _cmd_legacy, "fuzz": _cmd_fuzz}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _UsageError as exc:
        print(f"tinylinks: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
