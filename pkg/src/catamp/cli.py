"""Command-line runner: ``catamp run|verify-all|list``.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import acceptance, experiments
from .fock import DEFAULT_DIM
from .report import Check

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_set(items: list[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise experiments.UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _load_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise experiments.UsageError(f"cannot read config {path!r}: {exc}") from exc
    if not isinstance(doc, dict):
        raise experiments.UsageError("config must be a JSON object")
    unknown = set(doc) - {"experiment", "dim", "overrides", "output_dir", "workers"}
    if unknown:
        raise experiments.UsageError(f"unknown config keys: {sorted(unknown)}")
    return doc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="catamp", description="Cat-state amplification experiments and acceptance checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one experiment and write CSV plus summary.json")
    run.add_argument("experiment", nargs="?", help="experiment name (see 'list')")
    run.add_argument("--dim", type=int, default=None, help=f"Fock truncation (default {DEFAULT_DIM})")
    run.add_argument("--out", default=None, help="output directory (default: current directory)")
    run.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a parameter")
    run.add_argument("--config", default=None, help="JSON file with experiment, dim, overrides, output_dir")
    run.add_argument("--workers", type=int, default=None, help="concurrent sweep cells")

    ver = sub.add_parser("verify-all", help="run every acceptance criterion")
    ver.add_argument("--dim", type=int, default=DEFAULT_DIM)
    ver.add_argument("--workers", type=int, default=1)
    ver.add_argument("--json", default=None, help="also write the check table to this file")

    sub.add_parser("list", help="list experiments and their parameters")
    return p


def _cmd_run(args) -> int:
    cfg = _load_config(args.config) if args.config else {}
    name = args.experiment or cfg.get("experiment")
    if not name:
        raise experiments.UsageError("no experiment given")
    dim = args.dim if args.dim is not None else int(cfg.get("dim", DEFAULT_DIM))
    out = args.out or cfg.get("output_dir", ".")
    workers = args.workers if args.workers is not None else int(cfg.get("workers", 1))
    overrides = dict(cfg.get("overrides", {}))
    overrides.update(_parse_set(args.set))
    try:
        result = experiments.run(name, dim, out, overrides, workers)
    except OSError as exc:
        print(f"catamp: cannot write output: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for c in result.checks:
        print(c.line())
    print(f"wrote {Path(out) / (name + '.csv')} ({len(result.table.rows)} rows)")
    return EXIT_OK if all(c.passed for c in result.checks) else EXIT_FAIL


def _cmd_verify(args) -> int:
    if args.dim < experiments.MIN_DIM:
        raise experiments.UsageError(f"dim must be at least {experiments.MIN_DIM}")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        results = acceptance.verify_all(args.dim, args.workers)
    if caught:
        kinds = sorted({w.category.__name__ for w in caught})
        print(f"{len(caught)} warnings raised during verification ({', '.join(kinds)})")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    if args.json:
        from .report import summary_json, write_atomic

        checks: list[Check] = [c for r in results for c in r.checks]
        write_atomic(args.json, summary_json(checks))
    return EXIT_FAIL if failed else EXIT_OK


def _cmd_list(args) -> int:
    for name, exp in experiments.REGISTRY.items():
        params = ", ".join(f"{k}={v}" for k, v in exp.defaults.items()) or "-"
        print(f"{name:14s} {exp.help}\n{'':14s} params: {params}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "verify-all": _cmd_verify, "list": _cmd_list}
    try:
        return handlers[args.command](args)
    except experiments.UsageError as exc:
        print(f"catamp: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
