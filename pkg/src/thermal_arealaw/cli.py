"""Command line: ``run``, ``verify`` and ``models``.

Exit codes: 0 all records pass, 1 some slack violated or point failed,
2 configuration error, 3 output could not be written.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import ConfigError, load_config
from .lattice import Statistics
from .potential import CATALOG
from .report import emit, fmt
from .runner import run, summary

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thermal-arealaw", description="Finite-window thermal area-law verification.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_text in (("run", "evaluate a config and emit records"), ("verify", "evaluate and print pass/fail")):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config")
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        if name == "run":
            sp.add_argument("--format", choices=("csv", "json"), default="csv")
            sp.add_argument("--out", default=None, help="output path (stdout if omitted)")
            sp.add_argument("--bits", action="store_true", help="display entropies in bits")
    sub.add_parser("models", help="list the model catalog")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _models() -> int:
    for name, (factory, params, stats) in sorted(CATALOG.items()):
        defaults = ", ".join(f"{k}={v:g}" for k, v in zip(params, factory.__defaults__))
        kind = "fermion" if stats is Statistics.FERMION else "spin"
        print(f"{name:8s} {kind:8s} {defaults:28s} {factory.__doc__.strip().splitlines()[0].strip('`.')}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "models":
        return _models()
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        if args.seed < 0:
            print("config error: seed must be non-negative", file=sys.stderr)
            return EXIT_CONFIG
        config.seed = args.seed
    records = run(config, max(1, args.threads))
    status = EXIT_OK if all(r.passed for r in records) else EXIT_VIOLATION
    if args.command == "verify":
        for r in records:
            mark = "PASS" if r.passed else "FAIL"
            extra = f" ({r.error})" if r.error else ""
            print(f"{mark} {r.suite} {r.model} beta={fmt(r.beta)} window={r.window} region={r.region}{extra}")
        s = summary(records)
        print(f"{s['passed']}/{s['total']} passed")
        return status
    try:
        text = emit(records, args.format, args.out, args.bits)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.out is None:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
