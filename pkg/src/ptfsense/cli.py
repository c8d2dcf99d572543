"""``ptfsense`` command line.

Exit codes: 0 success, 1 usage or config error, 2 suite failure.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from . import io
from .harness import EXPERIMENTS, ConfigError, build_config, load_config_file, run
from .rng import set_threads
from .suites import ROW_FIELDS, list_suites, run_suite

EXIT_OK, EXIT_USAGE, EXIT_SUITE_FAILED = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON or YAML config file")
    p.add_argument("--seed", type=_u64, help="root seed (flags override the config)")
    p.add_argument("--samples", type=_positive, help="Monte Carlo budget per estimate")
    p.add_argument("--threads", type=_positive, help="worker threads")
    p.add_argument("--out", metavar="DIR", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ptfsense", description="Sensitivity experiments for polynomial threshold functions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        _common(p)
        p.add_argument("--family", help="instance family")
        p.add_argument("--n", type=_positive, nargs="+", help="variable counts")
        p.add_argument("--d", type=int, nargs="+", help="degrees")
        p.add_argument("--count", type=_positive, help="random instances per (n, d)")
        p.add_argument("--path", help="polynomial file for --family from-file")
    p = sub.add_parser("suite", help="run built-in acceptance suites")
    _common(p)
    p.add_argument("suite", help="suite id, 'all' or 'list'")
    return parser


def _overrides(args) -> dict:
    keys = ("seed", "samples", "threads", "out", "family", "n", "d", "count", "path")
    return {k: getattr(args, k, None) for k in keys}


def _run_experiment(args) -> int:
    doc = load_config_file(args.config) if args.config else {}
    cfg = build_config(args.command, doc, _overrides(args))
    res = run(cfg)
    state = "complete" if res.complete else f"incomplete ({len(res.skipped)} grid points over budget)"
    print(f"{args.command}: {len(res.rows)} rows, {state}")
    print(f"  {res.csv_path}\n  {res.json_path}")
    return EXIT_OK


def _run_suites(args) -> int:
    if args.suite == "list":
        for sid, desc in list_suites():
            print(f"{sid:28s} {desc}")
        return EXIT_OK
    known = [sid for sid, _ in list_suites()]
    ids = known if args.suite == "all" else [args.suite]
    for sid in ids:
        if sid not in known:
            print(f"ptfsense: unknown suite {sid!r}; try 'ptfsense suite list'", file=sys.stderr)
            return EXIT_USAGE
    doc = load_config_file(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else int(doc.get("seed", 0))
    set_threads(args.threads or int(doc.get("threads", 1)))
    out = args.out or doc.get("out")
    failed = 0
    for sid in ids:
        kwargs = {"samples": args.samples} if args.samples and sid in ("sheppard-gns", "qnorm-exact", "gns-exponent-shape") else {}
        res = run_suite(sid, seed=seed, **kwargs)
        failed += not res.passed
        print(f"{'PASS' if res.passed else 'FAIL'}  {sid:28s} {res.seconds:7.1f}s  {res.summary}", flush=True)
        if out:
            Path(out).mkdir(parents=True, exist_ok=True)
            io.write_csv(Path(out) / f"suite-{sid}.csv", res.rows, ROW_FIELDS)
            meta = {"suite": sid, "passed": res.passed, "summary": res.summary, "seed": seed,
                    "seconds": round(res.seconds, 3)}
            (Path(out) / f"suite-{sid}.json").write_text(json.dumps(meta, indent=2) + "\n")
    return EXIT_SUITE_FAILED if failed else EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "suite":
            return _run_suites(args)
        return _run_experiment(args)
    except ConfigError as exc:
        print(f"ptfsense: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"ptfsense: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
