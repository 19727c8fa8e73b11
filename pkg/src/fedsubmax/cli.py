"""fedsubmax command line: run / validate / brute."""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager

from .config import load_config
from .errors import ConfigError, FedSubmaxError
from .harness import build_instance, run_experiment


EXIT_ERROR = 2


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _line(record: dict) -> str:
    return json.dumps(record, default=_json_default) + "\n"


@contextmanager
def _sink(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w") as fh:
            yield fh


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = args.out if args.out is not None else cfg.output
    ledgers = []
    with _sink(out) as fh:
        for rec in run_experiment(cfg, seed=args.seed, timing=args.timing, ledger_out=ledgers):
            fh.write(_line(rec))
    if args.ledger:
        ledgers[0].write_jsonl(args.ledger)
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    pop, M = build_instance(cfg)
    sys.stdout.write(_line({"valid": True, "algorithm": cfg.algorithm, "n": pop.n, "N": pop.N, "r": M.rank}))
    return 0


def _cmd_brute(args) -> int:
    cfg = load_config(args.config).model_copy(update={"algorithm": "brute"})
    with _sink(args.out) as fh:
        for rec in run_experiment(cfg, seed=args.seed):
            fh.write(_line(rec))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fedsubmax", description="Federated submodular maximization experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the configured algorithm and emit JSON-lines metrics")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help="metrics path (default: config 'output' or stdout)")
    run.add_argument("--ledger", default=None, help="also write the per-round communication ledger here")
    run.add_argument("--timing", action="store_true", help="add wall-clock seconds to the summary (breaks byte-identical output)")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="check a config and the instance it describes")
    val.add_argument("--config", required=True)
    val.set_defaults(func=_cmd_validate)

    brute = sub.add_parser("brute", help="brute-force OPT for the configured instance")
    brute.add_argument("--config", required=True)
    brute.add_argument("--seed", type=int, default=None)
    brute.add_argument("--out", default=None)
    brute.set_defaults(func=_cmd_brute)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (FedSubmaxError, OSError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ConfigError) and exc.field:
            record["field"] = exc.field
        sys.stdout.write(_line(record))
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
