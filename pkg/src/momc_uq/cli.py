"""Command-line interface.

Verbs:
  solve      one deterministic run at a fixed random input, CSV of profiles
  reference  build and persist the reference moment fields (plain MC)
  sweep      error-vs-samples convergence sweep against the reference
  diag       hierarchy correlation diagnostics dump

Exit codes: 0 success, 2 configuration error, 3 numerical blow-up,
4 input/output failure.
"""

from __future__ import annotations

import argparse
import sys

from .config import load_key_values, resolve
from .errors import ConfigError, MomcError, NumericsError, StaleReferenceError
from .harness import run_diag, run_reference, run_solve, run_sweep


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="momc-uq",
        description="Finite-volume IMEX solvers with multi-order Monte Carlo "
                    "estimators for PDEs with random inputs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("solve", "single deterministic run"),
        ("reference", "build the persisted reference solution"),
        ("sweep", "run the error-vs-samples sweep"),
        ("diag", "dump hierarchy diagnostics"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file (.cfg or .json)")
        p.add_argument("--seed", type=int, default=None, help="override base seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="process count for per-sample solves")
        p.add_argument("--replications", type=int, default=None,
                       help="override replication count")
        p.add_argument("--timings", action="store_true",
                       help="record real wall times (breaks byte reproducibility)")
        if name == "solve":
            p.add_argument("--z", type=float, default=0.5,
                           help="random-input value for the single run")
            p.add_argument("--order", type=int, default=None,
                           help="solver order (default: reference order)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        kv = load_key_values(args.config)
        overrides = {
            "seed": args.seed,
            "out": args.out,
            "workers": args.workers,
            "replications": args.replications,
        }
        cfg = resolve(kv, overrides)
        if args.timings:
            cfg.timings = True
        if args.command == "solve":
            path = run_solve(cfg, args.z, order=args.order)
        elif args.command == "reference":
            run_reference(cfg)
            path = None
        elif args.command == "sweep":
            path = run_sweep(cfg)
        elif args.command == "diag":
            path = run_diag(cfg)
        else:  # pragma: no cover
            raise ConfigError(f"unknown command {args.command}")
        if path is not None:
            print(path)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError,) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except StaleReferenceError as exc:
        print(f"reference error: {exc}", file=sys.stderr)
        return 2
    except MomcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
