"""Command-line driver: ``gffnet {generate,sweep,concentration,recovery,compare}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from threadpoolctl import threadpool_limits

from . import experiments as ex

RUNNERS = {
    "sweep": (ex.run_sweep, ex.SWEEP_COLUMNS),
    "compare": (ex.run_compare, ex.SWEEP_COLUMNS),
    "concentration": (ex.run_concentration, ex.CONCENTRATION_COLUMNS),
    "recovery": (ex.run_recovery, ex.RECOVERY_COLUMNS),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gffnet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("generate", *RUNNERS):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path, help="TOML experiment config")
        p.add_argument("--seed", type=int, default=None, help="override master_seed (u64)")
        p.add_argument("--out", type=Path, default=None, help="output path (default: stdout; required for generate)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for trials")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    cfg = ex.load_config(args.config)
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise SystemExit("--seed must be an unsigned 64-bit integer")
        cfg = replace(cfg, master_seed=args.seed)
    if args.threads < 1:
        raise SystemExit("--threads must be >= 1")

    if args.command == "generate":
        if args.out is None:
            raise SystemExit("generate needs --out")
        g = ex.run_generate(cfg, args.out)
        logging.info("wrote %d edges on %d vertices to %s", g.n_edges, g.d, args.out)
        return 0

    runner, columns = RUNNERS[args.command]
    # BLAS stays single-threaded so reductions never depend on the thread count
    with threadpool_limits(limits=1):
        rows = runner(cfg, threads=args.threads)
    text = ex.render_csv(rows, columns, cfg.hash())
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.write_text(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
