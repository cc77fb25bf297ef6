"""Command-line entry point: ``fpl run`` and ``fpl validate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..freeprod.rep import DEFAULT_MEM_BUDGET, MemoryBudgetError, SolverError
from .config import ConfigError, ExperimentConfig
from .runner import Run, report, run, write_outputs

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET, EXIT_SOLVER = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fpl", description="Truncated free-product experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run an experiment and write its report")
    r.add_argument("config", type=Path)
    r.add_argument("--out", type=Path, default=None, help="output directory")
    r.add_argument("--seed", type=int, default=None, help="override the config seed")
    r.add_argument("--mem-budget", type=int, default=DEFAULT_MEM_BUDGET, metavar="BYTES")
    v = sub.add_parser("validate", help="check a configuration without running it")
    v.add_argument("config", type=Path)
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.load(args.config)
    except (ConfigError, OSError) as exc:
        print(f"fpl: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.command == "validate":
        print(f"fpl: {args.config} is valid ({cfg.kind})")
        return EXIT_OK

    out_dir = args.out or Path(cfg.output.get("dir", "."))
    seed = cfg.seed if args.seed is None else args.seed
    try:
        r = Run(cfg, seed, args.mem_budget)
        r, rep = run(cfg, seed, args.mem_budget, state=r)
    except MemoryBudgetError as exc:
        write_outputs(r, report(r, "budget-exceeded", str(exc)), out_dir)
        print(f"fpl: memory budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SolverError as exc:
        r.results["best_bound"] = exc.best
        write_outputs(r, report(r, "solver-error", str(exc)), out_dir)
        print(f"fpl: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ConfigError as exc:
        print(f"fpl: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    write_outputs(r, rep, out_dir)
    print(f"fpl: wrote {out_dir / 'report.json'}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
