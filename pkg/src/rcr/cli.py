"""Command-line front end: ``rcr solve | oracle | gen-grid | experiment``."""

from __future__ import annotations

import argparse
import math
import sys

from . import bench, oracle
from .compensate import Scheme
from .exact import Task
from .model import (ModelError, UAIParseError, UnsupportedModelError, condition, read_evidence,
                    read_uai, write_uai)
from .recover import Heuristic, RecoveryConfig, rcr_solve

EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED = 0, 2, 3

LINEAR_LIMIT = 300.0


def _fmt_value(log_value: float) -> str:
    if not math.isfinite(log_value):
        return f"{log_value} (log)"
    if abs(log_value) > LINEAR_LIMIT:
        return f"{log_value:.12g} (log)"
    return f"{log_value:.12g} (log)  {math.exp(log_value):.12g} (linear)"


def _load(args):
    fg = read_uai(args.model)
    if getattr(args, "evidence", None):
        fg = condition(fg, read_evidence(args.evidence))
    return fg


def cmd_solve(args) -> int:
    fg = _load(args)
    config = RecoveryConfig(heuristic=Heuristic(args.recover), batch_size=args.batch,
                            max_rounds=args.max_rounds, task=Task(args.task),
                            scheme=Scheme(args.scheme), cost_budget=args.budget)
    state, trace = rcr_solve(fg, config, args.tol, args.iters)
    if args.trace:
        trace.write(args.trace)
    last = trace.records[-1]
    print(f"rounds: {len(trace)}")
    print(f"recovered: {last['recovered_total']}")
    label = "upper bound" if config.scheme.is_upper_bound else "approximation"
    print(f"{label}: {_fmt_value(state.upper)}")
    if config.task is Task.MPE or state.certified:
        print(f"lower bound: {_fmt_value(state.lower)}")
    print(f"certified: {'yes' if state.certified else 'no'}")
    if state.incumbent is not None:
        print("assignment: " + " ".join(str(int(s)) for s in state.incumbent))
    return EXIT_OK


def cmd_oracle(args) -> int:
    fg = _load(args)
    value, a = oracle.brute_force(fg, Task(args.task))
    print(f"value: {_fmt_value(value)}")
    if a is not None:
        print("assignment: " + " ".join(str(int(s)) for s in a))
    return EXIT_OK


def cmd_gen_grid(args) -> int:
    spec = bench.GridSpec(args.rows, args.cols, args.unary, args.coupling, args.seed)
    text = write_uai(bench.generate_grid(spec))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_experiment(args) -> int:
    specs = [bench.GridSpec(args.rows, args.cols, args.unary, args.coupling, seed)
             for seed in range(args.seed, args.seed + args.instances)]
    config = RecoveryConfig(heuristic=Heuristic(args.recover), batch_size=args.batch,
                            max_rounds=args.max_rounds, task=Task.MPE,
                            scheme=Scheme(args.scheme), cost_budget=args.budget)
    result = bench.run_experiment(specs, config, args.tol, args.iters)
    table = result.to_csv(include_time=args.timing)
    if args.output == "-":
        sys.stdout.write(table)
    else:
        with open(args.output, "w") as fh:
            fh.write(table)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(result.buckets_csv())
    return EXIT_OK


def _solver_flags(p, with_task=True):
    if with_task:
        p.add_argument("--task", choices=[t.value for t in Task], default="mpe")
    p.add_argument("--scheme", choices=[s.value for s in Scheme], default="mpe-dd")
    p.add_argument("--recover", choices=[h.value for h in Heuristic], default="impact-violation")
    p.add_argument("--batch", type=int, default=5)
    p.add_argument("--max-rounds", type=int, default=None)
    p.add_argument("--iters", type=int, default=1000, help="sweep cap per round")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--budget", type=int, default=None,
                   help="stop before a round whose elimination plan exceeds this many table entries")


def _grid_flags(p):
    p.add_argument("--rows", type=int, default=10)
    p.add_argument("--cols", type=int, default=10)
    p.add_argument("--unary", type=float, default=1.0, help="unary log-potentials in [-u, u]")
    p.add_argument("--coupling", type=float, default=1.0, help="couplings in [-w, w]")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="bound and (when possible) certify MPE or log Z")
    _solver_flags(p)
    p.add_argument("--trace", help="write one JSON record per round to this file")
    p.add_argument("model")
    p.add_argument("evidence", nargs="?")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="brute-force enumeration")
    p.add_argument("--task", choices=[t.value for t in Task], default="mpe")
    p.add_argument("model")
    p.add_argument("evidence", nargs="?")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen-grid", help="write a random grid model in UAI format")
    _grid_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen_grid)

    p = sub.add_parser("experiment", help="solve a batch of seeded grids, write a CSV table")
    _grid_flags(p)
    _solver_flags(p, with_task=False)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--instances", type=int, default=50)
    p.add_argument("--timing", action="store_true", help="add a wall-time column")
    p.add_argument("--summary", help="also write the bucketed summary CSV here")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UAIParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (UnsupportedModelError, oracle.StateSpaceTooLarge, MemoryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ModelError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
