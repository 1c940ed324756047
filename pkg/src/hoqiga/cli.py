"""Command-line interface.

Subcommands: run (one algorithm on one problem), bench (an experiment plan),
theory (order/factor tables), gen (random 3-SAT instances) and meta
(contraction-factor grid search).  Exit codes: 0 success, 1 usage error,
2 runtime error, 3 partial failure in bench.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

from .algorithms import Qiga1Config, QigaConfig, SgaConfig, qiga1_evolve, qiga_evolve, sga_evolve
from .core import RandomSource, bits_to_string
from .harness import ExperimentPlan, export_all, rank_algorithms, run_experiment
from .metaopt import TuningSpec, export_tuning_csv, tune
from .problems import generate_uniform_3sat, load_problem, to_dimacs
from .theory import profile_grid

OUTDIR_ENV = "HOQIGA_OUTDIR"


class UsageError(Exception):
    """Bad flags or flag combinations; exits with code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="hoqiga", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one algorithm on one problem")
    run.add_argument("--algo", required=True, choices=["qiga2", "qiga-r", "qiga1", "sga"])
    run.add_argument("--order", type=int, help="register order for qiga-r")
    run.add_argument("--mu", type=float, default=0.9918, help="contraction factor")
    run.add_argument(
        "--problem", required=True,
        help="DIMACS path or spec: onemax:N, trap:PAIRS, 3sat:VARS:CLAUSES:SEED",
    )
    run.add_argument("--maxfe", type=int, default=5000, help="fitness evaluation budget")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", help="write the best-so-far trajectory CSV here")

    bench = sub.add_parser("bench", help="execute an experiment plan file")
    bench.add_argument("--plan", required=True, help="JSON plan path")
    bench.add_argument(
        "--outdir", default=None,
        help=f"output directory (default: ${OUTDIR_ENV} or current directory)",
    )
    bench.add_argument("--jobs", type=int, default=None, help="parallel workers")

    theory = sub.add_parser("theory", help="order / quantum-factor tables")
    theory.add_argument(
        "--n-range", default="2:64",
        help="problem sizes as START:STOP[:STEP], inclusive",
    )
    theory.add_argument("--orders", default="1,2,3,4,5", help="comma-separated orders")
    theory.add_argument("--csv", help="also write the table to this CSV path")

    gen = sub.add_parser("gen", help="generate a uniform random 3-SAT instance")
    gen.add_argument("--vars", type=int, required=True)
    gen.add_argument("--clauses", type=int, help="clause count")
    gen.add_argument("--ratio", type=float, help="clause/variable ratio instead of --clauses")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output DIMACS path")

    meta = sub.add_parser("meta", help="grid-search the contraction factor")
    meta.add_argument("--spec", help="JSON tuning spec path")
    meta.add_argument("--grid", help="comma-separated candidate values")
    meta.add_argument("--problems", help="comma-separated problem specs")
    meta.add_argument("--runs", type=int, default=20)
    meta.add_argument("--seed", type=int, default=0)
    meta.add_argument("--maxfe", type=int, default=5000)
    meta.add_argument("--jobs", type=int, default=1)
    meta.add_argument("--out", help="write the score table CSV here")
    return parser


def _cmd_run(args) -> int:
    problem = load_problem(args.problem)
    if args.algo == "qiga-r":
        if args.order is None:
            raise UsageError("--algo qiga-r requires --order")
        if not 1 <= args.order <= problem.size:
            raise UsageError(
                f"--order must satisfy 1 <= order <= problem size "
                f"({problem.size}), got {args.order}"
            )
    elif args.order is not None:
        raise UsageError("--order only applies to --algo qiga-r")

    rng = RandomSource(args.seed)
    if args.algo in ("qiga2", "qiga-r"):
        config = QigaConfig(
            order=2 if args.algo == "qiga2" else args.order,
            contraction_factor=args.mu,
            max_fitness_evaluations=args.maxfe,
        )
        result = qiga_evolve(problem, config, rng)
    elif args.algo == "qiga1":
        config = Qiga1Config(max_fitness_evaluations=args.maxfe)
        result = qiga1_evolve(problem, config, rng)
    else:
        population = 100
        generations, remainder = divmod(args.maxfe, population)
        if remainder or generations < 1:
            raise UsageError(
                f"--maxfe must be a positive multiple of the sga population "
                f"({population}), got {args.maxfe}"
            )
        config = SgaConfig(population_size=population, generations=generations)
        result = sga_evolve(problem, config, rng)

    print(f"problem {problem.name} size {problem.size}")
    print(f"best_fitness {result.best_fitness!r}")
    print(f"best_bits {bits_to_string(result.best_bits)}")
    print(f"evaluations {result.evaluations} generations {result.generations}")
    if args.out:
        with Path(args.out).open("w", newline="\n") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["evaluation", "best_so_far"])
            for i, value in enumerate(result.trajectory, start=1):
                writer.writerow([i, repr(float(value))])
        print(f"trajectory {args.out}")
    return 0


def _cmd_bench(args) -> int:
    plan_path = Path(args.plan)
    if not plan_path.exists():
        raise UsageError(f"plan file not found: {plan_path}")
    plan = ExperimentPlan.from_json(plan_path.read_text())
    if args.jobs is not None:
        if args.jobs < 1:
            raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
        plan = ExperimentPlan(
            problems=plan.problems,
            algorithms=plan.algorithms,
            runs_per_cell=plan.runs_per_cell,
            base_seed=plan.base_seed,
            max_fitness_evaluations=plan.max_fitness_evaluations,
            jobs=args.jobs,
        )
    outdir = args.outdir or os.environ.get(OUTDIR_ENV) or "."
    result = run_experiment(plan)
    written = export_all(result, outdir)
    for path in written:
        print(f"wrote {path}")
    if len(result.algorithms()) >= 2 and not all(c.failed for c in result.cells):
        try:
            ranking = rank_algorithms(result)
        except ValueError:
            ranking = None
        if ranking is not None:
            print("ranking:")
            for rank, (label, count) in enumerate(ranking.rows, start=1):
                print(f"  {rank}. {label}: {count}")
            for problem, winners in ranking.ties:
                print(f"  tie on {problem}: {', '.join(winners)}")
    if result.failures:
        for cell in result.failures:
            print(f"failed: {cell.problem} / {cell.algorithm}: {cell.error}", file=sys.stderr)
        return 3
    return 0


def _parse_range(text: str) -> range:
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"--n-range must be START:STOP[:STEP], got {text!r}")
    try:
        numbers = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"--n-range must be integers, got {text!r}")
    start, stop = numbers[0], numbers[1]
    step = numbers[2] if len(numbers) == 3 else 1
    if start < 1 or stop < start or step < 1:
        raise UsageError(f"bad --n-range {text!r}")
    return range(start, stop + 1, step)


def _cmd_theory(args) -> int:
    try:
        orders = [int(p) for p in args.orders.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"--orders must be comma-separated integers, got {args.orders!r}")
    if not orders or any(r < 1 for r in orders):
        raise UsageError(f"orders must be >= 1, got {args.orders!r}")
    profiles = profile_grid(_parse_range(args.n_range), orders)
    header = ["N", "r", "w", "log2_lambda", "lambda", "class"]
    rows = [
        [p.problem_size, p.order, repr(p.relative_order), repr(p.log2_quantum_factor),
         repr(p.quantum_factor), p.algorithm_class.value]
        for p in profiles
    ]
    print("\t".join(header))
    for row in rows:
        print("\t".join(str(v) for v in row))
    if args.csv:
        with Path(args.csv).open("w", newline="\n") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
        print(f"wrote {args.csv}", file=sys.stderr)
    return 0


def _cmd_gen(args) -> int:
    if (args.clauses is None) == (args.ratio is None):
        raise UsageError("give exactly one of --clauses or --ratio")
    clause_count = args.clauses if args.clauses is not None else round(args.ratio * args.vars)
    formula = generate_uniform_3sat(args.vars, clause_count, RandomSource(args.seed))
    Path(args.out).write_text(to_dimacs(formula))
    print(f"wrote {args.out} ({formula.variable_count} vars, {formula.clause_count} clauses)")
    return 0


def _cmd_meta(args) -> int:
    if args.spec:
        spec = TuningSpec.from_json(Path(args.spec).read_text())
    else:
        if not args.grid or not args.problems:
            raise UsageError("meta needs either --spec or both --grid and --problems")
        try:
            grid = tuple(float(g) for g in args.grid.split(","))
        except ValueError:
            raise UsageError(f"--grid must be comma-separated floats, got {args.grid!r}")
        from .harness import ProblemSpec

        problems = tuple(
            ProblemSpec(name=source, source=source) for source in args.problems.split(",")
        )
        spec = TuningSpec(
            grid=grid,
            problems=problems,
            runs_per_candidate=args.runs,
            base_seed=args.seed,
            max_fitness_evaluations=args.maxfe,
            jobs=args.jobs,
        )
    result = tune(spec)
    print(f"best mu {result.best_value!r}{' (tie)' if result.tie else ''}")
    for i, mu in enumerate(result.candidates):
        marker = " *" if i == result.best_index else ""
        print(f"  mu={mu!r} score={float(result.scores[i])!r}{marker}")
    if args.out:
        export_tuning_csv(result, args.out)
        print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "bench": _cmd_bench,
    "theory": _cmd_theory,
    "gen": _cmd_gen,
    "meta": _cmd_meta,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
