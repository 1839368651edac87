"""
Command-line front end: ``slcp {solve,bench,curves,recompute-references,list}``.

Exit codes are 0 on success, 1 when a solve or trial run fails, 2 on usage errors.
"""
import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from ._bench import (
    BANDS,
    TrialConfig,
    TrialSet,
    curves_filename,
    export,
    run_trials,
    summarize,
    summary_frame,
    trial_filename,
)
from ._driver import Algorithm, SolveOptions, solve
from ._exceptions import BenchmarkError, DomainError
from ._logging import logger
from ._registry import benchmark_description, benchmark_ids, get_benchmark
from .problems import recompute_reference

_LOG_FORMAT = "<green>{time:HH:mm:ss}</green> <level>{level: <8}</level> {message}"
_MAX_PRINTED_VARIABLES = 20


def _configure_logging(trace: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="TRACE" if trace else "INFO", format=_LOG_FORMAT)
    logger.enable("slcp")


def _point(text: str) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")
    if not all(v > 0 for v in values):
        raise argparse.ArgumentTypeError("start point must be strictly positive")
    return np.array(values)


def _band(text: str) -> float:
    try:
        band = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got '{text}'")
    if band != 0 and not any(np.isclose(band, b) for b in BANDS):
        raise argparse.ArgumentTypeError(
            f"band must be one of {', '.join(str(b) for b in (0,) + BANDS)}, got {text}"
        )
    return band


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    ids = benchmark_ids()
    algorithms = [a.value for a in Algorithm]

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--trace", action="store_true", help="Log at TRACE level.")

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--eps-gl", type=float, default=SolveOptions.eps_gl)
    solver.add_argument("--eps-dx", type=float, default=SolveOptions.eps_dx)
    solver.add_argument("--max-iter", type=_positive_int, default=SolveOptions.max_iter)
    solver.add_argument("--sub-tol", type=float, default=SolveOptions.sub_tol)

    trials = argparse.ArgumentParser(add_help=False)
    trials.add_argument("--benchmark", required=True, choices=ids)
    trials.add_argument("--algo", nargs="+", choices=algorithms, default=algorithms)
    trials.add_argument("--band", nargs="+", type=_band, default=list(BANDS))
    trials.add_argument("--trials", type=_positive_int, default=100)
    trials.add_argument("--seed", type=int, default=0)
    trials.add_argument("--jobs", type=_positive_int, default=os.cpu_count() or 1)
    trials.add_argument("--out", type=Path, default=Path("."))

    parser = argparse.ArgumentParser(
        prog="slcp", description="SQP, LSQP and SLCP solvers with their benchmark harness."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("solve", parents=[common, solver], help="Solve one benchmark.")
    p.add_argument("--benchmark", required=True, choices=ids)
    p.add_argument("--algo", choices=algorithms, default=Algorithm.SLCP.value)
    p.add_argument("--x0", type=_point, help="Comma-separated start point.")
    p.add_argument("--history", type=Path, help="Write the iteration history as CSV.")

    p = commands.add_parser(
        "bench", parents=[common, solver, trials], help="Run seeded trials and summarize."
    )
    p.add_argument(
        "--timing", action="store_true", help="Record wall time in the trial CSVs."
    )

    commands.add_parser(
        "curves", parents=[common, solver, trials], help="Plot convergence curves."
    )

    p = commands.add_parser(
        "recompute-references", parents=[common], help="Regenerate stored reference optima."
    )
    p.add_argument("--benchmark", nargs="+", choices=ids, default=ids)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--force", action="store_true", help="Overwrite existing files.")

    commands.add_parser("list", parents=[common], help="List benchmark ids.")
    return parser


def _options(args: argparse.Namespace, algorithm: Algorithm) -> SolveOptions:
    return SolveOptions(
        algorithm=algorithm,
        eps_gl=args.eps_gl,
        eps_dx=args.eps_dx,
        max_iter=args.max_iter,
        sub_tol=args.sub_tol,
    )


def _solve(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    bench = get_benchmark(args.benchmark)
    problem = bench.problem
    x0 = bench.x_nominal if args.x0 is None else args.x0
    if len(x0) != problem.n:
        parser.error(f"argument --x0: '{args.benchmark}' has {problem.n} variables, got {len(x0)}")
    algorithm = Algorithm.parse(args.algo)
    try:
        result = solve(problem, x0, _options(args, algorithm))
    except DomainError as e:
        logger.error(f"Cannot start {algorithm.value} on '{args.benchmark}': {e}")
        return 1

    print(f"benchmark:   {args.benchmark}")
    print(f"algorithm:   {algorithm.value}")
    print(f"termination: {result.termination.value}")
    print(f"iterations:  {result.iterations}")
    print(f"objective:   {result.f_star:.10g}")
    print(f"violation:   {problem.max_violation(result.x_star):.3e}")
    if problem.n <= _MAX_PRINTED_VARIABLES:
        for name, value in problem.as_dict(result.x_star).items():
            print(f"  {name} = {value:.8g}")
    if args.trace and result.history:
        print(result.history_frame().to_string(index=False))
    if args.history is not None:
        result.write_history(args.history)
        logger.info(f"Wrote iteration history to {args.history}")
    return 0 if result.converged else 1


def _run_cells(args: argparse.Namespace) -> Dict[float, List[TrialSet]]:
    cells: Dict[float, List[TrialSet]] = {}
    for band in args.band:
        for algo in args.algo:
            algorithm = Algorithm.parse(algo)
            cfg = TrialConfig(
                benchmark=args.benchmark,
                algorithm=algorithm,
                n_trials=args.trials,
                band=band,
                base_seed=args.seed,
                options=_options(args, algorithm),
            )
            ts = run_trials(cfg, jobs=args.jobs)
            logger.info(
                f"{args.benchmark} {algorithm.value} +/-{band:.0%}: "
                f"{ts.success_rate:.0%} of {len(ts)} trials converged"
            )
            cells.setdefault(band, []).append(ts)
    return cells


def _bench(args: argparse.Namespace) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    cells = _run_cells(args)
    tables = []
    for band, sets in cells.items():
        for ts in sets:
            path = export(ts, "csv", args.out / trial_filename(ts), timing=args.timing)
            logger.info(f"Wrote {path}")
        table = summarize(sets)
        tables.append(table)
        cells_text = ", ".join(f"{algo}: {text}" for algo, text in table.formatted().items())
        print(f"{args.benchmark} +/-{band:.0%}  {cells_text}")
    summary_path = args.out / f"{args.benchmark}_summary.csv"
    summary_frame(tables).to_csv(summary_path, index=False)
    logger.info(f"Wrote {summary_path}")
    return 0


def _curves(args: argparse.Namespace) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    cells = _run_cells(args)
    sets = [ts for band_sets in cells.values() for ts in band_sets]
    path = export(sets, "svg-plot", args.out / curves_filename(args.benchmark))
    logger.info(f"Wrote {path}")
    return 0


def _recompute(args: argparse.Namespace) -> int:
    status = 0
    for bench_id in args.benchmark:
        try:
            recompute_reference(get_benchmark(bench_id), tol=args.tol, force=args.force)
        except BenchmarkError as e:
            logger.error(str(e))
            status = 1
    return status


def _list() -> int:
    for bench_id in benchmark_ids():
        print(f"{bench_id:<18} {benchmark_description(bench_id)}")
    return 0


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    _configure_logging(args.trace)

    try:
        if args.command == "solve":
            return _solve(args, parser)
        if args.command == "bench":
            return _bench(args)
        if args.command == "curves":
            return _curves(args)
        if args.command == "recompute-references":
            return _recompute(args)
        return _list()
    except SystemExit as e:
        return int(e.code or 0)
    except BenchmarkError as e:
        logger.error(str(e))
        return 1


def main() -> None:
    sys.exit(run())
