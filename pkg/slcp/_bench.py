"""
Seeded multi-start trials, convergence-fraction curves and mean-iteration tables.

Trial ``t`` of a set draws its start point with ``numpy.random.PCG64(base_seed + t)``,
coordinate-wise uniform within ``band`` of the reference optimum, so every set
is a pure function of its configuration.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from ._driver import Algorithm, SolveOptions, Termination, solve  # noqa: E402
from ._exceptions import DomainError  # noqa: E402
from ._logging import logger  # noqa: E402
from ._registry import get_benchmark  # noqa: E402
from .problems._benchmark import relative_gap  # noqa: E402

BANDS = (0.10, 0.50, 0.80)
SUCCESS_TOL = 1e-4
CSV_COLUMNS = ["trial", "seed", "converged", "iterations", "termination", "f_final", "wall_ms"]

_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "svg.hashsalt": "slcp",
}


@dataclass(frozen=True)
class TrialConfig:
    benchmark: str
    algorithm: Algorithm = Algorithm.SLCP
    n_trials: int = 100
    band: float = 0.10
    base_seed: int = 0
    options: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("TrialConfig.n_trials must be at least 1")
        if self.band != 0 and not any(np.isclose(self.band, b) for b in BANDS):
            raise ValueError(f"TrialConfig.band must be one of {BANDS} (or 0), got {self.band}")
        if self.options.algorithm is not self.algorithm:
            object.__setattr__(self, "options", replace(self.options, algorithm=self.algorithm))


@dataclass(frozen=True, eq=False)
class TrialRecord:
    trial: int
    seed: int
    x0: np.ndarray
    converged: bool
    iterations: int
    termination: str
    f_final: float
    wall_ms: float = 0.0

    def row(self) -> Dict[str, object]:
        return {column: getattr(self, column) for column in CSV_COLUMNS}


@dataclass(frozen=True, eq=False)
class TrialSet:
    config: TrialConfig
    records: Tuple[TrialRecord, ...]
    f_reference: float

    def __len__(self):
        return len(self.records)

    @property
    def success_rate(self) -> float:
        if not self.records:
            return 0.0
        return sum(r.converged for r in self.records) / len(self.records)

    def to_frame(self, timing: bool = True) -> pd.DataFrame:
        frame = pd.DataFrame([r.row() for r in self.records], columns=CSV_COLUMNS)
        if not timing:
            frame["wall_ms"] = 0.0
        return frame


def sample_start(
    x_star: np.ndarray, band: float, seed: int, lower: np.ndarray, upper: np.ndarray
) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    x0 = rng.uniform(x_star * (1 - band), x_star * (1 + band))
    return np.clip(x0, lower, upper)


def _run_trial(
    benchmark: str,
    options: SolveOptions,
    trial: int,
    seed: int,
    band: float,
    x_star: np.ndarray,
    f_star: float,
) -> TrialRecord:
    problem = get_benchmark(benchmark).problem
    x0 = sample_start(x_star, band, seed, problem.lower_bounds, problem.upper_bounds)
    started = time.perf_counter()
    try:
        result = solve(problem, x0, options)
    except DomainError as e:
        logger.debug(f"Trial {trial} of {benchmark} could not start: {e}")
        return TrialRecord(
            trial, seed, x0, False, 0, Termination.POSITIVITY_FAILURE.value, float("nan"),
            1e3 * (time.perf_counter() - started),
        )
    converged = result.converged and relative_gap(result.f_star, f_star) <= SUCCESS_TOL
    return TrialRecord(
        trial,
        seed,
        x0,
        converged,
        result.iterations,
        result.termination.value,
        float(result.f_star),
        result.wall_ms,
    )


def run_trials(cfg: TrialConfig, jobs: int = 1) -> TrialSet:
    """
    Runs ``cfg.n_trials`` solves from seeded random starts around the reference optimum.

    :param cfg: The trial configuration.
    :param jobs: Worker processes; records are ordered by trial index either way.
    """
    bench = get_benchmark(cfg.benchmark)
    reference = bench.reference_optimum
    arguments = [
        (cfg.benchmark, cfg.options, t, cfg.base_seed + t, cfg.band, reference.x, reference.f)
        for t in range(cfg.n_trials)
    ]
    logger.info(
        f"Running {cfg.n_trials} {cfg.algorithm.value} trials on {cfg.benchmark} "
        f"(band {cfg.band:.2f}, seed {cfg.base_seed})"
    )
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_trial, *zip(*arguments)))
    else:
        records = [_run_trial(*a) for a in arguments]
    records.sort(key=lambda r: r.trial)
    return TrialSet(cfg, tuple(records), reference.f)


def convergence_curve(ts: TrialSet) -> List[Tuple[int, float]]:
    """
    Fraction of trials that succeeded within each iteration budget ``1..max_iter``.
    """
    if not ts.records:
        logger.warning(f"Empty trial set for {ts.config.benchmark}, no convergence curve")
        return []
    max_iter = ts.config.options.max_iter
    iterations = np.array([r.iterations for r in ts.records if r.converged], dtype=int)
    counts = np.bincount(np.clip(iterations, 0, max_iter), minlength=max_iter + 1)
    fractions = np.cumsum(counts)[1:] / len(ts.records)
    return [(i, float(f)) for i, f in zip(range(1, max_iter + 1), fractions)]


@dataclass(frozen=True, eq=False)
class SummaryTable:
    """
    Mean iterations of the successful trials per algorithm, with percent change against
    SQP and LSQP when those algorithms are part of the summary.
    """

    benchmark: str
    band: float
    frame: pd.DataFrame

    def mean(self, algorithm: Algorithm) -> Optional[float]:
        row = self.frame.loc[self.frame["algorithm"] == algorithm.value]
        if row.empty:
            return None
        value = row["mean_iterations"].iloc[0]
        return None if value is None or pd.isna(value) else float(value)

    def formatted(self) -> Dict[str, str]:
        """
        Cells in the ``"10.74 (-58.48%)"`` style, relative to SQP if present, otherwise LSQP.
        """
        cells = {}
        compare = next(
            (c for c in ("change_vs_sqp", "change_vs_lsqp") if c in self.frame.columns), None
        )
        for _, row in self.frame.iterrows():
            mean = row["mean_iterations"]
            if mean is None or pd.isna(mean):
                cells[row["algorithm"]] = "-"
                continue
            text = f"{mean:.2f}"
            if compare is not None and not pd.isna(row[compare]):
                text += f" ({row[compare]:+.2f}%)"
            cells[row["algorithm"]] = text
        return cells


def _percent_change(value: Optional[float], base: Optional[float]) -> Optional[float]:
    if value is None or base is None or base == 0:
        return None
    return 100.0 * (value - base) / base


def summarize(sets: Sequence[TrialSet]) -> SummaryTable:
    """
    :raises ValueError: if the sets do not share one benchmark and band.
    """
    if not sets:
        raise ValueError("Nothing to summarize")
    keys = {(ts.config.benchmark, round(ts.config.band, 6)) for ts in sets}
    if len(keys) != 1:
        raise ValueError(f"Trial sets must share a benchmark and band, got {sorted(keys)}")
    means: Dict[Algorithm, Optional[float]] = {}
    rows = []
    for ts in sets:
        converged = [r.iterations for r in ts.records if r.converged]
        mean = float(np.mean(converged)) if converged else None
        means[ts.config.algorithm] = mean
        rows.append(
            {
                "algorithm": ts.config.algorithm.value,
                "trials": len(ts.records),
                "converged": len(converged),
                "mean_iterations": mean,
            }
        )
    for base in (Algorithm.SQP, Algorithm.LSQP):
        if base not in means:
            continue
        for row in rows:
            algorithm = Algorithm(row["algorithm"])
            change = None if algorithm is base else _percent_change(means[algorithm], means[base])
            row[f"change_vs_{base.value}"] = change
    frame = pd.DataFrame(rows)
    benchmark, band = sets[0].config.benchmark, sets[0].config.band
    return SummaryTable(benchmark, band, frame)


def summary_frame(tables: Sequence[SummaryTable]) -> pd.DataFrame:
    frames = []
    for table in tables:
        frame = table.frame.copy()
        frame.insert(0, "band", table.band)
        frame.insert(0, "benchmark", table.benchmark)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def trial_filename(ts: TrialSet) -> str:
    cfg = ts.config
    return f"{cfg.benchmark}_{cfg.algorithm.value}_{cfg.band:.2f}.csv"


def curves_filename(benchmark: str) -> str:
    return f"{benchmark}_curves.svg"


def plot_curves(sets: Sequence[TrialSet], path: Union[str, Path]) -> Path:
    """
    One subplot per band, one convergence-fraction series per algorithm.
    """
    path = Path(path)
    bands = sorted({ts.config.band for ts in sets})
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(
            1, max(len(bands), 1), figsize=(3.2 * max(len(bands), 1), 2.8), sharey=True, squeeze=False
        )
        for ax, band in zip(axes[0], bands):
            for ts in sets:
                if ts.config.band != band:
                    continue
                curve = convergence_curve(ts)
                if not curve:
                    continue
                iterations, fractions = zip(*curve)
                ax.step(iterations, fractions, where="post", label=ts.config.algorithm.value.upper())
            ax.set_title(f"+/- {band * 100:.0f}%")
            ax.set_xlabel("Iteration")
            ax.set_xscale("log")
            ax.set_ylim(0.0, 1.02)
            ax.grid(True, alpha=0.3)
            ax.legend(loc="lower right")
        axes[0][0].set_ylabel("Fraction converged")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path


def export(
    obj: Union[TrialSet, SummaryTable, Sequence[TrialSet]],
    format: str,
    path: Union[str, Path],
    timing: bool = True,
) -> Path:
    """
    Writes a trial set or summary as CSV, or trial sets as an SVG convergence plot.

    :raises OSError: if the path is not writable.
    """
    path = Path(path)
    if format == "csv":
        if isinstance(obj, TrialSet):
            obj.to_frame(timing).to_csv(path, index=False)
        elif isinstance(obj, SummaryTable):
            summary_frame([obj]).to_csv(path, index=False)
        else:
            raise TypeError(f"Cannot export {type(obj).__name__} as csv")
        return path
    if format == "svg-plot":
        sets = [obj] if isinstance(obj, TrialSet) else list(obj)  # type: ignore[arg-type]
        return plot_curves(sets, path)
    raise ValueError(f"Unknown export format '{format}', expected 'csv' or 'svg-plot'")


def read_trials_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path)
