import math
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path
from typing import Optional

import numpy as np

from .._driver import Algorithm, SolveOptions, least_squares_multipliers, solve
from .._exceptions import DomainError, ModelError, ReferenceOptimumError
from .._logging import logger
from .._model import StandardFormProblem
from ._constants import load_constants, parse_constants

REFERENCE_DIR = Path(__file__).parent / "references"
FEASIBILITY_TOL = 1e-6
STATIONARITY_TOL = 1e-5
REFERENCE_OPTIONS = SolveOptions(algorithm=Algorithm.SLCP, eps_gl=1e-9, eps_dx=1e-12, sub_tol=1e-10)


@dataclass(frozen=True, eq=False)
class ReferenceOptimum:
    x: np.ndarray
    f: float
    provenance: str


@dataclass(frozen=True, eq=False)
class BenchmarkDef:
    """
    A benchmark problem with its nominal start point and (lazily) its reference optimum.

    The reference optimum is read from ``references/<id>.txt`` when present,
    otherwise it is computed by an SLCP solve from the nominal start.
    """

    id: str
    problem: StandardFormProblem
    x_nominal: np.ndarray
    constants_file: Path
    description: str = ""

    @property
    def reference_file(self) -> Path:
        return REFERENCE_DIR / f"{self.id}.txt"

    @cached_property
    def reference_optimum(self) -> ReferenceOptimum:
        reference = read_reference(self)
        if reference is None:
            logger.warning(f"No stored reference optimum for '{self.id}', computing one")
            reference = compute_reference(self)
        check_reference(self, reference)
        return reference


def check_reference(bench: BenchmarkDef, reference: ReferenceOptimum) -> None:
    """
    A reference optimum must be feasible and stationary: some nonnegative multipliers on
    its active rows leave a log-space Lagrangian gradient below ``STATIONARITY_TOL``.

    :raises ReferenceOptimumError: if either test fails.
    """
    violation = bench.problem.max_violation(reference.x)
    if violation > FEASIBILITY_TOL:
        raise ReferenceOptimumError(
            f"Reference optimum of '{bench.id}' violates its constraints by {violation:.3e}"
        )
    try:
        _, stationarity = least_squares_multipliers(bench.problem, reference.x)
    except DomainError as e:
        raise ReferenceOptimumError(f"Reference optimum of '{bench.id}' is not evaluable: {e}") from e
    if stationarity > STATIONARITY_TOL:
        raise ReferenceOptimumError(
            f"Reference optimum of '{bench.id}' is not stationary: |grad L| = {stationarity:.3e}"
        )


def compute_reference(
    bench: BenchmarkDef, options: SolveOptions = REFERENCE_OPTIONS
) -> ReferenceOptimum:
    """
    :raises ReferenceOptimumError: if the solve does not converge.
    """
    result = solve(bench.problem, bench.x_nominal, options)
    if not result.converged:
        raise ReferenceOptimumError(
            f"Reference solve for '{bench.id}' failed: {result.termination.value} "
            f"after {result.iterations} iterations at |grad L| = {result.grad_lagrangian:.3e}"
        )
    provenance = (
        f"slcp solve from nominal start, eps_gl={options.eps_gl:g}, "
        f"{result.iterations} iterations, {result.termination.value}"
    )
    return ReferenceOptimum(np.array(result.x_star), float(result.f_star), provenance)


def read_reference(bench: BenchmarkDef, path: Optional[Path] = None) -> Optional[ReferenceOptimum]:
    path = path or bench.reference_file
    if not path.exists():
        return None
    text = path.read_text(encoding="utf-8")
    values = parse_constants(text, path.name)
    provenance = ""
    for line in text.splitlines():
        if line.startswith("# provenance:"):
            provenance = line.split(":", 1)[1].strip()
    try:
        x = bench.problem.point({k[2:]: v for k, v in values.items() if k.startswith("x.")})
        f = values["objective"]
    except KeyError as e:
        raise ReferenceOptimumError(f"Reference file {path.name} lacks {e}") from e
    except ModelError as e:
        raise ReferenceOptimumError(f"Reference file {path.name} is incomplete: {e}") from e
    return ReferenceOptimum(x, f, provenance or f"stored in {path.name}")


def write_reference(
    bench: BenchmarkDef, reference: ReferenceOptimum, force: bool = False, path: Optional[Path] = None
) -> Path:
    """
    :raises ReferenceOptimumError: if the file exists and ``force`` is not set.
    """
    path = path or bench.reference_file
    if path.exists() and not force:
        raise ReferenceOptimumError(f"Refusing to overwrite {path} without force")
    check_reference(bench, reference)
    lines = [
        f"# reference optimum for {bench.id}",
        f"# provenance: {reference.provenance}",
        f"objective = {reference.f!r}",
    ]
    lines += [f"x.{name} = {float(v)!r}" for name, v in zip(bench.problem.variable_names, reference.x)]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def recompute_reference(
    bench: BenchmarkDef, tol: float = 1e-9, force: bool = False, path: Optional[Path] = None
) -> ReferenceOptimum:
    path = path or bench.reference_file
    if path.exists() and not force:
        raise ReferenceOptimumError(f"Refusing to overwrite {path} without force")
    options = replace(REFERENCE_OPTIONS, eps_gl=tol, sub_tol=min(REFERENCE_OPTIONS.sub_tol, tol))
    reference = compute_reference(bench, options)
    write_reference(bench, reference, force=True, path=path)
    logger.info(f"Wrote reference optimum for '{bench.id}' (f = {reference.f:.10g}) to {path}")
    return reference


def nominal_start(bench_problem: StandardFormProblem, constants_name: str) -> np.ndarray:
    return bench_problem.point(load_constants(constants_name).start)


def relative_gap(f: float, f_ref: float) -> float:
    return abs(f - f_ref) / abs(f_ref) if f_ref else math.inf
