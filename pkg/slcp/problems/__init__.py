__all__ = [
    "BenchmarkDef",
    "ReferenceOptimum",
    "Constants",
    "load_constants",
    "parse_constants",
    "read_reference",
    "write_reference",
    "compute_reference",
    "recompute_reference",
    "build_simple_example",
    "build_floudas",
    "build_kirschen_ozturk",
    "build_hoburg",
    "drag_blackbox",
    "solve_drag",
    "drag_constraint",
    "drag_fit_posynomial",
]

from ._benchmark import (
    BenchmarkDef,
    ReferenceOptimum,
    compute_reference,
    read_reference,
    recompute_reference,
    write_reference,
)
from ._constants import Constants, load_constants, parse_constants
from .drag import drag_blackbox, drag_constraint, drag_fit_posynomial, solve_drag
from .floudas import build_floudas
from .hoburg import build_hoburg
from .kirschen_ozturk import build_kirschen_ozturk
from .simple import build_simple_example
