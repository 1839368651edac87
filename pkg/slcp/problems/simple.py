"""
Two-variable geometric program whose single posynomial constraint is easy to
overshoot when linearized.
"""
from .._model import ProblemBuilder
from .._registry import benchmark
from ._benchmark import BenchmarkDef, nominal_start
from ._constants import load_constants

REQUIRED = (
    "objective_weight",
    "objective_decay",
    "objective_growth",
    "constraint_coefficient",
    "constraint_decay",
    "constraint_growth",
)


@benchmark("simple", description="two-variable GP with one posynomial constraint", order=0)
def build_simple_example() -> BenchmarkDef:
    c = load_constants("simple", REQUIRED)
    b = ProblemBuilder(["x", "y"], name="simple")
    x, y = b["x"], b["y"]
    decay, growth, weight = c["objective_decay"], c["objective_growth"], c["objective_weight"]
    b.minimize(x**-decay + weight * x**growth + y**-decay + weight * y**growth)
    b.add_le(
        c["constraint_coefficient"] * x ** -c["constraint_decay"] + x ** c["constraint_growth"] + y
    )
    problem = b.build()
    return BenchmarkDef("simple", problem, nominal_start(problem, "simple"), c.path, "simple example")
