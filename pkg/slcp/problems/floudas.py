"""
Heat exchanger design: eight variables, one posynomial row and five signomial rows.

Each signomial row ``p(x) - n(x) <= 1`` enters as the positive black box ``p / (1 + n) <= 1``.
"""
from .._model import ProblemBuilder, signomial_ratio
from .._registry import benchmark
from ._benchmark import BenchmarkDef, nominal_start
from ._constants import load_constants

REQUIRED = (
    "c1_x4",
    "c1_const",
    "c1_minus",
    "c2_x5",
    "c2_minus",
    "c3_const",
    "c3_minus",
    "c4",
    "c5",
    "c6",
)


@benchmark("floudas", description="heat exchanger design (signomial rows black-boxed)", order=1)
def build_floudas() -> BenchmarkDef:
    c = load_constants("floudas", REQUIRED)
    b = ProblemBuilder([f"x{i}" for i in range(1, 9)], name="floudas")
    x1, x2, x3, x4, x5, x6, x7, x8 = (b[f"x{i}"] for i in range(1, 9))

    b.minimize(x1 + x2 + x3)
    b.add_blackbox_le(
        signomial_ratio(
            c["c1_x4"] * x4 / (x1 * x6) + c["c1_const"] / x6,
            c["c1_minus"] / (x1 * x6),
            name="floudas_1",
        )
    )
    b.add_blackbox_le(
        signomial_ratio(
            c["c2_x5"] * x5 / (x2 * x7) + x4 / x7,
            c["c2_minus"] * x4 / (x2 * x7),
            name="floudas_2",
        )
    )
    b.add_blackbox_le(
        signomial_ratio(
            c["c3_const"] / (x3 * x8) + x5 / x8,
            c["c3_minus"] * x5 / (x3 * x8),
            name="floudas_3",
        )
    )
    b.add_le(c["c4"] * x4 + c["c4"] * x6)
    b.add_blackbox_le(signomial_ratio(c["c5"] * x5 + c["c5"] * x7, c["c5"] * x4, name="floudas_5"))
    b.add_blackbox_le(signomial_ratio(c["c6"] * x8, c["c6"] * x5, name="floudas_6"))
    problem = b.build()
    return BenchmarkDef(
        "floudas", problem, nominal_start(problem, "floudas"), c.path, "heat exchanger design"
    )
