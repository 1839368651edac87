"""
Low-fidelity aircraft sizing with a fuel-volume budget.

One row is not posynomial: the fuel volume budget, a monomial bounded by a
posynomial, enters as a black box with an analytic gradient. The wing structural
weight is a square root of a posynomial and is kept as a posynomial row by squaring.
"""
import math

import numpy as np

from .._model import BlackBoxFn, ProblemBuilder
from .._registry import benchmark
from ._benchmark import BenchmarkDef, nominal_start
from ._constants import load_constants

VARIABLES = (
    "W_f",
    "t",
    "D",
    "V",
    "S",
    "C_D",
    "C_L",
    "A",
    "C_f",
    "Re",
    "W",
    "W_w",
    "W_w_surf",
    "W_w_strc",
    "V_f",
    "V_f_avail",
    "V_f_wing",
    "V_f_fuse",
    "A_CD0",
)

REQUIRED = (
    "g",
    "rho",
    "mu",
    "rho_f",
    "c_T",
    "R",
    "W_0",
    "V_min",
    "C_Lmax",
    "e",
    "k",
    "S_wet_ratio",
    "skin_friction_coefficient",
    "skin_friction_exponent",
    "N_ult",
    "tau",
    "C_Ww1",
    "C_Ww2",
    "wing_volume_coefficient",
    "fuse_volume_length",
)


def _fuel_volume_budget(b: ProblemBuilder) -> BlackBoxFn:
    """
    ``V_f_avail / (V_f_wing + V_f_fuse) <= 1``.
    """
    n = b.n
    avail, wing, fuse = (b.names.index(k) for k in ("V_f_avail", "V_f_wing", "V_f_fuse"))

    def value(x):
        return x[avail] / (x[wing] + x[fuse])

    def gradient(x):
        total = x[wing] + x[fuse]
        grad = np.zeros(n)
        grad[avail] = 1.0 / total
        grad[wing] = grad[fuse] = -x[avail] / total**2
        return grad

    return BlackBoxFn(value, n, gradient, "fuel_volume_budget")


@benchmark("kirschen-ozturk", description="aircraft sizing with fuel volume budget", order=2)
def build_kirschen_ozturk() -> BenchmarkDef:
    c = load_constants("kirschen_ozturk", REQUIRED)
    b = ProblemBuilder(VARIABLES, name="kirschen-ozturk")
    v = {name: b[name] for name in VARIABLES}
    W_f, t, D, V, S = v["W_f"], v["t"], v["D"], v["V"], v["S"]
    C_D, C_L, A, C_f, Re = v["C_D"], v["C_L"], v["A"], v["C_f"], v["Re"]
    W, W_w, W_w_surf, W_w_strc = v["W"], v["W_w"], v["W_w_surf"], v["W_w_strc"]
    V_f, V_f_avail, V_f_wing, V_f_fuse, A_CD0 = (
        v["V_f"],
        v["V_f_avail"],
        v["V_f_wing"],
        v["V_f_fuse"],
        v["A_CD0"],
    )
    rho, mu, g, rho_f = c["rho"], c["mu"], c["g"], c["rho_f"]

    b.minimize(W_f)
    b.add_le(c["c_T"] * t * D, W_f)
    b.add_le(c["R"] / V, t)
    b.add_le(0.5 * rho * V**2 * S * C_D, D)
    b.add_le(
        A_CD0 / S
        + c["k"] * c["S_wet_ratio"] * C_f
        + C_L**2 / (math.pi * c["e"] * A),
        C_D,
    )
    b.add_le(c["skin_friction_coefficient"] * Re ** -c["skin_friction_exponent"], C_f)
    b.add_le(Re, (rho / mu) * V * S**0.5 * A**-0.5)
    b.add_le(c["W_0"] + W_w + 0.5 * W_f, 0.5 * rho * V**2 * S * C_L)
    b.add_le(W, 0.5 * rho * c["V_min"] ** 2 * S * c["C_Lmax"])
    b.add_le(c["W_0"] + W_w + W_f, W)
    b.add_le(W_w_surf + W_w_strc, W_w)
    b.add_le(c["C_Ww1"] * S, W_w_surf)
    # wing structural weight, squared so that the square root drops out
    b.add_le(
        (c["W_0"] + g * rho_f * V_f_fuse) * ((c["C_Ww2"] * c["N_ult"] / c["tau"]) ** 2 * A**3 * W * S),
        W_w_strc**2,
    )
    b.add_le(V_f, V_f_avail)
    b.add_eq(V_f, W_f / (g * rho_f))
    b.add_blackbox_le(_fuel_volume_budget(b))
    b.add_le(V_f_wing**2, c["wing_volume_coefficient"] * c["tau"] ** 2 * S**3 / A)
    b.add_le(V_f_fuse, c["fuse_volume_length"] * A_CD0)
    problem = b.build()
    return BenchmarkDef(
        "kirschen-ozturk",
        problem,
        nominal_start(problem, "kirschen_ozturk"),
        c.path,
        "aircraft sizing with fuel volume budget",
    )
