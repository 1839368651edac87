"""
UAV sizing over an outbound leg, a return leg and a sprint condition.

Variant 0 is a pure geometric program. Variants 1 and 3 replace the sprint
drag-fit row (respectively all three drag-fit rows) by the implicit drag
black box, which leaves the feasible set unchanged.
"""
import math
from typing import Dict, List

from .._exceptions import ModelError
from .._model import Monomial, ProblemBuilder
from .._registry import benchmark
from ._benchmark import BenchmarkDef, nominal_start
from ._constants import load_constants
from .drag import drag_constraint, drag_fit_posynomial

SEGMENTS = ("out", "ret", "sprint")
CRUISE = ("out", "ret")
VARIANTS = {0: (), 1: ("sprint",), 3: SEGMENTS}

GLOBAL_VARIABLES = (
    "S",
    "R",
    "A",
    "tau",
    "V_stall",
    "P_max",
    "W_eng",
    "W_pay",
    "W_tilde",
    "W_wing",
    "W_zfw",
    "W_MTO",
    "W_cap",
    "W_web",
    "I_cap",
    "M_r",
    "t_cap",
    "t_web",
    "nu",
    "p",
    "q",
)
SEGMENT_VARIABLES = ("V", "C_L", "C_D", "C_Dp", "T", "Re", "W", "eta_i", "eta_prop", "eta_0")
CRUISE_VARIABLES = ("W_fuel", "z_bre")

REQUIRED = (
    "N_lift",
    "sigma_max",
    "sigma_max_shear",
    "g",
    "w_bar",
    "r_h",
    "f_wadd",
    "W_fixed",
    "C_Lmax",
    "rho",
    "rho_sl",
    "rho_cap",
    "rho_web",
    "mu",
    "e",
    "A_prop",
    "eta_eng",
    "eta_v",
    "h_fuel",
    "payload_mass",
    "R_min",
    "V_stall_max",
    "V_sprint_min",
    "CDA0",
    "W_eng_coefficient",
    "W_eng_exponent",
    "p_min",
    "tau_max",
)

BREGUET_ORDER = 4


def variable_names() -> List[str]:
    names = list(GLOBAL_VARIABLES)
    names += [f"{v}_{s}" for s in SEGMENTS for v in SEGMENT_VARIABLES]
    names += [f"{v}_{s}" for s in CRUISE for v in CRUISE_VARIABLES]
    return names


def build_hoburg(variant: int) -> BenchmarkDef:
    """
    :param variant: Number of drag-fit rows replaced by black boxes (0, 1 or 3).
    """
    if variant not in VARIANTS:
        raise ModelError(f"Unknown Hoburg variant {variant}, expected one of {sorted(VARIANTS)}")
    black_boxed = VARIANTS[variant]
    bench_id = f"hoburg-{variant}"
    c = load_constants("hoburg", REQUIRED)
    b = ProblemBuilder(variable_names(), name=bench_id)
    x: Dict[str, Monomial] = {name: b[name] for name in b.names}

    S, A, tau, R = x["S"], x["A"], x["tau"], x["R"]
    rho, mu, g = c["rho"], c["mu"], c["g"]

    b.minimize(x["W_fuel_out"] + x["W_fuel_ret"])

    for s in SEGMENTS:
        V, C_L, C_D, C_Dp = x[f"V_{s}"], x[f"C_L_{s}"], x[f"C_D_{s}"], x[f"C_Dp_{s}"]
        T, Re, W = x[f"T_{s}"], x[f"Re_{s}"], x[f"W_{s}"]
        eta_i, eta_prop, eta_0 = x[f"eta_i_{s}"], x[f"eta_prop_{s}"], x[f"eta_0_{s}"]
        dynamic_pressure = 0.5 * rho * V**2

        # steady level flight
        b.add_eq(W, dynamic_pressure * C_L * S)
        b.add_le(dynamic_pressure * C_D * S, T)
        b.add_eq(Re, (rho / mu) * V * S**0.5 * A**-0.5)

        # drag model
        b.add_le(c["CDA0"] / S + C_Dp + C_L**2 / (math.pi * c["e"] * A), C_D)
        if s in black_boxed:
            indices = [b.names.index(f"C_L_{s}"), b.names.index("tau")]
            indices += [b.names.index(f"Re_{s}"), b.names.index(f"C_Dp_{s}")]
            b.add_blackbox_le(drag_constraint(b.n, indices, name=f"drag_{s}"))
        else:
            b.add_le(drag_fit_posynomial(C_L, tau, Re, C_Dp))

        # propulsive efficiency
        b.add_le(eta_0, c["eta_eng"] * eta_prop)
        b.add_le(eta_prop, c["eta_v"] * eta_i)
        b.add_le(eta_i + T * eta_i**2 / (4 * dynamic_pressure * c["A_prop"]))

    # landing
    b.add_le(x["W_MTO"], 0.5 * c["rho_sl"] * x["V_stall"] ** 2 * c["C_Lmax"] * S)
    b.add_le(x["V_stall"], c["V_stall_max"])

    # sprint
    b.add_le(x["T_sprint"] * x["V_sprint"] / x["eta_0_sprint"], x["P_max"])
    b.add_le(c["V_sprint_min"], x["V_sprint"])

    # range
    b.add_le(c["R_min"], R)
    for s in CRUISE:
        z = x[f"z_bre_{s}"]
        W = x[f"W_{s}"]
        b.add_le(g * R * x[f"T_{s}"] / (c["h_fuel"] * x[f"eta_0_{s}"] * W), z)
        series = z
        factorial = 1.0
        for k in range(2, BREGUET_ORDER + 1):
            factorial *= k
            series = series + z**k / factorial
        b.add_le(series, x[f"W_fuel_{s}"] / W)

    # weights
    b.add_le(c["payload_mass"] * g, x["W_pay"])
    b.add_le(c["W_fixed"] + x["W_pay"] + x["W_eng"], x["W_tilde"])
    b.add_le(x["W_tilde"] + x["W_wing"], x["W_zfw"])
    b.add_le(c["W_eng_coefficient"] * x["P_max"] ** c["W_eng_exponent"], x["W_eng"])
    b.add_le(x["W_web"] + x["W_cap"], x["W_wing"] / c["f_wadd"])
    b.add_le(x["W_zfw"] + x["W_fuel_ret"], x["W_out"])
    b.add_le(x["W_zfw"], x["W_ret"])
    b.add_le(x["W_out"] + x["W_fuel_out"], x["W_MTO"])
    b.add_eq(x["W_sprint"], x["W_out"])

    # wing structure
    w_bar, N_lift = c["w_bar"], c["N_lift"]
    p, q, nu = x["p"], x["q"], x["nu"]
    t_cap, t_web, I_cap, M_r = x["t_cap"], x["t_web"], x["I_cap"], x["M_r"]
    b.add_le(1 + p, 2 * q)
    b.add_le(c["p_min"], p)
    b.add_le(tau, c["tau_max"])
    b.add_le(x["W_tilde"] * A * p / 24, M_r)
    b.add_le(0.92 * w_bar * tau * t_cap**2 + I_cap, (0.92**2 / 2) * w_bar * tau**2 * t_cap)
    b.add_le(N_lift * M_r * A * q**2 * tau / (S * I_cap * c["sigma_max"]), 8)
    b.add_le(A * x["W_tilde"] * N_lift * q**2 / (tau * S * t_web * c["sigma_max_shear"]), 12)
    b.add_le(0.86 * p**-2.38 + 0.14 * p**0.56, nu**3.94)
    spar = 8 * g * S**1.5 * nu / (3 * A**0.5)
    b.add_le(c["rho_cap"] * w_bar * t_cap * spar, x["W_cap"])
    b.add_le(c["rho_web"] * c["r_h"] * tau * t_web * spar, x["W_web"])

    problem = b.build()
    return BenchmarkDef(
        bench_id,
        problem,
        nominal_start(problem, "hoburg"),
        c.path,
        f"UAV sizing, {len(black_boxed)} drag-fit rows black-boxed",
    )


@benchmark("hoburg-0", description="UAV sizing, pure GP", order=3)
def build_hoburg_0() -> BenchmarkDef:
    return build_hoburg(0)


@benchmark("hoburg-1", description="UAV sizing, sprint drag fit black-boxed", order=4)
def build_hoburg_1() -> BenchmarkDef:
    return build_hoburg(1)


@benchmark("hoburg-3", description="UAV sizing, all drag fits black-boxed", order=5)
def build_hoburg_3() -> BenchmarkDef:
    return build_hoburg(3)
