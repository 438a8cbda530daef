"""Built-in oracle suite behind the ``selfcheck`` subcommand.

Every item recomputes a value with a hand-derivable answer: closed-form
resolvents, special-function identities, quadratures, and the small
Carleson enumerations.  A fresh build passes all of them; forcing the
tolerance down (``--tol 1e-15``) flips the quadrature-backed items to
failures, which is the intended negative control of the test harness.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.special import erfcx

from .admissibility import (
    empirical_admissibility,
    frame_input,
    g_function,
    necessary_condition_sup,
)
from .carleson import DiscreteMeasure, geometric_carleson_constant
from .controllability import (
    b_infinity_exponential,
    blaschke_weight,
    exact_controllability_measure,
    mcphail_verdict,
    null_controllability_measure,
)
from .heat_examples import HeatSystemSpec, carleson_scaling_experiment, dirichlet_threshold
from .kernels import PowerKernel
from .laplace import invert_laplace
from .mittag import mittag_leffler
from .resolvent import c_exponential, c_power
from .reports import VERDICT_FAIL, VERDICT_PASS, AnalysisReport
from .signals import ExponentialSignal
from .systems import DiagonalSystem

__all__ = ["ORACLE_ITEMS", "OracleItem", "run_selfcheck"]


@dataclass(frozen=True)
class OracleItem:
    """One recomputable fact: ``run`` returns (value, expected)."""

    name: str
    tol: float
    run: Callable[[], tuple[float, float]]


def _single_mode() -> DiagonalSystem:
    return DiagonalSystem((-1.0 + 0.0j,), (1.0 + 0.0j,))


def _resolvent_exponential() -> tuple[float, float]:
    value = c_exponential(-1.0, 1.0, 1.0, 1.0)
    return abs(value - (0.5 + 0.5 * math.exp(-2.0))), 0.0


def _resolvent_power_half() -> tuple[float, float]:
    value = c_power(-2.0, 0.5, 1.0)
    return abs(value - erfcx(2.0)), 0.0


def _mittag_exponential() -> tuple[float, float]:
    z = 0.7 + 0.3j
    return abs(complex(mittag_leffler(1.0, z)) - cmath.exp(z)), 0.0


def _mittag_half() -> tuple[float, float]:
    value = complex(mittag_leffler(0.5, -1.0))
    return value.real, math.exp(1.0) * math.erfc(1.0)


def _power_kernel_gamma() -> tuple[float, float]:
    kernel = PowerKernel(1.5, math.gamma(1.5))
    return float(np.real(kernel.laplace(1.0 + 0.0j))), math.gamma(1.5)


def _laplace_inversion() -> tuple[float, float]:
    result = invert_laplace(lambda z: 1.0 / (z + 1.0), 1.0)
    return abs(result.value - math.exp(-1.0)), 0.0


def _frame_norm() -> tuple[float, float]:
    norm_sq, _ = quad(lambda t: abs(frame_input(1.0 + 0.0j, t)) ** 2, 0.0, 60.0)
    return norm_sq, 1.0


def _g_memoryless() -> tuple[float, float]:
    return abs(g_function(1.0 + 0.0j, 1.0 + 0.0j, PowerKernel(1.0)) - 0.5), 0.0


def _necessary_single_mode() -> tuple[float, float]:
    report = necessary_condition_sup(_single_mode(), PowerKernel(1.0))
    return float(report.constants["sup"]), 0.25


def _carleson_single_atom() -> tuple[float, float]:
    measure = DiscreteMeasure(((1.0 + 0.0j, 1.0),))
    return geometric_carleson_constant(measure, 1.0, 10.0)[0], 1.0


def _carleson_dyadic() -> tuple[float, float]:
    atoms = tuple((complex(2.0**-j), 1.0) for j in range(4))
    constant, _ = geometric_carleson_constant(DiscreteMeasure(atoms), 1.0, 10.0)
    return constant, 8.0


def _blaschke_pair() -> tuple[float, float]:
    weight = blaschke_weight(0, DiagonalSystem((-1.0, -2.0), (1.0, 1.0)), 1.0, 0.0)
    return weight.value, 1.0 / 3.0


def _exact_constant() -> tuple[float, float]:
    cm = exact_controllability_measure(_single_mode(), 1.0, 0.0)
    return float(mcphail_verdict(cm).constants["constant"]), 1.0


def _null_damping() -> tuple[float, float]:
    exact = exact_controllability_measure(_single_mode(), 1.0, 0.0)
    null = null_controllability_measure(_single_mode(), 1.0, 0.0, 1.0)
    ratio = null.measure.masses[0] / exact.measure.masses[0]
    return ratio, math.exp(-2.0)


def _steady_output() -> tuple[float, float]:
    coeffs = b_infinity_exponential(
        _single_mode(), 1.0, 1.0, lambda z: 1.0 / (z + 1.0)
    )
    return abs(coeffs[0] - 2.0 / 3.0), 0.0


def _heat_threshold() -> tuple[float, float]:
    return dirichlet_threshold(1.0 / 3.0), 0.25


def _empirical_single_mode() -> tuple[float, float]:
    report = empirical_admissibility(
        _single_mode(),
        PowerKernel(1.0),
        inputs=[ExponentialSignal(1.0)],
        horizon=10.0,
    )
    return float(report.constants["empirical_M"]), math.sqrt(2.0) / math.e


def _heat_critical_slope() -> tuple[float, float]:
    spec = HeatSystemSpec("dirichlet_rod", 1.0 / 3.0, 0.25, 400)
    report = carleson_scaling_experiment(spec, np.geomspace(1e2, 1e6, 25))
    return float(report.constants["measured_slope"]), 0.0


ORACLE_ITEMS: tuple[OracleItem, ...] = (
    OracleItem("resolvent_exponential_midpoint", 1e-12, _resolvent_exponential),
    OracleItem("resolvent_power_half_order", 1e-10, _resolvent_power_half),
    OracleItem("mittag_exponential_identity", 1e-10, _mittag_exponential),
    OracleItem("mittag_half_at_minus_one", 1e-5, _mittag_half),
    OracleItem("power_kernel_gamma_amplitude", 1e-7, _power_kernel_gamma),
    OracleItem("laplace_inversion_exponential", 1e-8, _laplace_inversion),
    OracleItem("frame_unit_norm", 1e-8, _frame_norm),
    OracleItem("g_function_memoryless", 1e-12, _g_memoryless),
    OracleItem("necessary_sup_single_mode", 1e-3, _necessary_single_mode),
    OracleItem("carleson_single_atom", 1e-12, _carleson_single_atom),
    OracleItem("carleson_dyadic_ladder", 1e-12, _carleson_dyadic),
    OracleItem("blaschke_two_modes", 1e-12, _blaschke_pair),
    OracleItem("exact_controllability_constant", 1e-12, _exact_constant),
    OracleItem("null_damping_factor", 1e-12, _null_damping),
    OracleItem("steady_output_consistency", 1e-9, _steady_output),
    OracleItem("heat_threshold_one_third", 1e-12, _heat_threshold),
    OracleItem("empirical_admissibility_single_mode", 1e-3, _empirical_single_mode),
    OracleItem("heat_critical_scaling_slope", 5e-2, _heat_critical_slope),
)


def run_selfcheck(tol: float | None = None) -> AnalysisReport:
    """Run every oracle item; ``tol`` overrides each item's tolerance."""
    if tol is not None and not tol > 0.0:
        raise ValueError("tolerance override must be positive")
    rows = []
    failures = 0
    for item in ORACLE_ITEMS:
        used_tol = item.tol if tol is None else tol
        try:
            value, expected = item.run()
            error = abs(value - expected)
            passed = error <= used_tol
            note = None
        except Exception as exc:  # a crashed oracle is a failed oracle
            value = expected = error = float("nan")
            passed = False
            note = f"{type(exc).__name__}: {exc}"
        failures += not passed
        row = {
            "name": item.name,
            "passed": bool(passed),
            "value": value,
            "expected": expected,
            "error": error,
            "tol": used_tol,
        }
        if note:
            row["note"] = note
        rows.append(row)
    return AnalysisReport(
        task="selfcheck",
        verdict=VERDICT_PASS if failures == 0 else VERDICT_FAIL,
        constants={
            "items": len(ORACLE_ITEMS),
            "failures": failures,
            "tol_override": tol,
        },
        notes=[] if failures == 0 else [f"{failures} oracle item(s) failed"],
        tables={"items": rows},
    )
