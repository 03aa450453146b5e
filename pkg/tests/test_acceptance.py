"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict through the ``report`` fixture; the lines
are printed together in the "acceptance criteria" section of the pytest
summary.  Tolerances are pinned here and never loosened.
"""

import math

import pytest

from conftest import protocol_row
from ghzsim.hilbert import HilbertSpaceSpec
from ghzsim.params import SystemConfig
from ghzsim.protocol import ProtocolSchedule, f_leak_bound
from ghzsim.validation import (
    ALGEBRA_TOL,
    SMALL_CUTOFFS,
    operator_algebra_defects,
    piecewise_oracle_distance,
    raman_population_error,
    resonant_transfer_error,
)

pytestmark = pytest.mark.slow

ANCHOR_B = 8.0
ANCHOR_WINDOW = (0.970, 0.995)
INSENSITIVITY_B = (6.0, 8.0, 10.0, 12.0)
INSENSITIVITY_TOL = 0.01
ORDER_GKL = (0.0, 0.4, 0.6, 0.8, 1.0)
ORDER_TOL = 0.005
RAMAN_B = (10.0, 15.0, 20.0)
RESONANT_TOL = 1e-6
ORACLE_SLICES = 64
ORACLE_TOL = 1e-6
TRACE_DRIFT_TOL = 1e-8
HERMITICITY_TOL = 1e-9
MIN_EIGENVALUE_TOL = -1e-9
LEAK_FACTOR = 1.5
STEP_HALVING_TOL = 1e-6
CUTOFF_TOL = 1e-3


def _anchor_fidelity(row):
    """Better of the literal and phase-optimised fidelity, and which one it was."""
    if row.fidelity_phase_opt > row.fidelity:
        return row.fidelity_phase_opt, f"phase-optimised (phi = {row.phase:.4f})"
    return row.fidelity, "literal"


def _acceptance_rows():
    rows = [protocol_row(ANCHOR_B)]
    rows += [protocol_row(b, g) for b in INSENSITIVITY_B for g in (0.0, 0.4)]
    rows += [protocol_row(ANCHOR_B, g) for g in ORDER_GKL]
    rows.append(protocol_row(ANCHOR_B, variant="noise_free"))
    rows.append(protocol_row(ANCHOR_B, steps_per_period=100.0))
    rows.append(protocol_row(ANCHOR_B, cutoffs=(3, 3, 3)))
    return rows


def test_criterion_1_anchor_fidelity(report):
    row = protocol_row(ANCHOR_B)
    f, choice = _anchor_fidelity(row)
    lo, hi = ANCHOR_WINDOW
    passed = lo <= f <= hi
    report(1, passed, f"F(b=8, g_kl=0) = {f:.6f} [{choice}; literal {row.fidelity:.6f}], window [{lo}, {hi}]")
    assert passed


def test_criterion_2_crosstalk_insensitivity(report):
    gaps = {b: abs(protocol_row(b, 0.4).fidelity - protocol_row(b, 0.0).fidelity) for b in INSENSITIVITY_B}
    worst = max(gaps.values())
    passed = worst < INSENSITIVITY_TOL
    detail = ", ".join(f"b={b:g}: {g:.2e}" for b, g in gaps.items())
    # shown for diagnosis only: the phase-optimised gap isolates the crosstalk-induced relative phase
    worst_opt = max(
        abs(protocol_row(b, 0.4).fidelity_phase_opt - protocol_row(b, 0.0).fidelity_phase_opt) for b in INSENSITIVITY_B
    )
    report(
        2,
        passed,
        f"max |F(0.4 g_r) - F(0)| = {worst:.2e} < {INSENSITIVITY_TOL} ({detail}); phase-optimised max gap {worst_opt:.2e}",
    )
    assert passed


def test_criterion_3_curve_ordering(report):
    f = [protocol_row(ANCHOR_B, g).fidelity for g in ORDER_GKL]
    worst_rise = max(b - a for a, b in zip(f, f[1:]))
    passed = worst_rise <= ORDER_TOL
    values = ", ".join(f"{x:.5f}" for x in f)
    report(3, passed, f"F over g_kl {ORDER_GKL} = [{values}], largest rise {worst_rise:.2e} <= {ORDER_TOL}")
    assert passed


def test_criterion_4_effective_theory_convergence(report):
    system = SystemConfig()
    errors = [raman_population_error(system, b) for b in RAMAN_B]
    bounds = [f_leak_bound(b) for b in RAMAN_B]
    within = all(e < bound for e, bound in zip(errors, bounds))
    monotone = all(b < a for a, b in zip(errors, errors[1:]))
    passed = within and monotone
    detail = ", ".join(f"b={b:g}: {e:.4f} < {bound:.4f}" for b, e, bound in zip(RAMAN_B, errors, bounds))
    report(4, passed, f"population error vs effective theory ({detail}), decreasing: {monotone}")
    assert passed


def test_criterion_5_resonant_transfer(report):
    err = resonant_transfer_error(SystemConfig())
    passed = err < RESONANT_TOL
    report(5, passed, f"|e,0> -> -i|g,1> amplitude error {err:.2e} < {RESONANT_TOL:g}")
    assert passed


def test_criterion_6_oracle_equivalence(report):
    system = SystemConfig(fock_cutoffs=SMALL_CUTOFFS)
    p1, p2 = system.step_params(ANCHOR_B)
    n1, n2 = system.noise_models()
    schedule = ProtocolSchedule.from_params(p1, p2)
    d1 = piecewise_oracle_distance(p1, n1, schedule.t1, system.spec, ORACLE_SLICES)
    d2 = piecewise_oracle_distance(p2, n2, schedule.t2, system.spec, ORACLE_SLICES)
    passed = max(d1, d2) < ORACLE_TOL
    report(6, passed, f"dim {system.spec.dim}, {ORACLE_SLICES} slices: step 1 {d1:.2e}, step 2 {d2:.2e} < {ORACLE_TOL:g}")
    assert passed


def test_criterion_7_structural_invariants(report):
    rows = _acceptance_rows()
    drift = max(r.diagnostics["max_trace_drift"] for r in rows)
    herm = max(r.diagnostics["max_hermiticity"] for r in rows)
    min_eig = min(r.diagnostics["min_eigenvalue"] for r in rows)
    algebra_ok = True
    for cutoffs in (SMALL_CUTOFFS, (2, 2, 2), (3, 3, 3)):
        for name, value in operator_algebra_defects(HilbertSpaceSpec(cutoffs)).items():
            algebra_ok &= value <= ALGEBRA_TOL.get(name, 0.0)
    passed = drift < TRACE_DRIFT_TOL and herm < HERMITICITY_TOL and min_eig >= MIN_EIGENVALUE_TOL and algebra_ok
    report(
        7,
        passed,
        f"{len(rows)} runs: trace drift {drift:.1e}, hermiticity {herm:.1e}, min eigenvalue {min_eig:.1e}; "
        f"operator algebra {'exact' if algebra_ok else 'FAILED'}",
    )
    assert passed


def test_criterion_8_leakage_bound(report):
    row = protocol_row(ANCHOR_B, variant="noise_free")
    bound = LEAK_FACTOR * f_leak_bound(ANCHOR_B)
    passed = row.max_f_pop <= bound
    report(8, passed, f"peak |f> population {row.max_f_pop:.4f} <= {bound:.4f}")
    assert passed


def test_criterion_9_numerical_robustness(report):
    base = protocol_row(ANCHOR_B).fidelity
    d_step = abs(protocol_row(ANCHOR_B, steps_per_period=100.0).fidelity - base)
    d_cut = abs(protocol_row(ANCHOR_B, cutoffs=(3, 3, 3)).fidelity - base)
    passed = d_step < STEP_HALVING_TOL and d_cut < CUTOFF_TOL
    report(9, passed, f"step halving {d_step:.1e} < {STEP_HALVING_TOL:g}; cutoffs (3,3,3) {d_cut:.1e} < {CUTOFF_TOL:g}")
    assert passed


def test_leak_bound_matches_quoted_value():
    assert LEAK_FACTOR * f_leak_bound(ANCHOR_B) == pytest.approx(0.088, abs=5e-4)
    assert math.isclose(f_leak_bound(ANCHOR_B), 4 / 68)
