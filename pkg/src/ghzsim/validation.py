"""Invariant suite shared by ``ghzsim validate`` and the test suite.

Each check returns a :class:`CheckResult` carrying the measured value and
the tolerance it was held to, so a failing run says by how much it failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import expm

from .dynamics import (
    IntegratorConfig,
    NoiseModel,
    apply_superoperator,
    evolve_master,
    evolve_unitary,
    liouvillian_expm,
    raman_analytic,
    trace_distance,
)
from .hamiltonian import (
    StepParams,
    effective_h0,
    effective_hI,
    step1_generator,
    step2_generator,
)
from .hilbert import (
    HilbertSpaceSpec,
    annihilation,
    basis_state,
    cavity_annihilation,
    lift,
    projector,
    qutrit_op,
    qutrit_transition,
    sz_operator,
)
from .params import SystemConfig
from .protocol import ProtocolSchedule, initial_state, run_protocol

ORACLE_TOL = 1e-6
TRACE_DRIFT_TOL = 1e-8
HERMITICITY_TOL = 1e-9
MIN_EIGENVALUE_TOL = -1e-9
RESONANT_TOL = 1e-6
SMALL_CUTOFFS = (1, 1, 1)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{mark} {self.name}: {self.value:.3e} (tolerance {self.tolerance:.1e}) {self.detail}".rstrip()


class FrozenHamiltonian:
    """Constant ``H`` posing as a generator.

    ``max_frequency`` sets the automatic step size; it defaults to the
    spectral radius of ``H`` but can be raised to match another generator.
    """

    def __init__(self, H: np.ndarray, max_frequency: float = 0.0):
        self.H = H
        radius = float(np.max(np.abs(np.linalg.eigvalsh(H)))) if H.size else 0.0
        self.max_frequency = max(radius, max_frequency)

    def __call__(self, t: float) -> np.ndarray:
        return self.H


# -- operator algebra ---------------------------------------------------------


# sqrt(n)**2 rounds to n within one ulp, so the commutator identity gets a
# few ulps of slack; every other identity must hold bit for bit
ALGEBRA_TOL = {"truncated_ccr": 1e-14}


def operator_algebra_defects(spec: HilbertSpaceSpec) -> dict[str, float]:
    """Largest entrywise defect of each algebraic identity."""
    defects = {}
    eye = np.eye(spec.dim)
    ops = [cavity_annihilation(j, spec) for j in (1, 2, 3)]

    # [a, a+] = 1 except on the truncation edge, where it is -N
    worst = 0.0
    for j, n_max in enumerate(spec.fock_cutoffs, start=1):
        a = annihilation(n_max)
        comm = a @ a.T - a.T @ a
        expected = np.diag([1.0] * n_max + [-float(n_max)])
        worst = max(worst, float(np.max(np.abs(comm - expected))))
    defects["truncated_ccr"] = worst

    # operators on different slots commute
    worst = 0.0
    qutrit_ops = [qutrit_op(qutrit_transition(lo, up), spec) for lo, up in (("g", "e"), ("e", "f"), ("g", "f"))]
    pool = [(j + 1, A) for j, A in enumerate(ops)] + [(0, Q) for Q in qutrit_ops]
    for i, (slot_a, A) in enumerate(pool):
        for slot_b, B in pool[i + 1 :]:
            if slot_a != slot_b:
                worst = max(worst, float(np.max(np.abs(A @ B - B @ A))))
                worst = max(worst, float(np.max(np.abs(A @ B.conj().T - B.conj().T @ A))))
    defects["slot_commutation"] = worst

    # lift agrees with an explicit Kronecker product
    worst = 0.0
    for slot in range(4):
        small = np.arange(spec.dims[slot] ** 2, dtype=float).reshape(spec.dims[slot], -1)
        factors = [np.eye(n) for n in spec.dims]
        factors[slot] = small
        explicit = factors[0]
        for f in factors[1:]:
            explicit = np.kron(explicit, f)
        worst = max(worst, float(np.max(np.abs(lift(small, slot, spec) - explicit))))
    defects["lift_kron"] = worst

    # basis projectors are idempotent, orthogonal and resolve the identity
    P_a = projector(basis_state("e", (0, 1, 0), spec))
    P_b = projector(basis_state("g", (1, 0, 0), spec))
    defects["projector_idempotent"] = float(max(np.max(np.abs(P_a @ P_a - P_a)), np.max(np.abs(P_b @ P_b - P_b))))
    defects["projector_orthogonal"] = float(np.max(np.abs(P_a @ P_b)))
    total = sum(projector(v) for v in eye)
    defects["projector_completeness"] = float(np.max(np.abs(total - eye)))

    # Sz squares to the projector onto its pair
    worst = 0.0
    for pair, levels in (("fe", (2, 1)), ("fg", (2, 0)), ("eg", (1, 0))):
        s = sz_operator(pair)
        expected = np.zeros((3, 3))
        for k in levels:
            expected[k, k] = 1.0
        worst = max(worst, float(np.max(np.abs(s @ s - expected))))
    defects["sz_square"] = worst
    return defects


def check_operator_algebra(spec: HilbertSpaceSpec) -> CheckResult:
    defects = operator_algebra_defects(spec)
    worst = max(defects.values())
    failing = [k for k, v in defects.items() if v > ALGEBRA_TOL.get(k, 0.0)]
    return CheckResult("operator algebra", not failing, worst, max(ALGEBRA_TOL.values()), " ".join(failing))


# -- trace and positivity -----------------------------------------------------


def check_trace_positivity(system: SystemConfig, b: float, gkl: float, integrator: IntegratorConfig) -> list[CheckResult]:
    """Full protocol with full noise at the smallest cutoffs; inspect the final state."""
    small = replace(system, fock_cutoffs=SMALL_CUTOFFS)
    p1, p2 = small.step_params(b, gkl)
    n1, n2 = small.noise_models()
    schedule = ProtocolSchedule.from_params(p1, p2, small.t_d, small.t_b)
    _, diag = run_protocol(p1, p2, n1, n2, schedule, small.spec, integrator=integrator, nbar=small.nbar)
    return [
        CheckResult("trace drift", diag.max_trace_drift < TRACE_DRIFT_TOL, diag.max_trace_drift, TRACE_DRIFT_TOL),
        CheckResult("hermiticity", diag.max_hermiticity < HERMITICITY_TOL, diag.max_hermiticity, HERMITICITY_TOL),
        CheckResult(
            "min eigenvalue",
            diag.min_eigenvalue >= MIN_EIGENVALUE_TOL,
            diag.min_eigenvalue,
            MIN_EIGENVALUE_TOL,
        ),
    ]


# -- oracle equivalence -------------------------------------------------------


def piecewise_oracle_distance(
    params: StepParams,
    noise: NoiseModel,
    duration: float,
    spec: HilbertSpaceSpec,
    slices: int,
    rho0: np.ndarray | None = None,
    integrator: IntegratorConfig | None = None,
) -> float:
    """Trace distance between RK4 and exact propagation of a sliced Hamiltonian.

    The step Hamiltonian is frozen at the midpoint of each of ``slices``
    equal intervals.  Both propagators see the same piecewise-constant
    generator, so any difference is integration error.  The RK4 side uses
    the step size a real run of the unfrozen generator would use.
    """
    if slices < 1:
        raise ValueError(f"slices must be >= 1, got {slices}")
    generator = (step1_generator if params.step == 1 else step2_generator)(params, spec)
    width = duration / slices
    cfg = integrator or IntegratorConfig()
    rho_rk = projector(initial_state(spec)) if rho0 is None else np.array(rho0, dtype=complex)
    rho_ex = rho_rk.copy()
    for k in range(slices):
        frozen = FrozenHamiltonian(generator((k + 0.5) * width), generator.max_frequency)
        rho_rk = evolve_master(rho_rk, frozen, noise, width, cfg, spec)
        rho_ex = apply_superoperator(liouvillian_expm(frozen.H, noise, width, spec), rho_ex)
    return trace_distance(rho_rk, rho_ex)


def check_oracle(system: SystemConfig, b: float, gkl: float, slices: int, integrator: IntegratorConfig) -> list[CheckResult]:
    small = replace(system, fock_cutoffs=SMALL_CUTOFFS)
    p1, p2 = small.step_params(b, gkl)
    n1, n2 = small.noise_models()
    schedule = ProtocolSchedule.from_params(p1, p2)
    out = []
    for name, p, noise, duration in (("step 1", p1, n1, schedule.t1), ("step 2", p2, n2, schedule.t2)):
        dist = piecewise_oracle_distance(p, noise, duration, small.spec, slices, integrator=integrator)
        out.append(CheckResult(f"oracle {name} ({slices} slices)", dist < ORACLE_TOL, dist, ORACLE_TOL))
    return out


# -- effective Raman dynamics -------------------------------------------------


def raman_subspace_amplitudes(p1: StepParams, t: float, spec: HilbertSpaceSpec) -> tuple[complex, complex]:
    """Exact ``exp(-i (H0 + HI) t)`` from ``|e,0,1,0>`` onto the two Raman branches."""
    H = effective_h0(p1, spec) + effective_hI(p1, spec)
    psi = expm(-1j * H * t) @ initial_state(spec)
    return (
        complex(psi[spec.index("e", (0, 1, 0))]),
        complex(psi[spec.index("g", (1, 0, 0))]),
    )


def check_raman_closed_form(system: SystemConfig, b: float) -> CheckResult:
    """The closed-form amplitudes solve the effective Hamiltonian exactly."""
    small = replace(system, fock_cutoffs=SMALL_CUTOFFS)
    p1, p2 = small.step_params(b)
    t1 = ProtocolSchedule.from_params(p1, p2).t1
    worst = 0.0
    for t in np.linspace(0.0, 2 * t1, 9):
        exact = raman_subspace_amplitudes(p1, t, small.spec)
        closed = raman_analytic(t, p1.couplings.g1, p1.delta, original_picture=True)
        worst = max(worst, max(abs(x - y) for x, y in zip(exact, closed)))
    return CheckResult("raman closed form", worst < 1e-10, worst, 1e-10)


def raman_population_error(system: SystemConfig, b: float, integrator: IntegratorConfig | None = None) -> float:
    """Largest branch-population gap between the ideal dispersive pair and the effective theory at ``t1``."""
    small = replace(system.without_noise().without_unwanted(), fock_cutoffs=SMALL_CUTOFFS)
    p1, p2 = small.step_params(b)
    spec = small.spec
    t1 = ProtocolSchedule.from_params(p1, p2).t1
    psi = evolve_unitary(initial_state(spec), step1_generator(p1, spec, ideal=True), t1, integrator or IntegratorConfig())
    analytic = raman_analytic(t1, p1.couplings.g1, p1.delta)
    measured = (psi[spec.index("e", (0, 1, 0))], psi[spec.index("g", (1, 0, 0))])
    return max(abs(abs(m) ** 2 - abs(a) ** 2) for m, a in zip(measured, analytic))


def check_raman_convergence(system: SystemConfig, b: float) -> CheckResult:
    err = raman_population_error(system, b)
    bound = 4.0 / (4.0 + b * b)
    return CheckResult(f"raman populations at b={b:g}", err < bound, err, bound)


def resonant_transfer_error(system: SystemConfig, integrator: IntegratorConfig | None = None) -> float:
    """Amplitude error of ``|e,0>_3 -> -i|g,1>_3`` with only the resonant coupling on."""
    small = replace(system.without_noise().without_unwanted(), fock_cutoffs=SMALL_CUTOFFS)
    _, p2 = small.step_params(8.0)
    spec = small.spec
    t2 = math.pi / (2 * p2.couplings.g_r)
    psi0 = basis_state("e", (0, 0, 0), spec)
    psi = evolve_unitary(psi0, step2_generator(p2, spec, ideal=True), t2, integrator or IntegratorConfig())
    expected = -1j * basis_state("g", (0, 0, 1), spec)
    return float(np.max(np.abs(psi - expected)))


def check_resonant_transfer(system: SystemConfig) -> CheckResult:
    err = resonant_transfer_error(system)
    return CheckResult("resonant transfer", err < RESONANT_TOL, err, RESONANT_TOL)


# -- suite --------------------------------------------------------------------


def run_invariant_suite(
    system: SystemConfig,
    b: float = 8.0,
    gkl: float = 0.0,
    slices: int = 16,
    integrator: IntegratorConfig | None = None,
) -> list[CheckResult]:
    """Every invariant check; cheap enough to run before each sweep."""
    integrator = integrator or IntegratorConfig()
    results = [check_operator_algebra(system.spec)]
    results += check_trace_positivity(system, b, gkl, integrator)
    results += check_oracle(system, b, gkl, slices, integrator)
    results.append(check_raman_closed_form(system, b))
    results += [check_raman_convergence(system, bb) for bb in (10.0, 15.0, 20.0)]
    results.append(check_resonant_transfer(system))
    return results
