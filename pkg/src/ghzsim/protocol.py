"""Two-step preparation of the three-cavity GHZ photon state.

Step 1 (duration ``t1 = delta*pi / (4 g^2)``) splits the cavity-2 photon into
an equal superposition of ``|e,0,1,0>`` and ``|g,1,0,0>``.  Step 2 (duration
``t2 = pi / (2 g_r)``) maps ``|e>|0>_3`` to ``-i|g>|1>_3``, leaving

    -i/sqrt(2) (|0,1,1> - |1,0,0>) |g>.

Level-tuning dead times are simulated as free decay (``H = 0``).  The
segment order is ``t_d, step 1, t_d, t_b, step 2, t_d``.  Dead time before
step 2 uses the step-1 noise model, except the barrier segment, which uses
the step-2 model.  The final ``t_d`` also uses the step-2 model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    IntegratorConfig,
    NoiseModel,
    master_trajectory,
    raman_analytic,
    state_checks,
)
from .errors import ParameterError, ShapeError
from .hamiltonian import RotatingHamiltonian, StepParams, step1_generator, step2_generator
from .hilbert import HilbertSpaceSpec, basis_state, projector, qutrit_populations

F_SAMPLES = 128
# "much less/greater than" in the feasibility flags means a factor of 10
MARGIN = 10.0


@dataclass(frozen=True)
class ProtocolSchedule:
    t1: float
    t2: float
    t_d: float = 0.0
    t_b: float = 0.0

    def __post_init__(self):
        if not (self.t1 > 0 and self.t2 > 0):
            raise ParameterError("step durations must be positive")
        if self.t_d < 0 or self.t_b < 0:
            raise ParameterError(f"dead times must be >= 0, got t_d={self.t_d}, t_b={self.t_b}")

    @property
    def tau(self) -> float:
        return self.t1 + self.t2 + 3 * self.t_d + self.t_b

    @classmethod
    def from_params(cls, p1: StepParams, p2: StepParams, t_d: float = 0.0, t_b: float = 0.0):
        g = p1.couplings.g1
        if g <= 0 or p2.couplings.g_r <= 0:
            raise ParameterError("protocol needs g > 0 and g_r > 0")
        if not math.isclose(p1.couplings.g1, p1.couplings.g2, rel_tol=1e-12):
            raise ParameterError("protocol runs require g1 == g2")
        t1 = p1.delta * math.pi / (4 * g * g)
        t2 = math.pi / (2 * p2.couplings.g_r)
        return cls(t1, t2, t_d, t_b)


def initial_state(spec: HilbertSpaceSpec) -> np.ndarray:
    """``|e>|0>_1|1>_2|0>_3``."""
    return basis_state("e", (0, 1, 0), spec)


def ghz_target(spec: HilbertSpaceSpec) -> np.ndarray:
    """Ideal final state ``-i/sqrt(2) (|g,0,1,1> - |g,1,0,0>)``."""
    return (-1j / math.sqrt(2)) * (
        basis_state("g", (0, 1, 1), spec) - basis_state("g", (1, 0, 0), spec)
    )


def fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """``<target| rho |target>`` clamped to [0, 1]."""
    target = np.asarray(target, dtype=complex)
    if rho.shape != (target.size, target.size):
        raise ShapeError(f"rho {rho.shape} does not match target of size {target.size}")
    value = float(np.real(np.vdot(target, rho @ target)))
    return min(1.0, max(0.0, value))


def phase_optimized_ghz_fidelity(rho: np.ndarray, spec: HilbertSpaceSpec) -> tuple[float, float]:
    """Best overlap with ``(|0,1,1> + e^{i phi}|1,0,0>)|g>/sqrt(2)`` over ``phi``.

    Closed form: ``(rho_aa + rho_bb)/2 + |rho_ab|`` at ``phi = -arg(rho_ab)``,
    with the angle reported in ``(-pi, pi]``.  A vanishing coherence
    returns ``phi = 0``.
    """
    a = spec.index("g", (0, 1, 1))
    b = spec.index("g", (1, 0, 0))
    coherence = complex(rho[a, b])
    f_max = 0.5 * float(np.real(rho[a, a] + rho[b, b])) + abs(coherence)
    if abs(coherence) < 1e-15:
        phi = 0.0
    else:
        phi = -math.atan2(coherence.imag, coherence.real)
        if phi <= -math.pi:
            phi += 2 * math.pi
    return min(1.0, max(0.0, f_max)), phi


def f_leak_bound(b: float) -> float:
    """Approximate |f> occupation during step 1, ``4 / (4 + b^2)``."""
    if not b > 0:
        raise ParameterError(f"b must be positive, got {b}")
    return 4.0 / (4.0 + b * b)


def cavity_lifetimes(Q, omega_c, nbar):
    """Per-cavity lifetimes ``(Q/omega)/nbar`` and the combined ``min/3``."""
    values = [np.asarray(x, dtype=float) for x in (Q, omega_c, nbar)]
    if any(v.shape != (3,) for v in values):
        raise ParameterError("cavity_lifetimes needs three values per argument")
    if any(np.any(~(v > 0)) for v in values):
        raise ParameterError("cavity_lifetimes needs positive inputs")
    Q, omega_c, nbar = values
    each = tuple(float(x) for x in (Q / omega_c) / nbar)
    return each, min(each) / 3.0


def crosstalk_estimate(C_k: float, C_l: float, C_sigma: float, g_r: float) -> float:
    """Capacitive crosstalk ``g_r (C_k + C_l) / C_sigma``."""
    if not (C_k > 0 and C_l > 0 and C_sigma > 0 and g_r > 0):
        raise ParameterError("crosstalk_estimate needs positive capacitances and g_r")
    if C_k + C_l >= C_sigma:
        raise ParameterError("C_k + C_l must be smaller than the total capacitance C_sigma")
    return g_r * (C_k + C_l) / C_sigma


@dataclass
class Diagnostics:
    p_leak: float
    T_cav: float
    tau: float
    max_f_population: float
    condition_flags: dict[str, bool] = field(default_factory=dict)
    t1: float = 0.0
    t2: float = 0.0
    steps: dict[str, int] = field(default_factory=dict)
    max_trace_drift: float = 0.0
    max_hermiticity: float = 0.0
    min_eigenvalue: float = 0.0
    f_population_trace: list[float] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "f_population_trace"}
        out["condition_flags"] = dict(self.condition_flags)
        out["steps"] = dict(self.steps)
        return out


def _zero_hamiltonian(dim: int) -> RotatingHamiltonian:
    return RotatingHamiltonian([], [], [], dim)


def run_protocol(
    params_step1: StepParams,
    params_step2: StepParams,
    noise1: NoiseModel,
    noise2: NoiseModel,
    schedule: ProtocolSchedule,
    spec: HilbertSpaceSpec,
    integrator: IntegratorConfig | None = None,
    ideal: bool = False,
    nbar=(1.0, 1.0, 1.0),
) -> tuple[np.ndarray, Diagnostics]:
    """Run both steps from ``|e,0,1,0>`` and return ``(rho_final, diagnostics)``.

    ``ideal=True`` drops unwanted couplings and crosstalk from both
    Hamiltonians, independently of the values stored in the parameters.
    """
    cfg = integrator or IntegratorConfig()
    H1 = step1_generator(params_step1, spec, ideal=ideal)
    H2 = step2_generator(params_step2, spec, ideal=ideal)
    idle = _zero_hamiltonian(spec.dim)

    segments = [
        ("dead_1", idle, noise1, schedule.t_d, 0),
        ("step_1", H1, noise1, schedule.t1, F_SAMPLES),
        ("dead_2", idle, noise1, schedule.t_d, 0),
        ("barrier", idle, noise2, schedule.t_b, 0),
        ("step_2", H2, noise2, schedule.t2, 0),
        ("dead_3", idle, noise2, schedule.t_d, 0),
    ]
    rho = projector(initial_state(spec))
    steps, drift, herm = {}, 0.0, 0.0
    f_trace: list[float] = []
    for name, H, noise, duration, n_samples in segments:
        if duration == 0:
            continue
        traj = master_trajectory(rho, H, noise, duration, cfg, spec, n_samples=n_samples)
        rho = traj.rho
        steps[name] = traj.steps
        drift = max(drift, traj.max_trace_drift)
        herm = max(herm, traj.max_hermiticity)
        if n_samples:
            f_trace = [float(qutrit_populations(s, spec)[2]) for s in traj.states]

    checks = state_checks(rho)
    b = params_step1.delta / params_step1.couplings.g1
    _, T_cav = cavity_lifetimes(params_step1.cavities.Q, params_step1.cavities.omega_c, nbar)
    diag = Diagnostics(
        p_leak=f_leak_bound(b),
        T_cav=T_cav,
        tau=schedule.tau,
        max_f_population=max(f_trace, default=0.0),
        condition_flags=_condition_flags(params_step1, params_step2, noise1, noise2, schedule, T_cav),
        t1=schedule.t1,
        t2=schedule.t2,
        steps=steps,
        max_trace_drift=max(drift, checks["trace_drift"]),
        max_hermiticity=herm,
        min_eigenvalue=checks["min_eigenvalue"],
        f_population_trace=f_trace,
    )
    return rho, diag


def _condition_flags(p1, p2, noise1, noise2, schedule, T_cav) -> dict[str, bool]:
    rates_e = [n.relax("eg") for n in (noise1, noise2)]
    rates_phi = [n.dephase("eg") for n in (noise1, noise2)]
    T1 = 1 / max(rates_e) if max(rates_e) > 0 else math.inf
    T2 = 1 / max(rates_phi) if max(rates_phi) > 0 else math.inf
    crosstalk_ok = True
    for p in (p1, p2):
        for (k, l), g_kl in p.couplings.cross.items():
            if g_kl > 0 and abs(p.cross_detuning(k, l)) < MARGIN * g_kl:
                crosstalk_ok = False
    return {
        "tau_much_less_than_T1_T2": schedule.tau * MARGIN <= min(T1, T2),
        "tau_much_less_than_T_cav": schedule.tau * MARGIN <= T_cav,
        "cavity_detuning_much_greater_than_crosstalk": crosstalk_ok,
    }


def analytic_midpoint(p1: StepParams, schedule: ProtocolSchedule):
    """Effective-theory amplitudes of ``|e,0,1,0>`` and ``|g,1,0,0>`` after step 1."""
    return raman_analytic(schedule.t1, p1.couplings.g1, p1.delta)
