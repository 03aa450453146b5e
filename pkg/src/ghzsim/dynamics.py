"""State propagation: Lindblad master equation, Schrödinger equation, oracles.

Both propagators use a fixed-step classical RK4 scheme with the Hamiltonian
evaluated at the stage times ``t``, ``t + dt/2`` and ``t + dt``.  The step
count is chosen so that ``duration`` is covered exactly.

Dissipator convention (per step, rates in 1/s)::

    sum_j kappa_j D[a_j] + sum_xy (gamma_xy D[S-_xy] + gamma_phi_xy D[Sz_xy])

with ``D[L] rho = L rho L^+ - {L^+ L, rho}/2``.  The pure-dephasing rate
multiplies ``D[Sz]`` with no extra factor of 1/2.  On the two levels of the
pair this equals ``Sz rho Sz - rho``; unlike that bare form it leaves the
third level alone and so preserves the trace, since ``Sz^2`` is a projector
rather than the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy import sparse
from scipy.linalg import expm

from .errors import OracleRefusedError, ParameterError, ShapeError, SingularDetuningError, StepSizeError
from .hilbert import HilbertSpaceSpec, cavity_annihilation, lift, qutrit_transition, sz_operator

PAIRS = ("fe", "fg", "eg")
# lowering operator |l><k| of each decay path k -> l
_DECAY_PATHS = {"fe": ("e", "f"), "fg": ("g", "f"), "eg": ("g", "e")}

TRACE_TOL = 1e-6
NORM_TOL = 1e-6
ORACLE_MAX_SUPERDIM = 4096

HamiltonianFn = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class NoiseModel:
    """Decay and dephasing rates active during one protocol step."""

    kappa: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gamma_relax: Mapping[str, float] = field(default_factory=dict)
    gamma_phi: Mapping[str, float] = field(default_factory=dict)
    step: int = 1

    def __post_init__(self):
        kappa = tuple(float(k) for k in self.kappa)
        if len(kappa) != 3:
            raise ParameterError("need three cavity decay rates")
        object.__setattr__(self, "kappa", kappa)
        for name, rates in (("gamma_relax", self.gamma_relax), ("gamma_phi", self.gamma_phi)):
            unknown = set(rates) - set(PAIRS)
            if unknown:
                raise ParameterError(f"{name} has unknown decay paths {sorted(unknown)}")
        values = [*kappa, *self.gamma_relax.values(), *self.gamma_phi.values()]
        if any(not (v >= 0 and math.isfinite(v)) for v in values):
            raise ParameterError("noise rates must be finite and >= 0")
        if self.step not in (1, 2):
            raise ParameterError(f"step must be 1 or 2, got {self.step}")

    def relax(self, pair: str) -> float:
        return float(self.gamma_relax.get(pair, 0.0))

    def dephase(self, pair: str) -> float:
        return float(self.gamma_phi.get(pair, 0.0))

    @property
    def total_rate(self) -> float:
        return sum(self.kappa) + sum(map(self.relax, PAIRS)) + sum(map(self.dephase, PAIRS))

    def is_zero(self) -> bool:
        return self.total_rate == 0.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed-step RK4 settings.

    With ``dt=None`` the step is ``2*pi / (steps_per_period * w_max)`` where
    ``w_max`` is ``max_frequency_hint`` or, failing that, the generator's own
    ``max_frequency``.  The step is then shrunk so that an integer number
    of steps spans the requested duration.
    """

    dt: float | None = None
    steps_per_period: float = 50.0
    max_frequency_hint: float | None = None

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not self.steps_per_period > 0:
            raise ParameterError("steps_per_period must be positive")

    def step_count(self, duration: float, max_frequency: float = 0.0) -> tuple[int, float]:
        """Number of steps and the resulting step size for ``duration``."""
        if duration <= 0:
            return 0, 0.0
        if self.dt is not None:
            dt_max = self.dt
        else:
            w = self.max_frequency_hint if self.max_frequency_hint is not None else max_frequency
            if w <= 0:
                return 1, duration
            dt_max = 2 * math.pi / (self.steps_per_period * w)
        n = max(1, math.ceil(duration / dt_max * (1 - 1e-12)))
        return n, duration / n


def _frequency_of(H_of_t) -> float:
    return float(getattr(H_of_t, "max_frequency", 0.0))


def _lowering(pair: str) -> np.ndarray:
    lower, upper = _DECAY_PATHS[pair]
    return qutrit_transition(lower, upper).conj().T


def _recycling_superoperator(jumps, d: int) -> sparse.csr_matrix:
    """Sparse map ``vec(rho) -> vec(sum_k J_k rho J_k^+)`` on row-major vectors."""
    total = sparse.csr_matrix((d * d, d * d), dtype=complex)
    for J in jumps:
        Js = sparse.csr_matrix(J)
        total = total + sparse.kron(Js, Js.conj(), format="csr")
    return total


class MasterEquation:
    """Right-hand side of the master equation with precomputed dissipators."""

    def __init__(self, H_of_t: HamiltonianFn, noise: NoiseModel, spec: HilbertSpaceSpec):
        self.H_of_t = H_of_t
        self.noise = noise
        self.spec = spec
        d = spec.dim

        jumps = []
        for j, kappa in enumerate(noise.kappa, start=1):
            if kappa > 0:
                jumps.append(math.sqrt(kappa) * cavity_annihilation(j, spec))
        for pair in PAIRS:
            gamma = noise.relax(pair)
            if gamma > 0:
                jumps.append(math.sqrt(gamma) * lift(_lowering(pair), 0, spec))
        self._damping = 0.5 * sum((J.conj().T @ J for J in jumps), np.zeros((d, d), dtype=complex))
        self._recycling = _recycling_superoperator(jumps, d) if jumps else None

        # Sz are diagonal, so D[Sz] is an elementwise product
        dephasing = np.zeros((d, d))
        for pair in PAIRS:
            gamma = noise.dephase(pair)
            if gamma > 0:
                s = np.real(np.diagonal(lift(sz_operator(pair), 0, spec)))
                sq = s * s
                dephasing += gamma * (np.outer(s, s) - 0.5 * (sq[:, None] + sq[None, :]))
        self._dephasing = dephasing if np.any(dephasing) else None

    @property
    def max_rate(self) -> float:
        return max(_frequency_of(self.H_of_t), self.noise.total_rate)

    def __call__(self, t: float, rho: np.ndarray, H: np.ndarray | None = None) -> np.ndarray:
        if H is None:
            H = self.H_of_t(t)
        H_eff = H - 1j * self._damping
        out = -1j * (H_eff @ rho - rho @ H_eff.conj().T)
        if self._recycling is not None:
            out += (self._recycling @ rho.reshape(-1)).reshape(rho.shape)
        if self._dephasing is not None:
            out += self._dephasing * rho
        return out


def _check_square(mat: np.ndarray, dim: int, what: str):
    if mat.shape != (dim, dim):
        raise ShapeError(f"{what} has shape {mat.shape}, expected {(dim, dim)}")


def lindblad_rhs(rho, t, H_of_t: HamiltonianFn, noise: NoiseModel, spec: HilbertSpaceSpec) -> np.ndarray:
    """``d rho / dt`` at time ``t``."""
    rho = np.asarray(rho, dtype=complex)
    _check_square(rho, spec.dim, "rho")
    H = np.asarray(H_of_t(t), dtype=complex)
    _check_square(H, spec.dim, "H(t)")
    return MasterEquation(H_of_t, noise, spec)(t, rho, H)


def _rk4(deriv, H_of_t, y, n: int, dt: float, after_step=None):
    H0 = H_of_t(0.0)
    for i in range(n):
        t = i * dt
        Hm = H_of_t(t + 0.5 * dt)
        H1 = H_of_t(t + dt)
        k1 = deriv(t, y, H0)
        k2 = deriv(t + 0.5 * dt, y + (0.5 * dt) * k1, Hm)
        k3 = deriv(t + 0.5 * dt, y + (0.5 * dt) * k2, Hm)
        k4 = deriv(t + dt, y + dt * k3, H1)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        H0 = H1
        if after_step is not None:
            after_step(i + 1, y)
    return y


def _sample_steps(n: int, n_samples: int) -> list[int]:
    if n_samples <= 0 or n == 0:
        return []
    return sorted({round(k * n / n_samples) for k in range(1, n_samples + 1)})


@dataclass
class Trajectory:
    """Result of :func:`master_trajectory`.

    ``max_trace_drift`` and ``max_hermiticity`` are monitored every step on
    the raw integrator state, before the final re-Hermitization.
    """

    rho: np.ndarray
    times: list[float]
    states: list[np.ndarray]
    steps: int
    dt: float
    max_trace_drift: float = 0.0
    max_hermiticity: float = 0.0


def master_trajectory(
    rho0,
    H_of_t: HamiltonianFn,
    noise: NoiseModel,
    duration: float,
    cfg: IntegratorConfig,
    spec: HilbertSpaceSpec,
    n_samples: int = 0,
) -> Trajectory:
    """Propagate ``rho0`` and keep states at ``n_samples`` uniform times.

    Sample times are the step boundaries nearest ``k * duration / n_samples``
    for ``k = 1..n_samples``.
    """
    if duration < 0:
        raise ParameterError(f"duration must be >= 0, got {duration}")
    rho = np.array(rho0, dtype=complex)
    _check_square(rho, spec.dim, "rho0")
    eq = MasterEquation(H_of_t, noise, spec)
    n, dt = cfg.step_count(duration, eq.max_rate)
    want = set(_sample_steps(n, n_samples))
    traj = Trajectory(rho, [], [], n, dt)

    def after_step(i, y):
        drift = abs(np.trace(y).real - 1.0)
        if not drift <= TRACE_TOL:
            raise StepSizeError(f"trace drift {drift:.3g} after {i} steps of {dt:.3g} s; shrink dt")
        traj.max_trace_drift = max(traj.max_trace_drift, drift)
        # RK4 keeps the trace of a trace-preserving generator exactly, so an
        # unstable step shows up as growth of Tr(rho^2) instead
        purity = np.vdot(y, y).real
        if not purity <= 1.0 + TRACE_TOL:
            raise StepSizeError(f"Tr(rho^2) = {purity:.6g} > 1 after {i} steps of {dt:.3g} s; shrink dt")
        if i in want or i == n:
            traj.max_hermiticity = max(traj.max_hermiticity, float(np.max(np.abs(y - y.conj().T))))
        if i in want:
            traj.times.append(i * dt)
            traj.states.append(0.5 * (y + y.conj().T))

    if n:
        rho = _rk4(eq, H_of_t, rho, n, dt, after_step)
    traj.rho = 0.5 * (rho + rho.conj().T)
    return traj


def evolve_master(
    rho0,
    H_of_t: HamiltonianFn,
    noise: NoiseModel,
    duration: float,
    cfg: IntegratorConfig,
    spec: HilbertSpaceSpec,
) -> np.ndarray:
    """``rho(duration)`` under the master equation, re-Hermitized once at the end."""
    return master_trajectory(rho0, H_of_t, noise, duration, cfg, spec).rho


def evolve_unitary(psi0, H_of_t: HamiltonianFn, duration: float, cfg: IntegratorConfig) -> np.ndarray:
    """Schrödinger propagation of a pure state."""
    if duration < 0:
        raise ParameterError(f"duration must be >= 0, got {duration}")
    psi = np.array(psi0, dtype=complex)
    n, dt = cfg.step_count(duration, _frequency_of(H_of_t))
    if n == 0:
        return psi
    norm0 = np.vdot(psi, psi).real

    def after_step(i, y):
        drift = abs(np.vdot(y, y).real - norm0)
        if not drift <= NORM_TOL:
            raise StepSizeError(f"norm drift {drift:.3g} after {i} steps of {dt:.3g} s; shrink dt")

    return _rk4(lambda t, y, H: -1j * (H @ y), H_of_t, psi, n, dt, after_step)


def raman_analytic(t: float, g: float, delta: float, original_picture: bool = False):
    """Amplitudes of ``|e,0,1>`` and ``|g,1,0>`` under the effective Raman coupling.

    With ``original_picture=True`` both carry the common phase
    ``exp(i g^2 t / delta)`` picked up when undoing the Stark-shift frame.
    """
    if delta == 0:
        raise SingularDetuningError("raman_analytic needs a nonzero detuning")
    theta = g * g * t / delta
    amps = (complex(math.cos(theta)), 1j * math.sin(theta))
    if original_picture:
        phase = complex(math.cos(theta), math.sin(theta))
        amps = (amps[0] * phase, amps[1] * phase)
    return amps


def liouvillian(H_frozen, noise: NoiseModel, spec: HilbertSpaceSpec) -> np.ndarray:
    """Dense Liouvillian acting on row-major ``vec(rho)``.

    Assembled term by term from Kronecker products (``vec(A X B) =
    (A ⊗ B^T) vec(X)``), independently of :class:`MasterEquation`.
    """
    d = spec.dim
    if d * d > ORACLE_MAX_SUPERDIM:
        raise OracleRefusedError(f"oracle limited to dim^2 <= {ORACLE_MAX_SUPERDIM}, got {d * d}")
    H = np.asarray(H_frozen, dtype=complex)
    _check_square(H, d, "H_frozen")
    eye = np.eye(d)

    def left(A):
        return np.kron(A, eye)

    def right(B):
        return np.kron(eye, B.T)

    def dissipator(L):
        LdL = L.conj().T @ L
        return np.kron(L, L.conj()) - 0.5 * left(LdL) - 0.5 * right(LdL)

    superop = -1j * (left(H) - right(H))
    for j in (1, 2, 3):
        if noise.kappa[j - 1]:
            superop += noise.kappa[j - 1] * dissipator(cavity_annihilation(j, spec))
    lowering = {
        "fe": lift(qutrit_transition("e", "f").T, 0, spec),
        "fg": lift(qutrit_transition("g", "f").T, 0, spec),
        "eg": lift(qutrit_transition("g", "e").T, 0, spec),
    }
    for pair in ("fe", "fg", "eg"):
        if noise.relax(pair):
            superop += noise.relax(pair) * dissipator(lowering[pair])
        if noise.dephase(pair):
            superop += noise.dephase(pair) * dissipator(lift(sz_operator(pair), 0, spec))
    return superop


def liouvillian_expm(H_frozen, noise: NoiseModel, duration: float, spec: HilbertSpaceSpec) -> np.ndarray:
    """Exact propagator ``exp(L * duration)`` acting on row-major ``vec(rho)``.

    Brute-force oracle for small systems; ``H_frozen`` is held constant.
    """
    return expm(liouvillian(H_frozen, noise, spec) * duration)


def apply_superoperator(superop: np.ndarray, rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    return (superop @ rho.reshape(-1)).reshape(d, d)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``(1/2) ||rho - sigma||_1`` for Hermitian arguments."""
    diff = rho - sigma
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T)))))


def state_checks(rho: np.ndarray) -> dict[str, float]:
    """Trace drift, Hermiticity defect and minimum eigenvalue of ``rho``."""
    return {
        "trace_drift": abs(np.trace(rho).real - 1.0),
        "hermiticity": float(np.max(np.abs(rho - rho.conj().T))),
        "min_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))),
    }
