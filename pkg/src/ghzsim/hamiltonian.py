"""Interaction-picture Hamiltonians for the two preparation steps.

All frequencies and couplings are angular (rad/s).  Each step's phases are
written in that step's local time, ``t = 0`` at the start of the step.

A qutrit-cavity coupling is addressed by ``(j, kl)``: cavity ``j`` in 1..3
and qutrit transition ``kl`` in ``{"fg", "fe", "eg"}``, whose raising
operator is ``|k><l|``.  Its phase frequency is ``omega_kl - omega_cj``.
Crosstalk between cavities ``k < l`` is addressed by ``(k, l)`` and carries
``omega_cl - omega_ck``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .errors import ParameterError, SingularDetuningError
from .hilbert import (
    HilbertSpaceSpec,
    cavity_annihilation,
    qutrit_op,
    qutrit_transition,
)

TRANSITIONS = ("fg", "fe", "eg")
CROSS_PAIRS = ((1, 2), (1, 3), (2, 3))

# couplings each step treats as unwanted; the wanted ones live on CouplingSet
UNWANTED_STEP1 = ((1, "fe"), (3, "fe"), (2, "fg"), (3, "fg"), (1, "eg"), (2, "eg"), (3, "eg"))
UNWANTED_STEP2 = ((1, "eg"), (2, "eg"), (1, "fg"), (2, "fg"), (3, "fg"), (1, "fe"), (2, "fe"), (3, "fe"))

_REL_TOL = 1e-9


@dataclass(frozen=True)
class QutritSpectrum:
    omega_eg: float
    omega_fe: float

    def __post_init__(self):
        if not (self.omega_eg > 0 and self.omega_fe > 0):
            raise ParameterError("qutrit transition frequencies must be positive")

    @property
    def omega_fg(self) -> float:
        return self.omega_eg + self.omega_fe

    def transition(self, kl: str) -> float:
        return {"fg": self.omega_fg, "fe": self.omega_fe, "eg": self.omega_eg}[kl]


@dataclass(frozen=True)
class CavitySet:
    omega_c: tuple[float, float, float]
    kappa: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        omega = tuple(float(w) for w in self.omega_c)
        kappa = tuple(float(k) for k in self.kappa)
        if len(omega) != 3 or len(kappa) != 3:
            raise ParameterError("need exactly three cavities")
        if any(w <= 0 for w in omega):
            raise ParameterError(f"cavity frequencies must be positive, got {omega}")
        if len(set(omega)) != 3:
            raise ParameterError(f"cavity frequencies must be pairwise distinct, got {omega}")
        if any(k < 0 for k in kappa):
            raise ParameterError(f"cavity decay rates must be >= 0, got {kappa}")
        object.__setattr__(self, "omega_c", omega)
        object.__setattr__(self, "kappa", kappa)

    @property
    def Q(self) -> tuple[float, ...]:
        """Quality factors ``omega_c / kappa`` (inf for a lossless mode)."""
        return tuple(w / k if k > 0 else np.inf for w, k in zip(self.omega_c, self.kappa))


@dataclass(frozen=True)
class CouplingSet:
    """Wanted couplings plus maps of unwanted and crosstalk strengths.

    ``unwanted`` is keyed by ``(j, kl)``; ``cross`` by ``(k, l)``.  Missing
    entries mean zero.
    """

    g1: float = 0.0
    g2: float = 0.0
    g_r: float = 0.0
    unwanted: Mapping[tuple[int, str], float] = field(default_factory=dict)
    cross: Mapping[tuple[int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        values = [self.g1, self.g2, self.g_r, *self.unwanted.values(), *self.cross.values()]
        if any(not np.isfinite(v) or v < 0 for v in values):
            raise ParameterError("coupling magnitudes must be finite and >= 0")
        for key in self.cross:
            if key not in CROSS_PAIRS:
                raise ParameterError(f"unknown crosstalk pair {key}")


@dataclass(frozen=True)
class StepParams:
    step: int
    spectrum: QutritSpectrum
    cavities: CavitySet
    couplings: CouplingSet

    def __post_init__(self):
        if self.step not in (1, 2):
            raise ParameterError(f"step must be 1 or 2, got {self.step}")
        allowed = UNWANTED_STEP1 if self.step == 1 else UNWANTED_STEP2
        for key in self.couplings.unwanted:
            if key not in allowed:
                raise ParameterError(f"coupling {key} is not an unwanted term of step {self.step}")
        if self.step == 1:
            d1, d2 = self.detuning(1, "fg"), self.detuning(2, "fe")
            if abs(d1 - d2) > _REL_TOL * max(abs(d1), abs(d2)):
                raise ParameterError(
                    "step 1 needs omega_fg - omega_c1 == omega_fe - omega_c2 "
                    f"(got {d1 / 2 / np.pi:.6g} Hz vs {d2 / 2 / np.pi:.6g} Hz)"
                )
        else:
            d = self.detuning(3, "eg")
            if abs(d) > _REL_TOL * self.cavities.omega_c[2]:
                raise ParameterError("step 2 needs cavity 3 resonant with the |g>-|e> transition")

    @property
    def delta(self) -> float:
        """Common dispersive detuning of step 1."""
        return self.detuning(1, "fg")

    def detuning(self, j: int, kl: str) -> float:
        return self.spectrum.transition(kl) - self.cavities.omega_c[j - 1]

    def cross_detuning(self, k: int, l: int) -> float:
        return self.cavities.omega_c[l - 1] - self.cavities.omega_c[k - 1]

    def qutrit_couplings(self) -> dict[tuple[int, str], float]:
        """Every qutrit-cavity coupling active in this step, wanted ones included."""
        c = self.couplings
        out = dict(c.unwanted)
        if self.step == 1:
            out[(1, "fg")] = c.g1
            out[(2, "fe")] = c.g2
        else:
            out[(3, "eg")] = c.g_r
        return out


@lru_cache(maxsize=64)
def _coupling_operator(j: int, kl: str, spec: HilbertSpaceSpec) -> np.ndarray:
    """``a_j |k><l|`` on the full space."""
    k, l = kl
    op = cavity_annihilation(j, spec) @ qutrit_op(qutrit_transition(l, k), spec)
    op.flags.writeable = False
    return op


@lru_cache(maxsize=64)
def _crosstalk_operator(k: int, l: int, spec: HilbertSpaceSpec) -> np.ndarray:
    """``a_k a_l^dagger`` on the full space."""
    op = cavity_annihilation(k, spec) @ cavity_annihilation(l, spec).conj().T
    op.flags.writeable = False
    return op


class RotatingHamiltonian:
    """``H(t) = sum_k c_k (exp(i w_k t) O_k + h.c.)`` with precomputed ``O_k``.

    Terms with zero coupling are dropped.  Instances are callable and
    immutable, so they can be shared between concurrent workers.
    """

    def __init__(self, couplings, frequencies, operators, dim: int):
        keep = [i for i, c in enumerate(couplings) if c != 0.0]
        self.dim = dim
        self.couplings = np.array([couplings[i] for i in keep], dtype=float)
        self.frequencies = np.array([frequencies[i] for i in keep], dtype=float)
        if keep:
            self._ops = np.stack([operators[i] for i in keep]).reshape(len(keep), -1)
        else:
            self._ops = np.zeros((0, dim * dim), dtype=complex)
        self._ops.flags.writeable = False

    def __len__(self):
        return len(self.couplings)

    def __call__(self, t: float) -> np.ndarray:
        if not len(self):
            return np.zeros((self.dim, self.dim), dtype=complex)
        weights = self.couplings * np.exp(1j * self.frequencies * t)
        half = (weights @ self._ops).reshape(self.dim, self.dim)
        return half + half.conj().T

    @property
    def max_frequency(self) -> float:
        """Largest rate in the generator: phase frequencies and Rabi scales."""
        if not len(self):
            return 0.0
        return float(max(np.max(np.abs(self.frequencies)), 2.0 * np.max(self.couplings)))


def step1_generator(p: StepParams, spec: HilbertSpaceSpec, ideal: bool = False) -> RotatingHamiltonian:
    """Full step-1 Hamiltonian as a callable; ``ideal=True`` keeps only the wanted pair."""
    if p.step != 1:
        raise ParameterError("step-1 Hamiltonian needs step-1 parameters")
    return _generator(p, spec, ideal)


def step2_generator(p: StepParams, spec: HilbertSpaceSpec, ideal: bool = False) -> RotatingHamiltonian:
    if p.step != 2:
        raise ParameterError("step-2 Hamiltonian needs step-2 parameters")
    return _generator(p, spec, ideal)


def _generator(p: StepParams, spec: HilbertSpaceSpec, ideal: bool) -> RotatingHamiltonian:
    couplings, freqs, ops = [], [], []
    wanted = {1: ((1, "fg"), (2, "fe")), 2: ((3, "eg"),)}[p.step]
    for (j, kl), g in sorted(p.qutrit_couplings().items()):
        if ideal and (j, kl) not in wanted:
            continue
        couplings.append(g)
        freqs.append(p.detuning(j, kl))
        ops.append(_coupling_operator(j, kl, spec))
    if not ideal:
        for (k, l), g in sorted(p.couplings.cross.items()):
            couplings.append(g)
            freqs.append(p.cross_detuning(k, l))
            ops.append(_crosstalk_operator(k, l, spec))
    return RotatingHamiltonian(couplings, freqs, ops, spec.dim)


def ideal_step1_hamiltonian(t: float, p: StepParams, spec: HilbertSpaceSpec) -> np.ndarray:
    """Two dispersive couplings only: cavity 1 on |g>-|f>, cavity 2 on |e>-|f>."""
    return step1_generator(p, spec, ideal=True)(t)


def full_step1_hamiltonian(t: float, p: StepParams, spec: HilbertSpaceSpec) -> np.ndarray:
    """Wanted couplings, every unwanted qutrit-cavity term and intercavity crosstalk."""
    return step1_generator(p, spec)(t)


def full_step2_hamiltonian(t: float, p: StepParams, spec: HilbertSpaceSpec) -> np.ndarray:
    """Resonant cavity-3 coupling plus unwanted terms and crosstalk."""
    return step2_generator(p, spec)(t)


def _check_delta(p: StepParams) -> float:
    delta = p.delta
    if delta == 0:
        raise SingularDetuningError("dispersive detuning delta is zero")
    return delta


def effective_h0(p: StepParams, spec: HilbertSpaceSpec) -> np.ndarray:
    """ac-Stark shifts of |g> (from cavity 1) and |e> (from cavity 2)."""
    delta = _check_delta(p)
    g1, g2 = p.couplings.g1, p.couplings.g2
    n1 = cavity_annihilation(1, spec).conj().T @ cavity_annihilation(1, spec)
    n2 = cavity_annihilation(2, spec).conj().T @ cavity_annihilation(2, spec)
    proj_g = qutrit_op(np.diag([1.0, 0.0, 0.0]), spec)
    proj_e = qutrit_op(np.diag([0.0, 1.0, 0.0]), spec)
    return -(g1**2 / delta) * n1 @ proj_g - (g2**2 / delta) * n2 @ proj_e


def effective_hI(p: StepParams, spec: HilbertSpaceSpec) -> np.ndarray:
    """Raman |g>-|e> exchange mediated by cavities 1 and 2."""
    delta = _check_delta(p)
    a1 = cavity_annihilation(1, spec)
    a2 = cavity_annihilation(2, spec)
    s_minus = qutrit_op(qutrit_transition("g", "e").conj().T, spec)
    half = a1.conj().T @ a2 @ s_minus
    return -(p.couplings.g1 * p.couplings.g2 / delta) * (half + half.conj().T)


def default_params(step: int, b: float = 8.0) -> StepParams:
    """Default parameter set for ``step`` with ``g = delta / b``."""
    from .params import SystemConfig

    if step not in (1, 2):
        raise ParameterError(f"step must be 1 or 2, got {step}")
    return SystemConfig().step_params(b)[step - 1]
