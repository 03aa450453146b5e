"""Composite Hilbert space: one flux qutrit and three truncated cavity modes.

Slot order is fixed as ``qutrit ⊗ cavity1 ⊗ cavity2 ⊗ cavity3`` and the
qutrit levels are ordered ``g=0, e=1, f=2``.  Operators and states are plain
dense ``numpy`` arrays with ``complex128`` entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

from .errors import (
    InvalidCutoffError,
    InvalidStateError,
    InvalidTransitionError,
    ShapeError,
)

LEVELS = {"g": 0, "e": 1, "f": 2}
QUTRIT = 0
CAVITY_SLOTS = (1, 2, 3)

Level = Union[str, int]


def level_index(level: Level) -> int:
    if isinstance(level, str):
        try:
            return LEVELS[level]
        except KeyError:
            raise InvalidTransitionError(f"unknown qutrit level {level!r}") from None
    if level not in (0, 1, 2):
        raise InvalidTransitionError(f"unknown qutrit level {level!r}")
    return int(level)


@dataclass(frozen=True)
class HilbertSpaceSpec:
    """Dimensions of qutrit ⊗ three Fock spaces.

    ``fock_cutoffs`` holds the maximum photon number per cavity, so cavity
    ``j`` has dimension ``fock_cutoffs[j-1] + 1``.
    """

    fock_cutoffs: tuple[int, int, int] = (2, 2, 2)

    def __post_init__(self):
        cutoffs = tuple(int(n) for n in self.fock_cutoffs)
        if len(cutoffs) != 3:
            raise InvalidCutoffError(f"need three Fock cutoffs, got {len(cutoffs)}")
        if any(n < 1 for n in cutoffs):
            raise InvalidCutoffError(f"Fock cutoffs must be >= 1, got {cutoffs}")
        object.__setattr__(self, "fock_cutoffs", cutoffs)

    @property
    def qutrit_dim(self) -> int:
        return 3

    @property
    def dims(self) -> tuple[int, ...]:
        return (3,) + tuple(n + 1 for n in self.fock_cutoffs)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, level: Level, photons: Sequence[int]) -> int:
        """Flat basis index of ``|level, n1, n2, n3>``."""
        photons = tuple(int(n) for n in photons)
        if len(photons) != 3:
            raise InvalidStateError(f"need three photon numbers, got {photons}")
        for j, (n, cap) in enumerate(zip(photons, self.fock_cutoffs), start=1):
            if not 0 <= n <= cap:
                raise InvalidStateError(
                    f"cavity {j} photon number {n} outside [0, {cap}]"
                )
        return int(np.ravel_multi_index((level_index(level),) + photons, self.dims))


def annihilation(n_max: int) -> np.ndarray:
    """Truncated ladder operator on ``|0>..|n_max>`` with ``<n-1|a|n> = sqrt(n)``."""
    if int(n_max) != n_max or n_max < 1:
        raise InvalidCutoffError(f"n_max must be an integer >= 1, got {n_max}")
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


def qutrit_transition(lower: Level, upper: Level) -> np.ndarray:
    """Raising operator ``|upper><lower|``; its adjoint is the lowering operator."""
    lo, up = level_index(lower), level_index(upper)
    if lo == up:
        raise InvalidTransitionError(f"transition needs two distinct levels, got {lower!r} twice")
    op = np.zeros((3, 3), dtype=complex)
    op[up, lo] = 1.0
    return op


_SZ_PAIRS = {"fe": ("f", "e"), "fg": ("f", "g"), "eg": ("e", "g")}


def sz_operator(pair: str) -> np.ndarray:
    """``|k><k| - |l><l|`` for the pair ``kl`` in ``{fe, fg, eg}``."""
    try:
        upper, lower = _SZ_PAIRS[pair]
    except KeyError:
        raise InvalidTransitionError(f"S^z pair must be one of fe, fg, eg; got {pair!r}") from None
    diag = np.zeros(3)
    diag[LEVELS[upper]] = 1.0
    diag[LEVELS[lower]] = -1.0
    return np.diag(diag).astype(complex)


def lift(op: np.ndarray, slot: int, spec: HilbertSpaceSpec) -> np.ndarray:
    """Embed a single-subsystem operator as ``I ⊗ .. ⊗ op ⊗ .. ⊗ I``.

    ``slot`` is 0 for the qutrit and ``j`` for cavity ``j``.
    """
    dims = spec.dims
    if slot not in range(len(dims)):
        raise ShapeError(f"slot must be in 0..{len(dims) - 1}, got {slot}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[slot], dims[slot]):
        raise ShapeError(
            f"operator of shape {op.shape} does not fit slot {slot} of dimension {dims[slot]}"
        )
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[slot] = op
    return reduce(np.kron, factors)


def cavity_annihilation(j: int, spec: HilbertSpaceSpec) -> np.ndarray:
    """``a_j`` lifted onto the full space (``j`` in 1..3)."""
    if j not in CAVITY_SLOTS:
        raise ShapeError(f"cavity index must be 1, 2 or 3, got {j}")
    return lift(annihilation(spec.fock_cutoffs[j - 1]), j, spec)


def qutrit_op(op: np.ndarray, spec: HilbertSpaceSpec) -> np.ndarray:
    return lift(op, QUTRIT, spec)


def basis_state(qutrit_level: Level, photons: Sequence[int], spec: HilbertSpaceSpec) -> np.ndarray:
    """Computational basis vector ``|level>|n1>|n2>|n3>``."""
    psi = np.zeros(spec.dim, dtype=complex)
    psi[spec.index(qutrit_level, photons)] = 1.0
    return psi


def projector(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def qutrit_populations(rho: np.ndarray, spec: HilbertSpaceSpec) -> np.ndarray:
    """Diagonal of the reduced qutrit state, ordered (g, e, f)."""
    diag = np.real(np.diagonal(rho)).reshape(3, -1)
    return diag.sum(axis=1)
