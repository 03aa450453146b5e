"""Complete system configuration and the default parameter set.

Unwanted qutrit-cavity couplings are stored as ratios.  For cavities 1 and
2 the reference is the dispersive coupling ``g = delta / b``; for cavity 3
it is the resonant coupling ``g_r``.  ``SystemConfig.step_params`` turns the
ratios into absolute couplings for a given ``b`` and crosstalk strength.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

from .dynamics import NoiseModel
from .errors import ParameterError
from .hamiltonian import CavitySet, CouplingSet, QutritSpectrum, StepParams
from .hilbert import HilbertSpaceSpec

TWO_PI = 2 * math.pi
GHz = TWO_PI * 1e9
MHz = TWO_PI * 1e6
us = 1e-6
ns = 1e-9
fF = 1e-15

# b = delta / g must stay above this for the dispersive treatment to make sense
MIN_B = 2.0

DEFAULT_RATIOS_STEP1 = {
    (1, "fe"): 1.0,
    (1, "eg"): 0.1,
    (2, "fg"): 1.0,
    (2, "eg"): 0.1,
    (3, "eg"): 0.1,
    (3, "fe"): 1.0,
    (3, "fg"): 1.0,
}
DEFAULT_RATIOS_STEP2 = {
    (1, "eg"): 1.0,
    (1, "fg"): 1.0,
    (1, "fe"): 1.0,
    (2, "eg"): 1.0,
    (2, "fg"): 1.0,
    (2, "fe"): 1.0,
    (3, "fg"): 1.0,
    (3, "fe"): 1.0,
}

DEFAULT_KAPPA = (1 / (10 * us),) * 3


def default_noise(step: int) -> NoiseModel:
    if step == 1:
        relax = {"fe": 1 / (10 * us), "fg": 1 / (10 * us), "eg": 1 / (100 * us)}
    elif step == 2:
        relax = {"fe": 1 / (10 * us), "fg": 1 / (10 * us), "eg": 1 / (10 * us)}
    else:
        raise ParameterError(f"step must be 1 or 2, got {step}")
    dephase = {pair: 1 / (1 * us) for pair in ("fe", "fg", "eg")}
    return NoiseModel(kappa=DEFAULT_KAPPA, gamma_relax=relax, gamma_phi=dephase, step=step)


def check_b(b: float) -> float:
    if not (isinstance(b, (int, float)) and math.isfinite(b) and b > MIN_B):
        raise ParameterError(
            f"b = delta/g = {b} violates the dispersive-regime guard b > {MIN_B}"
        )
    return float(b)


@dataclass(frozen=True)
class SystemConfig:
    """Every physical input of a protocol run except ``b`` and crosstalk."""

    omega_eg1: float = 5 * GHz
    omega_fe1: float = 10 * GHz
    omega_eg2: float = 1 * GHz
    omega_fe2: float = 12 * GHz
    omega_c: tuple[float, float, float] = (14 * GHz, 9 * GHz, 1 * GHz)
    kappa: tuple[float, float, float] = DEFAULT_KAPPA
    nbar: tuple[float, float, float] = (1.0, 1.0, 1.0)
    g_r: float = 200 * MHz
    ratios1: Mapping[tuple[int, str], float] = field(default_factory=lambda: dict(DEFAULT_RATIOS_STEP1))
    ratios2: Mapping[tuple[int, str], float] = field(default_factory=lambda: dict(DEFAULT_RATIOS_STEP2))
    noise1: NoiseModel = field(default_factory=lambda: default_noise(1))
    noise2: NoiseModel = field(default_factory=lambda: default_noise(2))
    t_d: float = 0.0
    t_b: float = 0.0
    capacitances: tuple[float, float, float] = (1 * fF, 1 * fF, 1 * fF)
    c_sigma: float = 100 * fF
    fock_cutoffs: tuple[int, int, int] = (2, 2, 2)

    def __post_init__(self):
        HilbertSpaceSpec(tuple(self.fock_cutoffs))
        if not self.g_r > 0:
            raise ParameterError(f"g_r must be positive, got {self.g_r}")
        if self.t_d < 0 or self.t_b < 0:
            raise ParameterError("dead times t_d and t_b must be >= 0")
        if any(not n > 0 for n in self.nbar):
            raise ParameterError("mean photon numbers nbar must be positive")
        if any(r < 0 for r in (*self.ratios1.values(), *self.ratios2.values())):
            raise ParameterError("coupling ratios must be >= 0")

    @property
    def spec(self) -> HilbertSpaceSpec:
        return HilbertSpaceSpec(tuple(self.fock_cutoffs))

    @property
    def delta(self) -> float:
        return self.omega_eg1 + self.omega_fe1 - self.omega_c[0]

    def g_from_b(self, b: float) -> float:
        return self.delta / check_b(b)

    def step_params(self, b: float, gkl_over_gr: float = 0.0) -> tuple[StepParams, StepParams]:
        """Step-1 and step-2 parameters with ``g = delta/b`` and all ``g_kl = gkl_over_gr * g_r``."""
        g = self.g_from_b(b)
        if not (math.isfinite(gkl_over_gr) and gkl_over_gr >= 0):
            raise ParameterError(f"crosstalk ratio must be >= 0, got {gkl_over_gr}")
        cross = {pair: gkl_over_gr * self.g_r for pair in ((1, 2), (1, 3), (2, 3))}
        cavities = CavitySet(self.omega_c, self.kappa)

        def absolute(ratios):
            return {(j, kl): r * (self.g_r if j == 3 else g) for (j, kl), r in ratios.items()}

        p1 = StepParams(
            1,
            QutritSpectrum(self.omega_eg1, self.omega_fe1),
            cavities,
            CouplingSet(g1=g, g2=g, g_r=self.g_r, unwanted=absolute(self.ratios1), cross=cross),
        )
        p2 = StepParams(
            2,
            QutritSpectrum(self.omega_eg2, self.omega_fe2),
            cavities,
            CouplingSet(g1=g, g2=g, g_r=self.g_r, unwanted=absolute(self.ratios2), cross=cross),
        )
        return p1, p2

    def without_noise(self) -> "SystemConfig":
        return replace(
            self,
            kappa=(0.0, 0.0, 0.0),
            noise1=NoiseModel(step=1),
            noise2=NoiseModel(step=2),
        )

    def without_unwanted(self) -> "SystemConfig":
        return replace(
            self,
            ratios1={k: 0.0 for k in self.ratios1},
            ratios2={k: 0.0 for k in self.ratios2},
        )

    def ideal(self) -> "SystemConfig":
        """No noise and no unwanted couplings; combine with zero crosstalk."""
        return self.without_noise().without_unwanted()

    def noise_models(self) -> tuple[NoiseModel, NoiseModel]:
        """Step noise models with the shared cavity decay rates filled in."""
        return (
            replace(self.noise1, kappa=self.kappa),
            replace(self.noise2, kappa=self.kappa),
        )
