"""Simulator for two-step GHZ photon-state preparation in three cavities."""

__version__ = "0.1.0"

from .config import RunConfig, default_config, dump_config, parse_config, parse_config_text
from .dynamics import (
    IntegratorConfig,
    NoiseModel,
    evolve_master,
    evolve_unitary,
    liouvillian_expm,
    lindblad_rhs,
    raman_analytic,
    trace_distance,
)
from .errors import (
    ConfigError,
    GhzSimError,
    OracleRefusedError,
    ParameterError,
    ShapeError,
    StepSizeError,
)
from .hamiltonian import (
    CavitySet,
    CouplingSet,
    QutritSpectrum,
    StepParams,
    full_step1_hamiltonian,
    full_step2_hamiltonian,
    ideal_step1_hamiltonian,
)
from .hilbert import HilbertSpaceSpec
from .params import SystemConfig
from .protocol import (
    ProtocolSchedule,
    fidelity,
    ghz_target,
    initial_state,
    phase_optimized_ghz_fidelity,
    run_protocol,
)
from .sweep import SweepPoint, SweepResult, SweepSpec, evaluate_point, fidelity_vs_b
