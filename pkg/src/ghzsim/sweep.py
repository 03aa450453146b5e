"""Parameter sweeps over the dispersive ratio ``b`` and crosstalk strength.

Every point is an independent, deterministic protocol run.  Points run in a
process pool, with BLAS pinned to one thread so that results are bitwise
identical whatever the worker count.  Rows always come back in input order.
"""

from __future__ import annotations

import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .dynamics import IntegratorConfig
from .errors import GhzSimError, ParameterError
from .params import SystemConfig, check_b
from .protocol import (
    ProtocolSchedule,
    fidelity,
    ghz_target,
    phase_optimized_ghz_fidelity,
    run_protocol,
)

DEFAULT_B_GRID = tuple(float(b) for b in np.arange(4.0, 14.0 + 1e-9, 0.5))
DEFAULT_GKL_GRID = (0.0, 0.4, 0.6, 0.8, 1.0)

CSV_HEADER = "b,gkl_over_gr,fidelity,fidelity_phase_opt,max_f_pop,t1_ns,tau_ns,status"


@dataclass(frozen=True)
class SweepPoint:
    b: float
    gkl_over_gr: float = 0.0
    config: SystemConfig = field(default_factory=SystemConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    ideal: bool = False


@dataclass
class SweepRow:
    b: float
    gkl_over_gr: float
    fidelity: float = math.nan
    fidelity_phase_opt: float = math.nan
    max_f_pop: float = math.nan
    t1: float = math.nan
    tau: float = math.nan
    wall_time: float = 0.0
    status: str = "ok"
    phase: float = math.nan
    diagnostics: dict = field(default_factory=dict, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def csv_fields(self) -> list[str]:
        return [
            _fmt(self.b),
            _fmt(self.gkl_over_gr),
            _fmt(self.fidelity),
            _fmt(self.fidelity_phase_opt),
            _fmt(self.max_f_pop),
            _fmt(self.t1 * 1e9),
            _fmt(self.tau * 1e9),
            self.status,
        ]


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def evaluate_point(point: SweepPoint) -> SweepRow:
    """Run the protocol at one ``(b, g_kl)`` point; raises on invalid input."""
    start = time.perf_counter()
    cfg = point.config
    check_b(point.b)
    p1, p2 = cfg.step_params(point.b, point.gkl_over_gr)
    noise1, noise2 = cfg.noise_models()
    schedule = ProtocolSchedule.from_params(p1, p2, cfg.t_d, cfg.t_b)
    spec = cfg.spec
    rho, diag = run_protocol(
        p1, p2, noise1, noise2, schedule, spec,
        integrator=point.integrator, ideal=point.ideal, nbar=cfg.nbar,
    )
    f_opt, phi = phase_optimized_ghz_fidelity(rho, spec)
    return SweepRow(
        b=point.b,
        gkl_over_gr=point.gkl_over_gr,
        fidelity=fidelity(rho, ghz_target(spec)),
        fidelity_phase_opt=f_opt,
        max_f_pop=diag.max_f_population,
        t1=schedule.t1,
        tau=schedule.tau,
        wall_time=time.perf_counter() - start,
        phase=phi,
        diagnostics=diag.as_dict(),
    )


def _guarded(task: Callable[[SweepPoint], SweepRow], point: SweepPoint) -> SweepRow:
    with threadpool_limits(limits=1):
        try:
            return task(point)
        except (GhzSimError, ValueError, ArithmeticError) as exc:
            return SweepRow(
                b=getattr(point, "b", math.nan),
                gkl_over_gr=getattr(point, "gkl_over_gr", math.nan),
                status=f"error:{type(exc).__name__}",
                diagnostics={"message": str(exc)},
            )


def run_parallel(
    points: Sequence[SweepPoint],
    worker_count: int = 1,
    task: Callable[[SweepPoint], SweepRow] = evaluate_point,
) -> list[SweepRow]:
    """Evaluate ``points`` on ``worker_count`` processes, rows in input order.

    A failing point yields a row whose ``status`` names the exception; it
    never affects other points.
    """
    if int(worker_count) != worker_count or worker_count < 1:
        raise ParameterError(f"worker_count must be an integer >= 1, got {worker_count}")
    points = list(points)
    if worker_count == 1 or len(points) <= 1:
        return [_guarded(task, p) for p in points]
    with ProcessPoolExecutor(max_workers=min(worker_count, len(points))) as pool:
        return list(pool.map(_guarded, [task] * len(points), points))


@dataclass(frozen=True)
class SweepSpec:
    b_values: tuple[float, ...] = DEFAULT_B_GRID
    g_cross_values: tuple[float, ...] = DEFAULT_GKL_GRID
    config: SystemConfig = field(default_factory=SystemConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    worker_count: int = 1

    def __post_init__(self):
        object.__setattr__(self, "b_values", tuple(float(b) for b in self.b_values))
        object.__setattr__(self, "g_cross_values", tuple(float(g) for g in self.g_cross_values))
        bad = [b for b in self.b_values if not b > 2.0]
        if bad:
            raise ParameterError(f"b values must exceed 2 (dispersive regime), got {bad}")
        if any(not g >= 0 for g in self.g_cross_values):
            raise ParameterError("crosstalk multiples of g_r must be >= 0")

    def points(self) -> list[SweepPoint]:
        return [
            SweepPoint(b, g, self.config, self.integrator)
            for b in self.b_values
            for g in self.g_cross_values
        ]


def content_hash(text: str) -> str:
    """Git blob hash of ``text``."""
    data = text.encode()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


@dataclass
class SweepResult:
    rows: list[SweepRow]
    metadata: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows:
            buf.write(",".join(row.csv_fields()) + "\n")
        return buf.getvalue()

    def lookup(self, b: float, gkl_over_gr: float) -> SweepRow:
        for row in self.rows:
            if row.b == b and row.gkl_over_gr == gkl_over_gr:
                return row
        raise KeyError((b, gkl_over_gr))


def _metadata(spec: SweepSpec) -> dict:
    canonical = repr(replace(spec, worker_count=1))
    return {
        "config_hash": content_hash(canonical),
        "fock_cutoffs": list(spec.config.fock_cutoffs),
        "dt": spec.integrator.dt,
        "steps_per_period": spec.integrator.steps_per_period,
        "points": len(spec.b_values) * len(spec.g_cross_values),
    }


def fidelity_vs_b(spec: SweepSpec) -> SweepResult:
    """Evaluate the full ``b`` by ``g_kl`` grid; all three ``g_kl`` are equal at each point."""
    rows = run_parallel(spec.points(), spec.worker_count)
    return SweepResult(rows, _metadata(spec))


@dataclass
class ConvergenceTable:
    rows: list[tuple[tuple[int, int, int], IntegratorConfig, SweepRow]]

    def _spread(self, attr: str) -> float:
        values = [getattr(r, attr) for _, _, r in self.rows if r.ok]
        return max(values) - min(values) if len(values) > 1 else math.nan

    @property
    def spread(self) -> float:
        """Largest pairwise difference of the literal fidelity over successful rows."""
        return self._spread("fidelity")

    @property
    def spread_phase_opt(self) -> float:
        return self._spread("fidelity_phase_opt")


def convergence_scan(
    base_point: SweepPoint,
    cutoff_list: Iterable[tuple[int, int, int]],
    integrators: Iterable[IntegratorConfig],
    worker_count: int = 1,
) -> ConvergenceTable:
    """Fidelity at every (cutoff, integrator) combination of ``base_point``."""
    cutoff_list = [tuple(c) for c in cutoff_list]
    integrators = list(integrators)
    if len(cutoff_list) * len(integrators) < 2:
        raise ParameterError("convergence_scan needs at least two combinations")
    combos = [(c, i) for c in cutoff_list for i in integrators]
    points = [
        replace(base_point, config=replace(base_point.config, fock_cutoffs=c), integrator=i)
        for c, i in combos
    ]
    rows = run_parallel(points, worker_count)
    return ConvergenceTable([(c, i, r) for (c, i), r in zip(combos, rows)])
