"""Command-line entry point ``ghzsim``.

Exit codes: 0 success, 2 configuration or parameter error, 3 numerical
failure, 4 failed invariant check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig, dump_config, parse_config
from .dynamics import IntegratorConfig
from .errors import ConfigError, OracleRefusedError, ParameterError, StepSizeError
from .params import check_b
from .protocol import ProtocolSchedule
from .sweep import SweepPoint, SweepResult, SweepRow, content_hash, evaluate_point, fidelity_vs_b
from .validation import SMALL_CUTOFFS, ORACLE_TOL, piecewise_oracle_distance, run_invariant_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_INVARIANT = 4

WORKERS_ENV = "GHZSIM_WORKERS"


def _clean(value):
    """JSON-safe copy: NaN/inf become ``None``, tuples become lists."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


def _row_record(row: SweepRow) -> dict:
    # wall time is excluded so that re-running the echoed config reproduces the rows
    return _clean(
        {
            "b": row.b,
            "gkl_over_gr": row.gkl_over_gr,
            "fidelity": row.fidelity,
            "fidelity_phase_opt": row.fidelity_phase_opt,
            "phase": row.phase,
            "max_f_pop": row.max_f_pop,
            "t1_ns": row.t1 * 1e9,
            "tau_ns": row.tau * 1e9,
            "status": row.status,
        }
    )


def result_envelope(config_text: str, rows: list[SweepRow], diagnostics: dict | None = None) -> dict:
    """Config echo, its hash, tool version, per-row data and diagnostics."""
    return {
        "tool": "ghzsim",
        "version": __version__,
        "config": config_text,
        "config_hash": content_hash(config_text),
        "rows": [_row_record(r) for r in rows],
        "diagnostics": _clean(diagnostics or {}),
    }


def _write_json(path: str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _workers(cfg: RunConfig) -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw == "":
        return cfg.workers
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV}={raw!r} is not an integer") from None
    if workers < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1, got {workers}")
    return workers


def _cmd_run(args, cfg: RunConfig) -> int:
    b = args.b if args.b is not None else cfg.b
    if b is None:
        raise ConfigError("no b given: pass --b or set b in [sweep]")
    gkl = args.gkl if args.gkl is not None else cfg.gkl
    check_b(b)
    row = evaluate_point(SweepPoint(b, gkl, cfg.system, cfg.integrator))
    print(f"b = {row.b:g}, g_kl/g_r = {row.gkl_over_gr:g}")
    print(f"fidelity            {row.fidelity:.12g}")
    print(f"fidelity_phase_opt  {row.fidelity_phase_opt:.12g} (phi = {row.phase:.6f} rad)")
    print(f"max_f_pop           {row.max_f_pop:.6g}")
    print(f"t1 = {row.t1 * 1e9:.6g} ns, tau = {row.tau * 1e9:.6g} ns, wall time {row.wall_time:.1f} s")
    for key, value in sorted(row.diagnostics.items()):
        print(f"  {key}: {value}")
    echo = dump_config(cfg, **{"sweep.b": repr(float(b)), "sweep.gkl": repr(float(gkl))})
    out = args.out or cfg.outputs["envelope"]
    _write_json(out, result_envelope(echo, [row], row.diagnostics))
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_sweep(args, cfg: RunConfig) -> int:
    spec = replace(cfg.sweep_spec(), worker_count=_workers(cfg))
    result: SweepResult = fidelity_vs_b(spec)
    csv_path = args.csv or cfg.outputs["csv"]
    env_path = args.envelope or cfg.outputs["envelope"]
    Path(csv_path).write_text(result.to_csv(), encoding="utf-8")
    _write_json(env_path, result_envelope(dump_config(cfg), result.rows, result.metadata))
    failed = [r for r in result.rows if not r.ok]
    print(f"{len(result.rows)} points, {len(failed)} failed; wrote {csv_path} and {env_path}")
    for r in failed:
        print(f"  b={r.b:g} g_kl={r.gkl_over_gr:g}: {r.status} {r.diagnostics.get('message', '')}", file=sys.stderr)
    return EXIT_NUMERIC if failed else EXIT_OK


def _cmd_validate(args, cfg: RunConfig) -> int:
    b = args.b if args.b is not None else (cfg.b if cfg.b is not None else 8.0)
    check_b(b)
    results = run_invariant_suite(cfg.system, b, cfg.gkl, slices=args.slices, integrator=cfg.integrator)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_INVARIANT if failed else EXIT_OK


def _cmd_oracle_check(args, cfg: RunConfig) -> int:
    b = args.b if args.b is not None else (cfg.b if cfg.b is not None else 8.0)
    gkl = cfg.gkl
    system = replace(cfg.system, fock_cutoffs=tuple(args.cutoffs))
    p1, p2 = system.step_params(b, gkl)
    n1, n2 = system.noise_models()
    schedule = ProtocolSchedule.from_params(p1, p2)
    worst = 0.0
    for name, p, noise, duration in (("step 1", p1, n1, schedule.t1), ("step 2", p2, n2, schedule.t2)):
        dist = piecewise_oracle_distance(p, noise, duration, system.spec, args.slices, integrator=cfg.integrator)
        print(f"{name}: trace distance {dist:.3e} over {args.slices} slices (dim {system.spec.dim})")
        worst = max(worst, dist)
    return EXIT_OK if worst < ORACLE_TOL else EXIT_INVARIANT


def _cutoffs(text: str) -> tuple[int, int, int]:
    try:
        values = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cutoffs must look like 1,1,1, got {text!r}") from None
    if len(values) != 3:
        raise argparse.ArgumentTypeError("cutoffs need three comma-separated integers")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ghzsim", description="Three-cavity GHZ state preparation simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="config file (an empty file means all defaults)")
        return p

    run = add("run", "simulate one (b, g_kl) point")
    run.add_argument("--b", type=float, help="dispersive ratio delta/g (must exceed 2)")
    run.add_argument("--gkl", type=float, help="crosstalk strength in units of g_r")
    run.add_argument("--out", help="result envelope path (default: [output] envelope)")

    sweep = add("sweep", "fidelity over the b x g_kl grid")
    sweep.add_argument("--csv", help="CSV path (default: [output] csv)")
    sweep.add_argument("--envelope", help="result envelope path (default: [output] envelope)")

    validate = add("validate", "run the invariant suite")
    validate.add_argument("--b", type=float, help="b used by the protocol-level checks (default 8)")
    validate.add_argument("--slices", type=int, default=16, help="slices for the oracle comparison")

    oracle = add("oracle-check", "compare RK4 with exact propagation on a sliced Hamiltonian")
    oracle.add_argument("--slices", type=int, default=64)
    oracle.add_argument("--b", type=float, help="dispersive ratio (default 8)")
    oracle.add_argument(
        "--cutoffs", type=_cutoffs, default=SMALL_CUTOFFS, help="Fock cutoffs for the comparison (default 1,1,1)"
    )
    return parser


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep, "validate": _cmd_validate, "oracle-check": _cmd_oracle_check}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ParameterError, OracleRefusedError) as exc:
        print(f"ghzsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"ghzsim: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepSizeError, ArithmeticError, ValueError) as exc:
        print(f"ghzsim: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
