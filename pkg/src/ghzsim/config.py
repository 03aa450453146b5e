"""Run configuration: INI-style sections with mandatory unit suffixes.

Frequencies are written as linear frequencies (``14 GHz``) and stored as
angular frequencies (rad/s).  Rates are written as lifetimes
(``kappa1_inv = 10 us``); ``inf`` disables a channel.  Every key missing
from the file takes its default value.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import IntegratorConfig, NoiseModel
from .errors import ConfigError, GhzSimError
from .params import DEFAULT_RATIOS_STEP1, DEFAULT_RATIOS_STEP2, SystemConfig
from .sweep import DEFAULT_GKL_GRID, SweepSpec

FREQUENCY_UNITS = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}
TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "μs": 1e-6, "ns": 1e-9, "ps": 1e-12}
CAPACITANCE_UNITS = {"F": 1.0, "pF": 1e-12, "fF": 1e-15, "aF": 1e-18}
UNITS = {"frequency": FREQUENCY_UNITS, "time": TIME_UNITS, "capacitance": CAPACITANCE_UNITS}

_RATIO_KEY = "step{step}_g{j}{kl}"


def _ratio_keys(step: int, ratios: dict) -> dict:
    return {_RATIO_KEY.format(step=step, j=j, kl=kl): ("number", f"{r:g}") for (j, kl), r in ratios.items()}


# section -> key -> (kind, default text)
SCHEMA: dict[str, dict[str, tuple[str, str]]] = {
    "qutrit.step1": {"omega_eg": ("frequency", "5 GHz"), "omega_fe": ("frequency", "10 GHz")},
    "qutrit.step2": {"omega_eg": ("frequency", "1 GHz"), "omega_fe": ("frequency", "12 GHz")},
    "cavities": {
        "omega_c1": ("frequency", "14 GHz"),
        "omega_c2": ("frequency", "9 GHz"),
        "omega_c3": ("frequency", "1 GHz"),
        "kappa1_inv": ("time", "10 us"),
        "kappa2_inv": ("time", "10 us"),
        "kappa3_inv": ("time", "10 us"),
        "nbar1": ("number", "1"),
        "nbar2": ("number", "1"),
        "nbar3": ("number", "1"),
        "c1": ("capacitance", "1 fF"),
        "c2": ("capacitance", "1 fF"),
        "c3": ("capacitance", "1 fF"),
        "c_sigma": ("capacitance", "100 fF"),
    },
    "couplings": {
        "g_r": ("frequency", "200 MHz"),
        **_ratio_keys(1, DEFAULT_RATIOS_STEP1),
        **_ratio_keys(2, DEFAULT_RATIOS_STEP2),
    },
    "noise.step1": {
        "gamma_phi_fe_inv": ("time", "1 us"),
        "gamma_phi_fg_inv": ("time", "1 us"),
        "gamma_phi_eg_inv": ("time", "1 us"),
        "gamma_fe_inv": ("time", "10 us"),
        "gamma_fg_inv": ("time", "10 us"),
        "gamma_eg_inv": ("time", "100 us"),
    },
    "noise.step2": {
        "gamma_phi_fe_inv": ("time", "1 us"),
        "gamma_phi_fg_inv": ("time", "1 us"),
        "gamma_phi_eg_inv": ("time", "1 us"),
        "gamma_fe_inv": ("time", "10 us"),
        "gamma_fg_inv": ("time", "10 us"),
        "gamma_eg_inv": ("time", "10 us"),
    },
    "schedule": {"t_d": ("time", "0 ns"), "t_b": ("time", "0 ns")},
    "sweep": {
        "b": ("optional_number", "none"),
        "gkl": ("number", "0"),
        "b_values": ("number_list", "4:14:0.5"),
        "gkl_values": ("number_list", ", ".join(f"{g:g}" for g in DEFAULT_GKL_GRID)),
        "workers": ("integer", "1"),
        "cutoffs": ("integer_list", "2, 2, 2"),
    },
    "integrator": {"dt": ("optional_time", "auto"), "steps_per_period": ("number", "50")},
    "output": {
        "csv": ("path", "sweep.csv"),
        "envelope": ("path", "envelope.json"),
    },
}

_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*([^\s\d.+-]\S*)?\s*$")


def parse_quantity(text: str, kind: str) -> float:
    """``"14 GHz"`` -> 2*pi*1.4e10 rad/s; ``"10 us"`` -> 1e-5 s."""
    m = _QUANTITY.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r} as a {kind}")
    number, unit = m.groups()
    units = UNITS[kind]
    if unit is None:
        raise ValueError(f"{kind} {text!r} needs a unit suffix ({', '.join(units)})")
    if unit not in units:
        raise ValueError(f"unknown {kind} unit {unit!r} in {text!r}; use one of {', '.join(units)}")
    value = float(number) * units[unit]
    if kind == "frequency":
        value *= 2 * math.pi
    return value


def _number_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError(f"range {text!r} must be start:stop:step with step > 0")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(round(start + k * step, 12)) for k in range(max(count, 0)))
    return tuple(float(p) for p in text.split(",") if p.strip())


def _convert(kind: str, text: str):
    text = text.strip()
    if kind in UNITS:
        return parse_quantity(text, kind)
    if kind == "optional_time":
        return None if text.lower() == "auto" else parse_quantity(text, "time")
    if kind == "number":
        return float(text)
    if kind == "optional_number":
        return None if text.lower() == "none" else float(text)
    if kind == "integer":
        return int(text)
    if kind == "number_list":
        return _number_list(text)
    if kind == "integer_list":
        return tuple(int(p) for p in text.split(","))
    if kind == "path":
        return text
    raise AssertionError(kind)


def _rate(lifetime: float) -> float:
    if not lifetime > 0:
        raise ValueError(f"lifetime must be positive, got {lifetime}")
    return 0.0 if math.isinf(lifetime) else 1.0 / lifetime


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    b: float | None
    gkl: float
    b_values: tuple[float, ...]
    gkl_values: tuple[float, ...]
    workers: int
    integrator: IntegratorConfig
    outputs: dict = field(default_factory=dict)
    text: dict = field(default_factory=dict, repr=False, compare=False)

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(self.b_values, self.gkl_values, self.system, self.integrator, self.workers)


def _read(source: str, origin: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), default_section="__none__"
    )
    parser.optionxform = str
    try:
        parser.read_string(source, source=origin)
    except configparser.Error as exc:
        raise ConfigError(f"{origin}: {exc}") from None
    return parser


def parse_config(path) -> RunConfig:
    """Read and validate a config file; every violation is reported at once."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), str(path))


def parse_config_text(source: str, origin: str = "<config>") -> RunConfig:
    parser = _read(source, origin)
    problems = []
    for section in parser.sections():
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        for key in parser[section]:
            if key not in SCHEMA[section]:
                problems.append(f"unknown key {key!r} in [{section}]")

    text, values = {}, {}
    for section, keys in SCHEMA.items():
        for key, (kind, default) in keys.items():
            raw = parser.get(section, key, fallback=default) if parser.has_section(section) else default
            text[(section, key)] = raw.strip()
            try:
                values[(section, key)] = _convert(kind, raw)
            except ValueError as exc:
                problems.append(f"[{section}] {key}: {exc}")
    if problems:
        raise ConfigError(problems)

    try:
        return _build(values, text)
    except (GhzSimError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def _build(v: dict, text: dict) -> RunConfig:
    def noise(step: int) -> NoiseModel:
        sec = f"noise.step{step}"
        return NoiseModel(
            gamma_relax={p: _rate(v[(sec, f"gamma_{p}_inv")]) for p in ("fe", "fg", "eg")},
            gamma_phi={p: _rate(v[(sec, f"gamma_phi_{p}_inv")]) for p in ("fe", "fg", "eg")},
            step=step,
        )

    def ratios(step: int, defaults: dict) -> dict:
        return {(j, kl): v[("couplings", _RATIO_KEY.format(step=step, j=j, kl=kl))] for (j, kl) in defaults}

    cav = "cavities"
    system = SystemConfig(
        omega_eg1=v[("qutrit.step1", "omega_eg")],
        omega_fe1=v[("qutrit.step1", "omega_fe")],
        omega_eg2=v[("qutrit.step2", "omega_eg")],
        omega_fe2=v[("qutrit.step2", "omega_fe")],
        omega_c=tuple(v[(cav, f"omega_c{j}")] for j in (1, 2, 3)),
        kappa=tuple(_rate(v[(cav, f"kappa{j}_inv")]) for j in (1, 2, 3)),
        nbar=tuple(v[(cav, f"nbar{j}")] for j in (1, 2, 3)),
        g_r=v[("couplings", "g_r")],
        ratios1=ratios(1, DEFAULT_RATIOS_STEP1),
        ratios2=ratios(2, DEFAULT_RATIOS_STEP2),
        noise1=noise(1),
        noise2=noise(2),
        t_d=v[("schedule", "t_d")],
        t_b=v[("schedule", "t_b")],
        capacitances=tuple(v[(cav, f"c{j}")] for j in (1, 2, 3)),
        c_sigma=v[(cav, "c_sigma")],
        fock_cutoffs=v[("sweep", "cutoffs")],
    )
    # frequency relations are checked by building one parameter pair
    system.step_params(10.0)
    if v[("sweep", "workers")] < 1:
        raise ValueError("[sweep] workers must be >= 1")
    return RunConfig(
        system=system,
        b=v[("sweep", "b")],
        gkl=v[("sweep", "gkl")],
        b_values=v[("sweep", "b_values")],
        gkl_values=v[("sweep", "gkl_values")],
        workers=v[("sweep", "workers")],
        integrator=IntegratorConfig(dt=v[("integrator", "dt")], steps_per_period=v[("integrator", "steps_per_period")]),
        outputs={"csv": v[("output", "csv")], "envelope": v[("output", "envelope")]},
        text=dict(text),
    )


def dump_config(cfg: RunConfig, **overrides) -> str:
    """Canonical config text; ``parse_config_text`` of it rebuilds ``cfg``.

    ``overrides`` maps ``"section.key"`` (dots allowed in the section) to
    replacement text, e.g. ``{"sweep.b": "8"}``.
    """
    text = {(s, k): default for s, keys in SCHEMA.items() for k, (_, default) in keys.items()}
    text.update(cfg.text)
    for dotted, value in overrides.items():
        section, key = dotted.rsplit(".", 1)
        if key not in SCHEMA.get(section, {}):
            raise ConfigError(f"unknown key {dotted}")
        text[(section, key)] = str(value)
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        lines.extend(f"{key} = {text[(section, key)]}" for key in keys)
        lines.append("")
    return "\n".join(lines)


def default_config() -> RunConfig:
    return parse_config_text("")
