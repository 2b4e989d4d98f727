"""Scenario configuration: INI-style text with unit suffixes.

Example::

    [cavity]
    r1 = matched
    r2 = 0.999
    length = 1 cm

    [comb]
    delta = 1 MHz
    finesse_a = 10

Frequencies are ordinary frequencies (Hz family) and are converted to rad/s
when parameter objects are built.  Bare numbers are read in SI base units
(Hz, s, m).  ``auto`` leaves a value to be derived.  Unknown sections or keys
are errors.  Environment variables ``AFCAVITY_<SECTION>__<KEY>`` override
file values.
"""

from __future__ import annotations

import configparser
import copy
import math
import os
import re
from dataclasses import dataclass, field

from . import model
from .dynamics import InputPulse, ModeCavity, SimulationConfig
from .errors import ConfigurationError

ENV_PREFIX = "AFCAVITY_"

_UNITS = {
    "frequency": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3},
}
_BASE_UNIT = {"frequency": "Hz", "time": "s", "length": "m"}

# section -> key -> (kind, default); kind is a unit family, "float", "int",
# "str", or "float|matched"
SCHEMA = {
    "cavity": {
        "r1": ("float|matched", "matched"),
        "r2": ("float", 0.999),
        "length": ("length", 0.01),
    },
    "comb": {
        "delta": ("frequency", 1e6),
        "finesse_a": ("float", 10.0),
        "peak_depth": ("float", 1.0),
        "tooth_shape": ("str", "gaussian"),
        "num_teeth": ("int", 21),
        "gamma_h": ("frequency", 0.0),
    },
    "pulse": {
        "fwhm_duration": ("time", 150e-9),
        "arrival_time": ("time", 600e-9),
        "carrier_detuning": ("frequency", 0.0),
    },
    "simulation": {
        "time_step": ("time", "auto"),
        "duration": ("time", "auto"),
        "resolution": ("int", 8),
        "cooperativity": ("float", 1.0),
        "cavity_model": ("str", "mode"),
        "cavity_linewidth": ("frequency", "auto"),
    },
}

_NUM_RE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-zµ]*)\s*$")


def parse_value(kind, text, where=""):
    text = str(text).strip()
    if text.lower() == "auto" and kind not in ("str",):
        return "auto"
    try:
        if kind == "str":
            return text
        if kind == "int":
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        if kind == "float|matched":
            if text.lower() == "matched":
                return "matched"
            return float(text)
        if kind == "float":
            return float(text)
        m = _NUM_RE.match(text)
        if not m:
            raise ValueError
        number, unit = float(m.group(1)), m.group(2).lower()
        if not unit:
            return number
        scale = _UNITS[kind].get(unit)
        if scale is None:
            raise ConfigurationError(
                f"{where}: unknown {kind} unit {m.group(2)!r}; use one of {sorted(_UNITS[kind])}"
            )
        return number * scale
    except ConfigurationError:
        raise
    except ValueError:
        raise ConfigurationError(f"{where}: cannot parse {text!r} as {kind}") from None


def format_value(kind, value):
    if value in ("auto", "matched"):
        return value
    if kind in _UNITS:
        return f"{float(value)!r} {_BASE_UNIT[kind]}"
    if kind == "int":
        return str(int(value))
    if kind == "str":
        return str(value)
    return repr(float(value))


@dataclass
class ScenarioConfig:
    """Fully resolved scenario; values in Hz, s and m."""

    values: dict = field(default_factory=lambda: {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()})

    def __getitem__(self, section):
        return self.values[section]

    def set(self, section, key, text, where="override"):
        if section not in SCHEMA:
            raise ConfigurationError(f"{where}: unknown section [{section}]")
        if key not in SCHEMA[section]:
            raise ConfigurationError(f"{where}: unknown key {key!r} in [{section}]")
        kind = SCHEMA[section][key][0]
        self.values[section][key] = parse_value(kind, text, f"{where} {section}.{key}")

    def to_text(self):
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key, (kind, _) in keys.items():
                lines.append(f"{key} = {format_value(kind, self.values[section][key])}")
            lines.append("")
        return "\n".join(lines)

    def copy(self):
        return ScenarioConfig(copy.deepcopy(self.values))

    def __eq__(self, other):
        return isinstance(other, ScenarioConfig) and self.values == other.values

    # -- parameter objects ------------------------------------------------

    def comb_params(self):
        c = self.values["comb"]
        if c["tooth_shape"] not in {s.value for s in model.ToothShape}:
            raise ConfigurationError(f"comb.tooth_shape must be gaussian or square, got {c['tooth_shape']!r}")
        return model.CombParams(
            delta=2 * math.pi * c["delta"],
            finesse_a=c["finesse_a"],
            peak_depth=c["peak_depth"],
            tooth_shape=c["tooth_shape"],
            num_teeth=c["num_teeth"],
            gamma_h=2 * math.pi * c["gamma_h"],
        )

    def d_tilde(self):
        return model.averaged_depth(self.comb_params())

    def r1(self):
        r1 = self.values["cavity"]["r1"]
        if r1 == "matched":
            return model.matched_r1(self.values["cavity"]["r2"], self.d_tilde())
        return r1

    def cavity_params(self):
        cav = self.values["cavity"]
        return model.CavityParams(self.r1(), cav["r2"], cav["length"])

    def pulse(self):
        p = self.values["pulse"]
        return InputPulse(p["fwhm_duration"], p["arrival_time"], 2 * math.pi * p["carrier_detuning"])

    def simulation_config(self):
        s = self.values["simulation"]
        return SimulationConfig(
            time_step=None if s["time_step"] == "auto" else s["time_step"],
            duration=None if s["duration"] == "auto" else s["duration"],
            resolution=s["resolution"],
        )

    def mode_cavity(self):
        """Cavity for the time-domain solver.

        ``cavity_model = mode`` gives a lossless mode whose linewidth is
        ``cavity_linewidth`` (``auto``: 50 x the pulse spectral FWHM);
        ``cavity_model = mirrors`` derives it from the [cavity] section.
        """
        s = self.values["simulation"]
        if s["cavity_model"] == "mirrors":
            return ModeCavity.from_params(self.cavity_params())
        if s["cavity_model"] != "mode":
            raise ConfigurationError(f"cavity_model must be 'mode' or 'mirrors', got {s['cavity_model']!r}")
        lw = s["cavity_linewidth"]
        if lw == "auto":
            lw = 50.0 * self.pulse().spectral_fwhm_hz
        return ModeCavity.lossless(model.kappa_from_linewidth(lw))


def parse_config_text(text, base=None, where="config"):
    cfg = base.copy() if base is not None else ScenarioConfig()
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=where)
    except configparser.Error as exc:
        raise ConfigurationError(f"{where}: {exc}".replace("\n", " ")) from None
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"{where}: unknown section [{section}]")
        for key, value in parser.items(section):
            cfg.set(section, key, value, where)
    return cfg


def apply_env(cfg, environ=None):
    environ = os.environ if environ is None else environ
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        if "__" not in rest:
            raise ConfigurationError(f"environment {name}: expected {ENV_PREFIX}<SECTION>__<KEY>")
        section, key = rest.split("__", 1)
        cfg.set(section, key, environ[name], f"environment {name}")
    return cfg


def apply_overrides(cfg, overrides):
    for item in overrides or ():
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigurationError(f"override {item!r}: expected section.key=value")
        lhs, value = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        cfg.set(section.strip(), key.strip(), value, "override")
    return cfg


def load_config(path=None, overrides=(), environ=None):
    """Defaults, then the file, then the environment, then explicit overrides."""
    cfg = ScenarioConfig()
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc.strerror}") from None
        cfg = parse_config_text(text, cfg, where=str(path))
    apply_env(cfg, environ)
    apply_overrides(cfg, overrides)
    return cfg
