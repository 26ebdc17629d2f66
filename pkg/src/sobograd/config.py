"""Run configuration files.

An INI-style document with the sections ``[grid]``, ``[problem]``,
``[method]`` and ``[output]``.  Every key is typed by ``SCHEMA``; unknown
sections or keys are rejected.  ``RunConfig.to_text`` emits a document that
parses back to an identical configuration.
"""
from __future__ import annotations

import configparser
import json
from dataclasses import dataclass, field
from pathlib import Path

from .descent import DescentConfig


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _ints(text: str) -> tuple:
    return tuple(int(v) for v in text.replace(" ", "").split(",") if v)


def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


def _opt_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


def _opt_str(text: str):
    return None if text.strip().lower() in ("", "none") else text.strip()


_CONVERT = {"int": int, "float": float, "str": str.strip, "bool": _bool, "ints": _ints, "floats": _floats,
            "opt_float": _opt_float, "opt_str": _opt_str}

_descent = DescentConfig()

# section -> key -> (type, default)
SCHEMA = {
    "grid": {
        "points": ("int", 64),
        "length": ("float", 16.0),
        "grids": ("ints", ()),
    },
    "problem": {
        "kind": ("str", "gpe"),  # gpe | excited | optics
        "case": ("opt_str", None),
        "g": ("float", 100.0),
        "omega": ("float", 0.0),
        "lambda": ("opt_float", None),
        "norm": ("float", 1.0),
        "seed": ("str", "gaussian"),
        "seed_file": ("opt_str", None),
        "seed_norms": ("floats", ()),
        "seed_width": ("float", 1.0),
        "kappa": ("float", 0.5),
        "mu_u": ("float", 0.5),
        "mu_w": ("float", 1.0),
        "lambda_u": ("float", 30.0),
        "lambda_w": ("float", 30.0),
        "family": ("str", "vortex"),
    },
    "method": {
        "name": ("str", "fes"),
        "preconditioner": ("str", "sobolev"),
        "residual_tol": ("float", _descent.residual_tol),
        "energy_tol": ("float", _descent.energy_tol),
        "value_tol": ("opt_float", None),
        "max_iters": ("int", _descent.max_iters),
        "rkf_initial_step": ("float", _descent.rkf_initial_step),
        "rkf_tol_start": ("float", _descent.rkf_tol_start),
        "rkf_tol_factor": ("float", _descent.rkf_tol_factor),
        "rkf_tol_floor": ("float", _descent.rkf_tol_floor),
        "max_norm_drift": ("float", _descent.max_norm_drift),
        "bracket_growth": ("float", _descent.bracket_growth),
        "golden_rel_width": ("float", _descent.golden_rel_width),
        "line_max_evals": ("int", _descent.line_max_evals),
        "stagnation_window": ("int", _descent.stagnation_window),
    },
    "output": {
        "dir": ("str", "out"),
        "timing": ("bool", True),
    },
}

_DESCENT_KEYS = ("residual_tol", "energy_tol", "value_tol", "max_iters", "rkf_initial_step", "rkf_tol_start",
                 "rkf_tol_factor", "rkf_tol_floor", "max_norm_drift", "bracket_growth", "golden_rel_width",
                 "line_max_evals", "stagnation_window")


def _format(kind: str, value) -> str:
    if value is None:
        return "none"
    if kind in ("ints", "floats"):
        return ",".join(repr(v) for v in value)
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("float", "opt_float"):
        return repr(float(value))
    return str(value)


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {s: {k: d for k, (_, d) in keys.items()}
                                                  for s, keys in SCHEMA.items()})

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def set(self, section: str, key: str, value) -> None:
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key [{section}] {key}")
        self.values[section][key] = value

    def descent(self) -> DescentConfig:
        m = self.values["method"]
        try:
            return DescentConfig(**{k: m[k] for k in _DESCENT_KEYS})
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return {s: dict(v) for s, v in self.values.items()}

    def to_text(self) -> str:
        lines = []
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key, (kind, _) in keys.items():
                lines.append(f"{key} = {_format(kind, self.values[section][key])}")
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        cfg = cls()
        for section, keys in data.items():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, value in keys.items():
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key [{section}] {key}")
                kind = SCHEMA[section][key][0]
                if kind in ("ints", "floats") and value is not None:
                    value = tuple(value)
                cfg.values[section][key] = value
        return cfg


def parse(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, strict=True, default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    cfg = RunConfig()
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key [{section}] {key}")
            kind = SCHEMA[section][key][0]
            try:
                cfg.values[section][key] = _CONVERT[kind](raw)
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from None
    return cfg


def load(path) -> RunConfig:
    """Read an INI config, or the resolved config stored in a ``report.json``."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if p.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad JSON in {path}: {exc}") from None
        return RunConfig.from_dict(data.get("config", data))
    return parse(text)
