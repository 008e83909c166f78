"""Experiment configuration: a sectioned key-value file read with configparser.

Sections ``[frequency]``, ``[perturbation]``, ``[run]`` and ``[output]``.
Unknown sections or keys are rejected, values are type-checked, and every
error names the offending ``section.key``.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import ConfigError


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


POSITIVE = "positive"
NONNEG = "nonnegative"

# section -> key -> (parser, default, constraint or allowed values)
SCHEMA: dict[str, dict[str, tuple[Callable, Any, Any]]] = {
    "frequency": {
        # golden | p/q | surd:a,b,d,c | cf:a1,a2,.. | decimal | growth
        "alpha": (str, "golden", None),
        "precision": (int, None, NONNEG),
        "growth": (str, "constant", ("constant", "log", "square")),
        "c": (float, 1.0, POSITIVE),
        "digit_budget": (int, 10_000, POSITIVE),
        # comma list; each entry a number, "alpha", or an alpha form
        "omega": (_str_list, ("1", "alpha"), None),
        "norm": (str, "l1", ("l1", "linf")),
    },
    "perturbation": {
        "preset": (str, "cos", ("zero", "cos", "sin")),
        "amplitude": (float, 1e-3, None),
        "mode": (_int_list, (1,), None),
        "s": (float, 0.1, NONNEG),
        "eps": (float, None, POSITIVE),
    },
    "run": {
        "depth": (int, 6, POSITIVE),
        "horizon": (int, 12, POSITIVE),
        "Q": (int, 20, POSITIVE),
        "N": (int, 4096, POSITIVE),
        "T": (float, 100.0, POSITIVE),
        "dt": (float, 1e-2, POSITIVE),
        "K": (int, 64, POSITIVE),
        "tol": (float, 1e-11, POSITIVE),
        "rot_tol": (float, 1e-5, POSITIVE),
        "max_iter": (int, 30, POSITIVE),
        "samples": (int, 2000, POSITIVE),
        "states": (int, 50, POSITIVE),
        "orbits": (int, 7, POSITIVE),
        "curvature": (float, 1.0, None),
        "scheme": (str, "rk4", ("rk4", "adaptive")),
        "scenario": (str, "hamiltonian", ("hamiltonian", "reparametrized")),
        "check_rotation": (_bool, True, None),
        "seed": (int, 0, NONNEG),
    },
    "output": {
        "directory": (str, "out", None),
        "formats": (_str_list, ("csv", "json", "svg"), None),
    },
}

FORMATS = ("csv", "json", "svg")


@dataclass
class ExperimentConfig:
    frequency: dict = field(default_factory=dict)
    perturbation: dict = field(default_factory=dict)
    run: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return getattr(self, name)


def _check(section: str, key: str, value: Any, rule: Any) -> None:
    if rule is None or value is None:
        return
    where = f"{section}.{key}"
    if rule == POSITIVE and not value > 0:
        raise ConfigError(f"{where} must be positive, got {value}")
    if rule == NONNEG and not value >= 0:
        raise ConfigError(f"{where} must be >= 0, got {value}")
    if isinstance(rule, tuple) and value not in rule:
        raise ConfigError(f"{where} must be one of {', '.join(rule)}, got {value!r}")


def parse_config(text: str = "", overrides: dict | None = None) -> ExperimentConfig:
    """Parse config text; ``overrides`` maps ``section.key`` to raw strings."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keys are case sensitive (Q, N, T, K)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    raw: dict[str, dict[str, str]] = {s: {} for s in SCHEMA}
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        for key, val in cp.items(sec):
            raw[sec][key] = val
    for dotted, val in (overrides or {}).items():
        sec, key = dotted.split(".", 1)
        raw[sec][key] = val
    cfg = ExperimentConfig()
    for sec, keys in SCHEMA.items():
        unknown = sorted(set(raw[sec]) - set(keys))
        if unknown:
            raise ConfigError(f"unknown key {sec}.{unknown[0]}")
        out = cfg.section(sec)
        for key, (parse, default, rule) in keys.items():
            if key in raw[sec]:
                try:
                    value = parse(raw[sec][key])
                except ValueError as exc:
                    raise ConfigError(f"{sec}.{key}: cannot parse {raw[sec][key]!r}") from exc
            else:
                value = default
            _check(sec, key, value, rule)
            out[key] = value
    bad = [f for f in cfg.output["formats"] if f not in FORMATS]
    if bad:
        raise ConfigError(f"output.formats: unknown format {bad[0]!r}")
    return cfg


def load_config(path: str | Path | None, overrides: dict | None = None) -> ExperimentConfig:
    if path is None:
        return parse_config("", overrides)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    return parse_config(p.read_text(), overrides)
