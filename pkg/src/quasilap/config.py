"""Experiment configuration: an INI file with a schema version.

Example::

    [experiment]
    schema = 1
    name = det-sweep
    seed = 0

    [grid]
    modulus = 0.3+1.1j
    N = 32

    [beltrami]
    mu = fourier:1,0,0.1
    nu = fourier:1,0,0.1
    mu1 = fourier:1,0,0.05
    nu1 = fourier:1,0,0.05
    tol = 1e-12

    [sweep]
    eps = 0.01, 0.02, 0.04
    h = 1e-3
    theta = 3.141592653589793
    rho =

    [output]
    dir = runs/det
    format = csv
"""
from __future__ import annotations

import configparser
import hashlib
import json
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .presets import parse_preset

SCHEMA = 1
EXPERIMENTS = ("torus-det", "beltrami-solve", "symbol-angle", "det-sweep", "potential-verify", "holomorphy-check")
FORMATS = ("csv", "json")
MAX_N = 512


class ConfigError(ValueError):
    pass


_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_TERM = re.compile(rf"([+-]?)({_NUM}(?:/{_NUM})?)?(j?)(?:/({_NUM}))?")


def parse_complex(text) -> complex:
    """Sum of real and imaginary terms; ``i`` or ``j`` marks the imaginary unit.

    Accepts ``"i"``, ``"2i"``, ``"i/2"``, ``"1/2+i"``, ``"1/3+2i"``, ``"0.3+1.1j"``.
    """
    if isinstance(text, (int, float, complex)):
        return complex(text)
    t = str(text).strip().replace(" ", "").replace("i", "j")
    if not t:
        raise ConfigError("empty complex number")
    total = 0j
    pos = 0
    while pos < len(t):
        m = _TERM.match(t, pos)
        if not m or m.end() == pos or (m.group(2) is None and not m.group(3)):
            raise ConfigError(f"cannot parse complex number {text!r}")
        sign, num, imag, div = m.groups()
        if pos > 0 and not sign:
            raise ConfigError(f"cannot parse complex number {text!r}")
        if div is not None and not imag:
            raise ConfigError(f"cannot parse complex number {text!r}")
        if num is None:
            val = 1.0
        elif "/" in num:
            a, b = num.split("/")
            val = float(a) / float(b)
        else:
            val = float(num)
        if div is not None:
            val /= float(div)
        val = -val if sign == "-" else val
        total += 1j * val if imag else val
        pos = m.end()
    return total


@dataclass
class ExperimentConfig:
    name: str
    modulus: complex = 1j
    N: int = 32
    mu: str = "constant:0"
    nu: str = "constant:0"
    mu1: str = "constant:0"
    nu1: str = "constant:0"
    tol: float = 1e-12
    eps: list = field(default_factory=lambda: [0.01, 0.02, 0.04])
    h: list = field(default_factory=lambda: [1e-3])
    theta: float = 3.141592653589793
    rho: Optional[float] = None
    out: str = "quasilap-out"
    format: str = "json"
    seed: int = 0
    jobs: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.name not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.name!r}")
        for key in ("mu", "nu", "mu1", "nu1"):
            try:
                parse_preset(getattr(self, key))
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        if self.tol <= 0 or any(x <= 0 for x in self.h):
            raise ConfigError("tolerances and step sizes must be positive")
        if any(e < 0 for e in self.eps):
            raise ConfigError("eps values must be nonnegative")
        if not (4 <= self.N <= MAX_N and self.N % 2 == 0):
            raise ConfigError(f"N = {self.N} unsupported (even, 4..{MAX_N})")
        if self.modulus.imag <= 0:
            raise ConfigError("modulus needs Im > 0")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.rho is not None and self.rho <= 0:
            raise ConfigError("rho must be positive")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["modulus"] = [self.modulus.real, self.modulus.imag]
        return d

    def digest(self) -> str:
        d = self.to_dict()
        d.pop("out")
        d.pop("jobs")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def output_dir(self) -> Path:
        return Path(self.out)


def _floats(text: str) -> list:
    return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    try:
        if not cp.read(path):
            raise ConfigError(f"cannot read {path}")
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    try:
        schema = cp.getint("experiment", "schema")
    except (configparser.Error, ValueError):
        raise ConfigError("missing or invalid [experiment] schema") from None
    if schema != SCHEMA:
        raise ConfigError(f"schema {schema} unsupported (expected {SCHEMA})")
    get = lambda sec, key, default=None: cp.get(sec, key, fallback=default)  # noqa: E731
    try:
        cfg = ExperimentConfig(name=get("experiment", "name", ""))
        cfg.seed = int(get("experiment", "seed", "0"))
        cfg.modulus = parse_complex(get("grid", "modulus", "i"))
        cfg.N = int(get("grid", "N", "32"))
        for key in ("mu", "nu", "mu1", "nu1"):
            setattr(cfg, key, get("beltrami", key, getattr(cfg, key)))
        cfg.tol = float(get("beltrami", "tol", "1e-12"))
        if get("sweep", "eps"):
            cfg.eps = _floats(get("sweep", "eps"))
        if get("sweep", "h"):
            cfg.h = _floats(get("sweep", "h"))
        cfg.theta = float(get("sweep", "theta", str(cfg.theta)))
        rho = get("sweep", "rho", "")
        cfg.rho = float(rho) if rho and rho.strip() else None
        cfg.out = get("output", "dir", cfg.out)
        cfg.format = get("output", "format", cfg.format)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()


def resolve_out(flag: Optional[str], cfg_value: Optional[str]) -> Path:
    """Output directory: explicit flag, then ``QUASILAP_OUT``, then the config value."""
    if flag:
        return Path(flag)
    env = os.environ.get("QUASILAP_OUT")
    if env:
        return Path(env)
    return Path(cfg_value or "quasilap-out")
