"""Named analytic Beltrami coefficients.

Preset strings::

    constant:C                  C complex, e.g. ``constant:0.3`` or ``constant:0.2+0.1j``
    fourier:M,N,AMP             AMP * exp(2 pi i (M x1 + N x2))
    bump:CX,CY,RADIUS,HEIGHT    HEIGHT * exp(1 - 1/(1 - r^2/RADIUS^2)) inside the disk
    sum:P1|P2|...               pointwise sum of presets

``(x1, x2)`` are lattice coordinates on a torus grid and ``(x, y)`` on a
rectangular grid.
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from .grid import ComplexGrid, SampledField, TorusGrid

Preset = Callable[[ComplexGrid], np.ndarray]


def _coords(grid: ComplexGrid):
    if isinstance(grid, TorusGrid):
        return grid.coords
    p = grid.points
    return p.real, p.imag


def constant(c: complex) -> Preset:
    c = complex(c)
    return lambda grid: np.full(grid.shape, c, dtype=complex)


def fourier(m: int, n: int, amp: complex) -> Preset:
    def ev(grid):
        x1, x2 = _coords(grid)
        return amp * np.exp(2j * np.pi * (m * x1 + n * x2))

    return ev


def bump_profile(r2: np.ndarray) -> np.ndarray:
    """``exp(1 - 1/(1 - r2))`` for ``r2 < 1``, zero outside; equals 1 at the origin."""
    out = np.zeros_like(r2, dtype=float)
    inside = r2 < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    return out


def bump(center: complex, radius: float, height: complex) -> Preset:
    center = complex(center)
    if not radius > 0:
        raise ValueError(f"bump radius must be positive, got {radius}")

    def ev(grid):
        p = grid.points
        r2 = np.abs(p - center) ** 2 / radius**2
        return height * bump_profile(r2)

    return ev


def parse_preset(text: str) -> Preset:
    text = text.strip()
    name, _, args = text.partition(":")
    if name == "sum":
        parts = [parse_preset(t) for t in args.split("|")]
        return lambda grid: sum(p(grid) for p in parts)
    vals = [a.strip() for a in args.split(",")] if args else []
    try:
        if name == "constant" and len(vals) == 1:
            return constant(complex(vals[0]))
        if name == "fourier" and len(vals) == 3:
            return fourier(int(vals[0]), int(vals[1]), complex(vals[2]))
        if name == "bump" and len(vals) == 4:
            return bump(complex(float(vals[0]), float(vals[1])), float(vals[2]), complex(vals[3]))
    except ValueError as exc:
        raise ValueError(f"cannot parse preset {text!r}: {exc}") from None
    raise ValueError(f"unknown preset {text!r}")


def sample(preset: Preset | str, grid: ComplexGrid) -> SampledField:
    if isinstance(preset, str):
        preset = parse_preset(preset)
    return SampledField(grid, np.broadcast_to(preset(grid), grid.shape))
