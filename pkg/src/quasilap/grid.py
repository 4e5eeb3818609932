"""Complex sample grids, Cauchy-Riemann derivatives and finite-difference probes.

Two grid kinds are supported:

* :class:`TorusGrid` -- the ``N x N`` lattice ``{(j + k z)/N}`` on the flat torus
  ``C / (Z + zZ)``.  Derivatives are Fourier-collocation derivatives, exact on
  trigonometric polynomials resolved by the grid.
* :class:`RectGrid` -- a uniform rectangular grid in the plane (used for the
  upper-half-plane windows and for compactly supported coefficients).
  Derivatives are 4th-order finite differences with one-sided closure.

Arrays are indexed ``values[j, k]`` with ``j`` running along the first
generator (the real direction for rectangles) and ``k`` along the second.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

__all__ = [
    "LatticeSpec",
    "CompactWindow",
    "TorusGrid",
    "RectGrid",
    "ComplexGrid",
    "SampledField",
    "make_torus_grid",
    "make_rect_grid",
    "torus_multipliers",
    "spectral_derivative",
    "fd_derivative",
    "derivative",
    "cr_residual",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Lattice ``Z + zZ`` with modulus ``z`` in the upper half plane."""

    modulus: complex

    def __post_init__(self):
        z = complex(self.modulus)
        if not np.isfinite(z) or z.imag <= 0:
            raise ValueError(f"lattice modulus must satisfy Im z > 0, got {z!r}")
        object.__setattr__(self, "modulus", z)

    @property
    def area(self) -> float:
        return self.modulus.imag

    @property
    def basis(self) -> np.ndarray:
        """Rows are the two periods as real 2-vectors."""
        z = self.modulus
        return np.array([[1.0, 0.0], [z.real, z.imag]])

    @property
    def dual_basis(self) -> np.ndarray:
        """Rows ``k1, k2`` with ``<k_a, omega_b> = delta_ab``."""
        return np.linalg.inv(self.basis).T


@dataclass(frozen=True)
class CompactWindow:
    """Closed rectangle ``[x0, x1] x [y0, y1]`` in H plus a margin.

    The margin plays the role of the neighbourhood ``Q`` containing the window;
    norms "over Q" are taken over the window enlarged by ``margin``.
    """

    x0: float
    x1: float
    y0: float
    y1: float
    margin: float = 0.25

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("empty window")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.y0 - self.margin <= 0:
            raise ValueError("window and its margin must lie in Im z > 0")

    def contains(self, p, enlarged: bool = False):
        m = self.margin if enlarged else 0.0
        p = np.asarray(p)
        return (
            (p.real >= self.x0 - m)
            & (p.real <= self.x1 + m)
            & (p.imag >= self.y0 - m)
            & (p.imag <= self.y1 + m)
        )


@dataclass(frozen=True)
class TorusGrid:
    lattice: LatticeSpec
    N: int

    kind = "torus"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 4:
            raise ValueError(f"torus grid needs N >= 4, got {self.N}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    @property
    def modulus(self) -> complex:
        return self.lattice.modulus

    @property
    def points(self) -> np.ndarray:
        j = np.arange(self.N)
        x1, x2 = np.meshgrid(j / self.N, j / self.N, indexing="ij")
        return x1 + x2 * self.modulus

    @property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Lattice coordinates ``(x1, x2)`` in ``[0, 1)``."""
        j = np.arange(self.N) / self.N
        return tuple(np.meshgrid(j, j, indexing="ij"))

    @property
    def cell_area(self) -> float:
        return self.lattice.area / self.N**2


@dataclass(frozen=True)
class RectGrid:
    """Uniform grid ``x0 + j h + i (y0 + k h)``, ``0 <= j < nx``, ``0 <= k < ny``."""

    x0: float
    y0: float
    h: float
    nx: int
    ny: int

    kind = "rect"

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("grid spacing must be positive")
        if min(self.nx, self.ny) < 5:
            raise ValueError("rectangular grid needs at least 5 points per direction")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def points(self) -> np.ndarray:
        x = self.x0 + self.h * np.arange(self.nx)
        y = self.y0 + self.h * np.arange(self.ny)
        X, Y = np.meshgrid(x, y, indexing="ij")
        return X + 1j * Y

    @property
    def cell_area(self) -> float:
        return self.h**2

    def index_of(self, p: complex) -> tuple[int, int]:
        """Index of the node at ``p``; raises if ``p`` is not a node."""
        j = (p.real - self.x0) / self.h
        k = (p.imag - self.y0) / self.h
        jr, kr = int(round(j)), int(round(k))
        if abs(j - jr) > 1e-9 or abs(k - kr) > 1e-9 or not (0 <= jr < self.nx and 0 <= kr < self.ny):
            raise ValueError(f"{p} is not a grid node")
        return jr, kr

    def subgrid(self, window: CompactWindow, enlarged: bool = False) -> tuple["RectGrid", tuple[slice, slice]]:
        """Nodes of this grid inside ``window``; returns the subgrid and the slices."""
        m = window.margin if enlarged else 0.0
        x = self.x0 + self.h * np.arange(self.nx)
        y = self.y0 + self.h * np.arange(self.ny)
        jx = np.nonzero((x >= window.x0 - m - 1e-12) & (x <= window.x1 + m + 1e-12))[0]
        ky = np.nonzero((y >= window.y0 - m - 1e-12) & (y <= window.y1 + m + 1e-12))[0]
        if len(jx) < 5 or len(ky) < 5:
            raise ValueError("window is not resolved by the grid")
        sl = (slice(jx[0], jx[-1] + 1), slice(ky[0], ky[-1] + 1))
        sub = RectGrid(float(x[jx[0]]), float(y[ky[0]]), self.h, len(jx), len(ky))
        return sub, sl

    @property
    def is_conjugation_symmetric(self) -> bool:
        return abs(self.y0 + self.h * (self.ny - 1) / 2) < 1e-12 * max(1.0, abs(self.y0))


ComplexGrid = Union[TorusGrid, RectGrid]


@dataclass(frozen=True)
class SampledField:
    grid: ComplexGrid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("sampled field has non-finite values")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "SampledField":
        return SampledField(self.grid, values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    @classmethod
    def from_function(cls, grid: ComplexGrid, fn: Callable[[np.ndarray], np.ndarray]) -> "SampledField":
        return cls(grid, np.broadcast_to(fn(grid.points), grid.shape))


def make_torus_grid(z: complex, N: int) -> TorusGrid:
    return TorusGrid(LatticeSpec(z), N)


def make_rect_grid(half_width: float, h: float) -> RectGrid:
    """Grid on ``[-L, L]^2`` symmetric under conjugation, containing 0 and 1."""
    n = int(round(half_width / h))
    if abs(n * h - half_width) > 1e-9 * half_width:
        raise ValueError("half_width must be a multiple of the spacing")
    if abs(round(1.0 / h) * h - 1.0) > 1e-12:
        raise ValueError("spacing must divide 1 so that 0 and 1 are nodes")
    return RectGrid(-n * h, -n * h, h, 2 * n + 1, 2 * n + 1)


# --------------------------------------------------------------------------
# torus: Fourier collocation


def _frequencies(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, d=1.0 / N)


def torus_multipliers(grid: TorusGrid, zero_nyquist: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Fourier multipliers of ``d`` and ``dbar`` on the lattice grid.

    Mode ``(m, n)`` is ``exp(2 pi i (m x1 + n x2))``.  With ``x = x1 + x2 Re z``
    and ``y = x2 Im z`` one has ``d_x = d_{x1}`` and
    ``d_y = (d_{x2} - Re z d_{x1}) / Im z``.
    """
    z = grid.modulus
    m = _frequencies(grid.N)
    M, Nn = np.meshgrid(m, m, indexing="ij")
    dx = 2j * np.pi * M
    dy = 2j * np.pi * (Nn - z.real * M) / z.imag
    if zero_nyquist and grid.N % 2 == 0:
        nyq = (np.abs(M) == grid.N // 2) | (np.abs(Nn) == grid.N // 2)
        dx = np.where(nyq, 0.0, dx)
        dy = np.where(nyq, 0.0, dy)
    return 0.5 * (dx - 1j * dy), 0.5 * (dx + 1j * dy)


_ORDERS = {
    "d": (1, 0),
    "dbar": (0, 1),
    "dd": (2, 0),
    "ddbar": (1, 1),
    "dbardbar": (0, 2),
}


def spectral_derivative(f: SampledField, which: str) -> SampledField:
    """Fourier-collocation Cauchy-Riemann derivative on a torus grid.

    ``which`` is one of ``"d"``, ``"dbar"``, ``"dd"``, ``"ddbar"``,
    ``"dbardbar"``.  First derivatives drop the Nyquist modes (so real fields
    keep ``dbar f = conj(d f)``); second derivatives use the full multipliers so
    the only common kernel of the second-order operators is the constants.
    """
    if not isinstance(f.grid, TorusGrid):
        raise TypeError("spectral derivatives need a doubly periodic (torus) grid; use fd_derivative")
    try:
        a, b = _ORDERS[which]
    except KeyError:
        raise ValueError(f"unknown derivative {which!r}") from None
    d, db = torus_multipliers(f.grid, zero_nyquist=(a + b == 1))
    mult = d**a * db**b
    return f.with_values(np.fft.ifft2(mult * np.fft.fft2(f.values)))


# --------------------------------------------------------------------------
# rectangles: 4th-order finite differences

_C1 = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_C2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
# one-sided 4th-order stencils on 6 points for the first two / last two nodes
_L1 = {
    0: np.array([-25.0, 48.0, -36.0, 16.0, -3.0, 0.0]) / 12.0,
    1: np.array([-3.0, -10.0, 18.0, -6.0, 1.0, 0.0]) / 12.0,
}
_L2 = {
    0: np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0,
    1: np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0,
}


def _diff_axis(v: np.ndarray, h: float, axis: int, order: int) -> np.ndarray:
    v = np.moveaxis(v, axis, 0)
    n = v.shape[0]
    out = np.empty_like(v)
    c = _C1 if order == 1 else _C2
    out[2:-2] = sum(c[i] * v[i : n - 4 + i] for i in range(5))
    left = _L1 if order == 1 else _L2
    for r in (0, 1):
        out[r] = np.tensordot(left[r], v[:6], axes=(0, 0))
        # mirror stencil: odd derivative changes sign
        sgn = -1.0 if order == 1 else 1.0
        out[n - 1 - r] = sgn * np.tensordot(left[r], v[::-1][:6], axes=(0, 0))
    return np.moveaxis(out / h**order, 0, axis)


def fd_derivative(f: SampledField, which: str) -> SampledField:
    """4th-order finite-difference Cauchy-Riemann derivative on a rectangle."""
    if not isinstance(f.grid, RectGrid):
        raise TypeError("fd_derivative needs a rectangular grid")
    if which not in _ORDERS:
        raise ValueError(f"unknown derivative {which!r}")
    v, h = f.values, f.grid.h
    if which in ("d", "dbar"):
        fx = _diff_axis(v, h, 0, 1)
        fy = _diff_axis(v, h, 1, 1)
        s = -1j if which == "d" else 1j
        return f.with_values(0.5 * (fx + s * fy))
    fxx = _diff_axis(v, h, 0, 2)
    fyy = _diff_axis(v, h, 1, 2)
    if which == "ddbar":
        return f.with_values(0.25 * (fxx + fyy))
    fxy = _diff_axis(_diff_axis(v, h, 0, 1), h, 1, 1)
    s = -1.0 if which == "dd" else 1.0
    # d^2 = (f_xx - f_yy - 2i f_xy)/4, dbar^2 = (f_xx - f_yy + 2i f_xy)/4
    return f.with_values(0.25 * (fxx - fyy + 2j * s * fxy))


def derivative(f: SampledField, which: str) -> SampledField:
    """Dispatch to the spectral (torus) or finite-difference (rectangle) derivative."""
    if isinstance(f.grid, TorusGrid):
        return spectral_derivative(f, which)
    return fd_derivative(f, which)


def cr_residual(F: Callable[[complex], complex], s0: complex, h: float) -> float:
    """Central-difference estimate of ``|dbar_s F(s0)|``.

    ``dbar = (d_x + i d_y)/2``, so this is half of
    ``|(F(s0+h) - F(s0-h))/2h + i (F(s0+ih) - F(s0-ih))/2h|``.  It vanishes up
    to ``O(h^2)`` for holomorphic ``F``.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    s0 = complex(s0)
    fx = (F(s0 + h) - F(s0 - h)) / (2 * h)
    fy = (F(s0 + 1j * h) - F(s0 - 1j * h)) / (2 * h)
    return float(abs(fx + 1j * fy)) / 2
