"""Normalized solutions of Beltrami equations.

Both solvers run the classical fixed-point iteration on the derivative level,
``h = mu (1 + S h)`` with ``h = dbar f`` and ``S`` the Beurling transform,
which contracts with rate ``sup|mu| < 1`` because ``S`` is an L^2 isometry.

Torus
    ``S`` is the Fourier multiplier ``d / dbar`` in lattice modes.  The solution
    is ``f(p) = p + b conj(p) + g(p)`` with ``b = mean(h)`` and ``g`` periodic;
    after dividing by ``1 + b`` it maps ``Z + zZ`` onto ``Z + z'Z``.

Plane
    ``h`` is compactly supported in the sampling box.  The Cauchy transform is a
    convolution with the kernel ``1/(pi z)`` truncated to a disk of radius
    ``L`` larger than the box diameter; the truncated kernel has the closed form
    Fourier transform ``-2i (1 - J0(|xi| L)) / xi`` so zero-padded FFTs give the
    free-space transform to spectral accuracy.  ``f = z + C h`` is then
    composed with the affine map fixing 0 and 1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import fft as sfft
from scipy.interpolate import LinearNDInterpolator
from scipy.special import j0

from .grid import (
    CompactWindow,
    LatticeSpec,
    RectGrid,
    SampledField,
    TorusGrid,
    derivative,
    make_rect_grid,
    torus_multipliers,
)
from .presets import bump_profile

log = logging.getLogger(__name__)

SUPPORTS = ("doubly-periodic", "compact", "window")


class SolverDivergence(RuntimeError):
    """The fixed-point iteration stopped improving above the tolerance."""


# --------------------------------------------------------------------------
# data types


def c2_norm(f: SampledField, mask: Optional[np.ndarray] = None) -> float:
    """Discrete C^2 surrogate: max of value, first and second derivatives."""
    parts = [f.values] + [derivative(f, w).values for w in ("d", "dbar", "dd", "ddbar", "dbardbar")]
    if mask is None:
        return float(max(np.max(np.abs(p)) for p in parts))
    return float(max(np.max(np.abs(p[mask])) for p in parts))


@dataclass(frozen=True)
class BeltramiCoefficient:
    field: SampledField
    k: float
    E: float
    support: str
    radius: Optional[float] = None

    def __post_init__(self):
        if self.support not in SUPPORTS:
            raise ValueError(f"support must be one of {SUPPORTS}")
        if self.support == "doubly-periodic" and not isinstance(self.field.grid, TorusGrid):
            raise ValueError("doubly periodic coefficients live on torus grids")
        if self.support != "doubly-periodic" and isinstance(self.field.grid, TorusGrid):
            raise ValueError("torus grids carry doubly periodic coefficients")
        if not self.k < 1:
            raise ValueError(f"need sup|mu| <= k < 1, got k = {self.k}")
        if self.field.sup() > self.k:
            raise ValueError("certified bound k is below the sampled sup|mu|")

    @classmethod
    def from_field(cls, f: SampledField, support: Optional[str] = None, radius=None) -> "BeltramiCoefficient":
        if support is None:
            support = "doubly-periodic" if isinstance(f.grid, TorusGrid) else "compact"
        k = f.sup()
        if not k < 1:
            raise ValueError(f"sup|mu| = {k} is not < 1")
        return cls(f, k, c2_norm(f), support, radius)

    @property
    def grid(self):
        return self.field.grid

    @property
    def values(self) -> np.ndarray:
        return self.field.values


@dataclass(frozen=True)
class QuasiconformalMap:
    map_values: SampledField
    d_values: SampledField
    dbar_values: SampledField
    normalization: dict
    residual: float
    iterations: int
    # torus maps keep their periodic part for evaluation off the grid
    _torus: Optional[dict] = field(default=None, repr=False, compare=False)

    @property
    def grid(self):
        return self.map_values.grid

    def certificate(self) -> dict:
        return {
            "residual": self.residual,
            "min_abs_partial": min_abs_partial(self),
            "iterations": self.iterations,
        }

    def evaluate(self, p) -> np.ndarray:
        """Value at arbitrary points (torus maps only; spectral interpolation)."""
        return self._eval(p)[0]

    def _eval(self, p):
        if self._torus is None:
            raise TypeError("off-grid evaluation is only available for torus maps")
        t = self._torus
        p = np.asarray(p, dtype=complex)
        g, gd, gdb = _trig_eval(t["grid"], t["ghat"], p, derivatives=True)
        b, s = t["b"], t["scale"]
        val = (p + b * np.conj(p) + g - t["g0"]) / s
        return val, (1 + gd) / s, (b + gdb) / s


def _trig_eval(grid: TorusGrid, fhat: np.ndarray, p: np.ndarray, derivatives=False):
    """Evaluate the trigonometric interpolant with coefficients ``fft2(values)``."""
    z = grid.modulus
    x2 = p.imag / z.imag
    x1 = p.real - x2 * z.real
    m = np.fft.fftfreq(grid.N, d=1.0 / grid.N)
    E1 = np.exp(2j * np.pi * np.outer(m, x1.ravel()))
    E2 = np.exp(2j * np.pi * np.outer(m, x2.ravel()))
    scale = 1.0 / grid.N**2

    def ev(coef):
        return (np.einsum("mp,mp->p", coef @ E2, E1) * scale).reshape(p.shape)

    if not derivatives:
        return ev(fhat)
    d, db = torus_multipliers(grid)
    return ev(fhat), ev(d * fhat), ev(db * fhat)


# --------------------------------------------------------------------------
# fixed-point iteration


def _iterate(step, h0, tol, maxiter, stall):
    """Run ``h <- step(h)`` until ``max|step(h) - h| <= tol``."""
    h = h0
    best = np.inf
    since_best = 0
    for it in range(1, maxiter + 1):
        hn = step(h)
        res = float(np.max(np.abs(hn - h)))
        h = hn
        if res <= tol:
            return h, it, res
        if res < 0.999 * best:
            best, since_best = res, 0
        else:
            since_best += 1
            if since_best >= stall:
                raise SolverDivergence(f"residual stagnated at {best:.3e} > {tol:.1e} for {stall} iterations")
    raise SolverDivergence(f"no convergence in {maxiter} iterations (residual {res:.3e})")


# --------------------------------------------------------------------------
# torus solver


def solve_torus(mu: BeltramiCoefficient, tol: float = 1e-12, maxiter: int = 2000, stall: int = 50) -> QuasiconformalMap:
    grid = mu.grid
    d, db = torus_multipliers(grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(db == 0, 0.0, d / db)
        inv_db = np.where(db == 0, 0.0, 1.0 / db)
    m = mu.values

    def step(h):
        return m * (1 + np.fft.ifft2(S * np.fft.fft2(h)))

    # iterate to a fraction of tol so the recomputed certificate stays below it
    h, iters, _ = _iterate(step, m.copy(), tol * 0.1 * (1 - mu.k), maxiter, stall)
    b = h.mean()
    ghat = inv_db * np.fft.fft2(h - b)
    g = np.fft.ifft2(ghat)
    scale = 1 + b
    p = grid.points
    F = (p + b * np.conj(p) + g - g[0, 0]) / scale

    # certificate from the sampled periodic part
    ghat2 = np.fft.fft2(g)
    dF = (1 + np.fft.ifft2(d * ghat2)) / scale
    dbF = (b + np.fft.ifft2(db * ghat2)) / scale
    residual = float(np.max(np.abs(dbF - m * dF)))

    zp = (grid.modulus + b * np.conj(grid.modulus)) / scale
    norm = {"kind": "lattice", "periods": [1.0, complex(zp)], "z_prime": complex(zp), "b": complex(b)}
    return QuasiconformalMap(
        SampledField(grid, F),
        SampledField(grid, dF),
        SampledField(grid, dbF),
        norm,
        residual,
        iters,
        {"grid": grid, "ghat": ghat2, "g0": g[0, 0], "b": b, "scale": scale},
    )


# --------------------------------------------------------------------------
# plane solver


@dataclass(frozen=True)
class PlaneSolverConfig:
    """Sampling box ``[-half_width, half_width]^2`` and cutoff radii for ``f_{mu,nu}``."""

    half_width: float = 4.0
    spacing: float = 1.0 / 16
    cutoff_inner: float = 2.5
    cutoff_outer: float = 3.75
    p: float = 3.0  # Ahlfors-Bers exponent, any p > 2 with C_p k < 1

    def grid(self) -> RectGrid:
        return make_rect_grid(self.half_width, self.spacing)


@lru_cache(maxsize=8)
def _plane_kernels(nx: int, ny: int, h: float):
    diam = h * np.hypot(nx - 1, ny - 1)
    L = diam + 2 * h
    P = sfft.next_fast_len(int(np.ceil(2 * L / h)) + 3)
    if P % 2 == 0:
        P += 1
        while sfft.next_fast_len(P) != P:
            P += 2
    xi = 2 * np.pi * np.fft.fftfreq(P, d=h)
    X1, X2 = np.meshgrid(xi, xi, indexing="ij")
    xc = X1 + 1j * X2
    r = np.abs(xc)
    with np.errstate(divide="ignore", invalid="ignore"):
        cauchy = np.where(r == 0, 0.0, -2j * (1 - j0(r * L)) / xc)
        beurling = np.where(r == 0, 0.0, (np.conj(xc) / xc) * (1 - j0(r * L)))
    return P, cauchy, beurling


class _PlaneOps:
    def __init__(self, grid: RectGrid):
        self.grid = grid
        self.P, self.K, self.S = _plane_kernels(grid.nx, grid.ny, grid.h)

    def _conv(self, mult, v):
        out = sfft.ifft2(mult * sfft.fft2(v, s=(self.P, self.P)))
        return out[: self.grid.nx, : self.grid.ny]

    def cauchy(self, v):
        return self._conv(self.K, v)

    def beurling(self, v):
        return self._conv(self.S, v)


def _check_compact(values: np.ndarray, what: str):
    edge = np.concatenate([values[:2].ravel(), values[-2:].ravel(), values[:, :2].ravel(), values[:, -2:].ravel()])
    if np.max(np.abs(edge)) > 1e-12:
        raise ValueError(f"{what} does not vanish at the edge of the sampling box")


def _plane_solve(grid: RectGrid, m: np.ndarray, k: float, tol, maxiter, stall, sigma=None):
    ops = _PlaneOps(grid)
    src = m if sigma is None else sigma

    def step(h):
        return src + m * ops.beurling(h) if sigma is not None else m * (1 + ops.beurling(h))

    h, iters, _ = _iterate(step, src.astype(complex), tol * 0.1 * (1 - k), maxiter, stall)
    Sh = ops.beurling(h)
    if sigma is None:
        residual = float(np.max(np.abs(h - m * (1 + Sh))))
    else:
        residual = float(np.max(np.abs(h - m * Sh - sigma)))
    return ops, h, Sh, iters, residual


def solve_plane(mu: BeltramiCoefficient, tol: float = 1e-12, maxiter: int = 2000, stall: int = 50) -> QuasiconformalMap:
    """Normalized solution (fixing 0, 1, infinity) for compactly supported ``mu``."""
    grid = mu.grid
    _check_compact(mu.values, "mu")
    return _normalized_plane_map(grid, mu.values, mu.k, tol, maxiter, stall)


def _normalized_plane_map(grid, m, k, tol, maxiter, stall):
    ops, h, Sh, iters, residual = _plane_solve(grid, m, k, tol, maxiter, stall)
    p = grid.points
    f = p + ops.cauchy(h)
    f0 = f[grid.index_of(0j)]
    f1 = f[grid.index_of(1 + 0j)]
    s = f1 - f0
    F = (f - f0) / s
    return QuasiconformalMap(
        SampledField(grid, F),
        SampledField(grid, (1 + Sh) / s),
        SampledField(grid, h / s),
        {"kind": "three-point", "fixed": [0, 1, "inf"]},
        residual / abs(s),
        iters,
    )


def solve_wmu(mu: BeltramiCoefficient, tol: float = 1e-12, maxiter: int = 2000, stall: int = 50) -> QuasiconformalMap:
    """Normalized quasiconformal map with Beltrami coefficient ``mu``."""
    if mu.support == "doubly-periodic":
        return solve_torus(mu, tol, maxiter, stall)
    if mu.support == "compact":
        return solve_plane(mu, tol, maxiter, stall)
    raise ValueError("window-supported coefficients are solved through solve_fmn")


def solve_wmusigma(mu: BeltramiCoefficient, sigma: SampledField, tol: float = 1e-12, maxiter=2000, stall=50) -> QuasiconformalMap:
    """Solution of ``dbar w - mu d w = sigma`` with ``w(0) = 0`` and ``d w`` in L^p."""
    grid = mu.grid
    if not isinstance(grid, RectGrid) or sigma.grid != grid:
        raise ValueError("mu and sigma must share one rectangular grid")
    _check_compact(mu.values, "mu")
    _check_compact(sigma.values, "sigma")
    ops, h, Sh, iters, residual = _plane_solve(grid, mu.values, mu.k, tol, maxiter, stall, sigma=sigma.values)
    w = ops.cauchy(h)
    w = w - w[grid.index_of(0j)]
    return QuasiconformalMap(
        SampledField(grid, w),
        SampledField(grid, Sh),
        SampledField(grid, h),
        {"kind": "inhomogeneous", "w(0)": 0},
        residual,
        iters,
    )


def smooth_cutoff(r: np.ndarray, inner: float, outer: float) -> np.ndarray:
    """C-infinity radial cutoff: 1 for ``r <= inner``, 0 for ``r >= outer``."""
    t = np.clip((np.asarray(r, dtype=float) - inner) / (outer - inner), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
        b = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return a / (a + b)


def reflected_coefficient(mu: np.ndarray, nu: np.ndarray, grid: RectGrid) -> np.ndarray:
    """``mu`` on Im z > 0, ``conj(nu(conj z))`` on Im z < 0, their mean on R."""
    if not grid.is_conjugation_symmetric:
        raise ValueError("f_{mu,nu} needs a grid symmetric under conjugation")
    y = grid.points.imag
    nu_hat = np.conj(nu[:, ::-1])
    out = np.where(y > 0, mu, nu_hat)
    on_axis = np.abs(y) < 0.5 * grid.h
    return np.where(on_axis, 0.5 * (mu + nu_hat), out)


def solve_fmn(
    mu: BeltramiCoefficient,
    nu: BeltramiCoefficient,
    tol: float = 1e-12,
    config: PlaneSolverConfig = PlaneSolverConfig(),
    maxiter: int = 2000,
    stall: int = 50,
) -> QuasiconformalMap:
    """Normalized solution with coefficient ``mu`` on H and ``nu-hat`` on the lower half plane.

    Both coefficients are multiplied by a smooth radial cutoff so the assembled
    plane coefficient is compactly supported in the sampling box.
    """
    grid = mu.grid
    if nu.grid != grid or not isinstance(grid, RectGrid):
        raise ValueError("mu and nu must share one rectangular grid")
    cut = smooth_cutoff(np.abs(grid.points), config.cutoff_inner, config.cutoff_outer)
    m = cut * reflected_coefficient(mu.values, nu.values, grid)
    k = max(mu.k, nu.k)
    out = _normalized_plane_map(grid, m, k, tol, maxiter, stall)
    out.normalization["coefficient"] = "reflected"
    return out


def fmn_pair(mu, nu, tol=1e-12, config: PlaneSolverConfig = PlaneSolverConfig()):
    """``(f_{mu,nu}, f_{nu,mu})`` on the plane or ``(w^mu, w^nu)`` on the torus."""
    if isinstance(mu.grid, TorusGrid):
        fm = solve_torus(mu, tol)
        fn = fm if nu is mu else solve_torus(nu, tol)
        return fm, fn
    fmn = solve_fmn(mu, nu, tol, config)
    fnm = fmn if nu is mu else solve_fmn(nu, mu, tol, config)
    return fmn, fnm


# --------------------------------------------------------------------------
# inverse maps


def inverse_map(w: QuasiconformalMap, mu: BeltramiCoefficient, newton_tol: float = 1e-13) -> BeltramiCoefficient:
    """Beltrami coefficient of the inverse map, ``(-mu dw/conj(dw)) o w^{-1}``.

    Torus maps are inverted by Newton iteration on the spectral interpolant and
    the result lives on the image torus ``Z + z'Z``.  Plane maps use barycentric
    interpolation on the Delaunay triangulation of the image samples.
    """
    ratio = -mu.values * w.d_values.values / np.conj(w.d_values.values)
    grid = w.grid
    if isinstance(grid, TorusGrid):
        zp = w.normalization["z_prime"]
        target = TorusGrid(LatticeSpec(zp), grid.N)
        q = target.points
        b = w._torus["b"]
        u = (1 + b) * q
        p = (u - b * np.conj(u)) / (1 - abs(b) ** 2)
        for _ in range(60):
            val, dF, dbF = w._eval(p)
            r = q - val
            step = (np.conj(dF) * r - dbF * np.conj(r)) / (np.abs(dF) ** 2 - np.abs(dbF) ** 2)
            p = p + step
            if np.max(np.abs(step)) < newton_tol:
                break
        else:
            raise RuntimeError("Newton inversion of the torus map did not converge")
        mu_hat = np.fft.fft2(mu.values)
        mu_p = _trig_eval(grid, mu_hat, p)
        _, dF, _ = w._eval(p)
        vals = -mu_p * dF / np.conj(dF)
        return BeltramiCoefficient.from_field(SampledField(target, vals), "doubly-periodic")

    img = w.map_values.values.ravel()
    pts = np.column_stack([img.real, img.imag])
    interp = LinearNDInterpolator(pts, ratio.ravel(), fill_value=np.nan)
    q = grid.points
    vals = interp(q.real, q.imag)
    outside = ~np.isfinite(vals)
    if np.any(outside):
        # outside the image hull mu must vanish (compact support)
        edge = np.abs(mu.values)[np.abs(grid.points).max() - np.abs(grid.points) < 4 * grid.h]
        if edge.size and edge.max() > 1e-12:
            raise ValueError("image triangulation does not cover the support of mu")
        vals = np.where(outside, 0.0, vals)
    return BeltramiCoefficient.from_field(SampledField(grid, vals), "compact")


# --------------------------------------------------------------------------
# estimate verifiers


def stability_gap(mu: BeltramiCoefficient, nu: BeltramiCoefficient, tol: float = 1e-12, radius: Optional[float] = None) -> float:
    """``sup |w^mu - w^nu| / sup |mu - nu|`` over samples (in the disk of ``radius``)."""
    diff = float(np.max(np.abs(mu.values - nu.values)))
    if diff == 0:
        return 0.0
    a, b = solve_wmu(mu, tol), solve_wmu(nu, tol)
    gap = np.abs(a.map_values.values - b.map_values.values)
    if radius is not None:
        gap = gap[np.abs(mu.grid.points) <= radius]
    return float(np.max(gap)) / diff


def min_abs_partial(w: QuasiconformalMap, window: Optional[CompactWindow] = None, margin: int = 0) -> float:
    """``inf |d w|`` over interior samples; flags a failed solve when not positive."""
    d = np.abs(w.d_values.values)
    if window is not None:
        d = d[window.contains(w.grid.points)]
    elif margin:
        d = d[margin:-margin, margin:-margin]
    val = float(np.min(d))
    if not val > 1e-12:
        raise RuntimeError("d w vanishes at a sample: the solve failed")
    return val


def lp_norm(values: np.ndarray, cell_area: float, p: float) -> float:
    return float((np.sum(np.abs(values) ** p) * cell_area) ** (1.0 / p))


def holder_exponent(w: QuasiconformalMap, radius: float, max_shift: int = 16) -> tuple[float, float]:
    """Fit ``sup |w(z1) - w(z2)| ~ c |z1 - z2|^alpha`` on the disk of ``radius``.

    Returns ``(alpha, c)`` from a log-log least-squares fit over dyadic
    axis-aligned offsets.
    """
    grid = w.grid
    v = w.map_values.values
    inside = np.abs(grid.points) <= radius
    shifts, mods = [], []
    s = 1
    while s <= max_shift:
        a = np.abs(v[s:, :] - v[:-s, :])[inside[s:, :] & inside[:-s, :]]
        b = np.abs(v[:, s:] - v[:, :-s])[inside[:, s:] & inside[:, :-s]]
        mods.append(max(a.max(), b.max()))
        shifts.append(s * grid.h)
        s *= 2
    alpha, logc = np.polyfit(np.log(shifts), np.log(mods), 1)
    return float(alpha), float(np.exp(logc))
