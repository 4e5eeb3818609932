"""The operator family Delta_{mu,nu} and its diagnostics.

With ``alpha_{mu,nu} = 1 / ((1 - mu conj(nu)) d f_{mu,nu})``::

    Delta_{mu,nu} = P * alpha_{mu,nu} conj(alpha_{nu,mu}) * (
        - mu d^2 + (1 + mu conj(nu)) dbar d - conj(nu) dbar^2
        + (dbar_mu log alpha_{mu,nu}) d + (d_{conj nu} log conj(alpha_{nu,mu})) dbar )

where ``dbar_mu = dbar - mu d`` and ``d_{conj nu} = d - conj(nu) dbar``.

Two flavors are built:

hyperbolic
    ``P = (f_{mu,nu} - conj(f_{nu,mu}))^2`` with the plane maps ``f_{mu,nu}``;
    evaluated on windows in the upper half plane.  At ``mu = nu = 0`` this is
    ``(z - zbar)^2 d dbar``, the hyperbolic Laplacian.
flat-torus
    ``P = -4`` with ``f_{mu,nu} = w^mu`` the lattice-normalized torus map.  At
    ``mu = nu = 0`` this is ``-4 d dbar``, the positive flat Laplacian, so the
    spectrum and the principal symbol have the same sign conventions as the
    hyperbolic flavor.  This flavor is an extension used as a genus-1 testbed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .beltrami import BeltramiCoefficient, QuasiconformalMap, c2_norm, fmn_pair, PlaneSolverConfig
from .grid import CompactWindow, RectGrid, SampledField, TorusGrid, derivative

__all__ = [
    "HoloLaplacian",
    "SymbolReport",
    "FLAT_PREFACTOR",
    "pullback_laplacian",
    "build_delta_mn",
    "delta_mn",
    "apply",
    "symbol_report",
    "invariance_check",
    "hodge_quadratic_form",
    "dirichlet_energy",
    "garding_check",
    "restrict",
    "EllipticityError",
]

FLAT_PREFACTOR = -4.0
COEFFS = ("c20", "c11", "c02", "c10", "c01")
_DERIV = {"c20": "dd", "c11": "ddbar", "c02": "dbardbar", "c10": "d", "c01": "dbar"}


class EllipticityError(ValueError):
    pass


@dataclass(frozen=True)
class HoloLaplacian:
    """Coefficients of ``d^2, dbar d, dbar^2, d, dbar`` and the prefactor."""

    c20: SampledField
    c11: SampledField
    c02: SampledField
    c10: SampledField
    c01: SampledField
    prefactor: SampledField
    flavor: str
    provenance: dict = field(default_factory=dict)
    # pieces kept for the principal symbol decomposition
    parts: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def grid(self):
        return self.c11.grid

    def coefficient(self, name: str) -> SampledField:
        return getattr(self, name)

    def scaled(self) -> dict:
        """Coefficient arrays multiplied by the prefactor."""
        P = self.prefactor.values
        return {c: P * getattr(self, c).values for c in COEFFS}


def _check(mu, nu, dmn, dnm):
    if np.max(np.abs(mu)) >= 1 or np.max(np.abs(nu)) >= 1:
        raise EllipticityError("|mu| or |nu| reaches 1")
    if np.min(np.abs(dmn)) == 0 or np.min(np.abs(dnm)) == 0:
        raise EllipticityError("d f vanishes at a sample")


def _log_derivative(alpha: SampledField, mu: np.ndarray, conjugate_side: bool = False) -> np.ndarray:
    """``(dbar a - mu d a)/a`` or, with ``conjugate_side``, ``(d a - mu dbar a)/a``.

    Derivatives are taken of ``a`` itself rather than of ``log a``.
    """
    da = derivative(alpha, "d").values
    dba = derivative(alpha, "dbar").values
    a = alpha.values
    if conjugate_side:
        return (da - mu * dba) / a
    return (dba - mu * da) / a


def _prefactor(flavor, grid, fmn: QuasiconformalMap, fnm: QuasiconformalMap):
    if flavor == "flat-torus":
        return SampledField(grid, np.full(grid.shape, FLAT_PREFACTOR, dtype=complex))
    return SampledField(grid, (fmn.map_values.values - np.conj(fnm.map_values.values)) ** 2)


def _flavor_of(grid):
    return "flat-torus" if isinstance(grid, TorusGrid) else "hyperbolic"


def pullback_laplacian(mu: BeltramiCoefficient, f: QuasiconformalMap) -> HoloLaplacian:
    """Pull-back of the (flat or hyperbolic) Laplacian by ``f``, coefficient form.

    ``(f)^* d dbar = |alpha|^2 (-mu d^2 + (1+|mu|^2) dbar d - conj(mu) dbar^2
    + (dbar_mu log alpha) d + (d_{conj mu} log conj(alpha)) dbar)`` with
    ``alpha = 1/((1 - |mu|^2) d f)``.
    """
    grid = mu.grid
    m = mu.values
    df = f.d_values.values
    _check(m, m, df, df)
    alpha = 1.0 / ((1 - np.abs(m) ** 2) * df)
    a2 = np.abs(alpha) ** 2
    first = _log_derivative(SampledField(grid, alpha), m)
    flavor = _flavor_of(grid)
    if flavor == "flat-torus":
        P = np.full(grid.shape, FLAT_PREFACTOR, dtype=complex)
    else:
        P = (2j * f.map_values.values.imag) ** 2
    F = lambda v: SampledField(grid, v)  # noqa: E731
    return HoloLaplacian(
        F(-m * a2),
        F((1 + np.abs(m) ** 2) * a2),
        F(-np.conj(m) * a2),
        F(a2 * first),
        F(a2 * np.conj(first)),
        F(P),
        flavor,
        {"mu": id(mu), "kind": "pullback"},
        {"mu": m, "nu": m, "d_mn": df, "d_nm": df},
    )


def build_delta_mn(mu: BeltramiCoefficient, nu: BeltramiCoefficient, fmn: QuasiconformalMap, fnm: QuasiconformalMap) -> HoloLaplacian:
    grid = mu.grid
    m, n = mu.values, nu.values
    dmn, dnm = fmn.d_values.values, fnm.d_values.values
    _check(m, n, dmn, dnm)
    a_mn = 1.0 / ((1 - m * np.conj(n)) * dmn)
    a_nm = 1.0 / ((1 - n * np.conj(m)) * dnm)
    beta = np.conj(a_nm)
    A = a_mn * beta
    c10 = A * _log_derivative(SampledField(grid, a_mn), m)
    c01 = A * _log_derivative(SampledField(grid, beta), np.conj(n), conjugate_side=True)
    flavor = _flavor_of(grid)
    F = lambda v: SampledField(grid, v)  # noqa: E731
    return HoloLaplacian(
        F(-m * A),
        F((1 + m * np.conj(n)) * A),
        F(-np.conj(n) * A),
        F(c10),
        F(c01),
        _prefactor(flavor, grid, fmn, fnm),
        flavor,
        {"mu": id(mu), "nu": id(nu), "kind": "delta_mn"},
        {"mu": m, "nu": n, "d_mn": dmn, "d_nm": dnm},
    )


def delta_mn(mu: BeltramiCoefficient, nu: BeltramiCoefficient, tol: float = 1e-12, config: PlaneSolverConfig = PlaneSolverConfig()) -> HoloLaplacian:
    """Solve for the normalized maps and build ``Delta_{mu,nu}``."""
    fmn, fnm = fmn_pair(mu, nu, tol, config)
    return build_delta_mn(mu, nu, fmn, fnm)


def restrict(L: HoloLaplacian, window: CompactWindow) -> HoloLaplacian:
    """Coefficient fields on the nodes of ``window`` (rectangular grids)."""
    if not isinstance(L.grid, RectGrid):
        raise TypeError("restrict needs a rectangular grid")
    sub, sl = L.grid.subgrid(window)
    F = lambda f: SampledField(sub, f.values[sl])  # noqa: E731
    parts = {k: v[sl] for k, v in L.parts.items()}
    return HoloLaplacian(
        *(F(getattr(L, c)) for c in COEFFS), F(L.prefactor), L.flavor, dict(L.provenance, window=window), parts
    )


def apply(L: HoloLaplacian, u: SampledField) -> SampledField:
    if u.grid != L.grid:
        raise ValueError("u does not live on the operator's grid")
    out = np.zeros(u.grid.shape, dtype=complex)
    for c in COEFFS:
        out += getattr(L, c).values * derivative(u, _DERIV[c]).values
    return u.with_values(L.prefactor.values * out)


# --------------------------------------------------------------------------
# principal symbol


@dataclass(frozen=True)
class SymbolReport:
    max_abs_arg: float
    per_factor_args: tuple
    sample_count: int
    directions: int
    min_abs_symbol: float


def symbol_report(L: HoloLaplacian, directions: int = 32) -> SymbolReport:
    """Largest ``|arg sigma|`` over samples and unit covectors.

    ``sigma = -P alpha_{mu,nu} conj(alpha_{nu,mu}) (zeta - mu zetabar)(zetabar - conj(nu) zeta)``.
    The four factor bounds are ``|arg(-P)|``, ``|arg (1 - mu conj nu)^2|``,
    ``|arg(d f_{mu,nu} conj(d f_{nu,mu}))|`` and ``|arg Q(zeta)|``.
    """
    if directions < 8:
        raise ValueError("need at least 8 covector directions")
    m = L.parts["mu"].ravel()
    n = L.parts["nu"].ravel()
    P = L.prefactor.values.ravel()
    A = (L.c11.values.ravel()) / (1 + m * np.conj(n))
    phi = 2 * np.pi * np.arange(directions) / directions
    zeta = np.exp(1j * phi)[None, :]
    Q = (zeta - m[:, None] * np.conj(zeta)) * (np.conj(zeta) - np.conj(n)[:, None] * zeta)
    sigma = -P[:, None] * A[:, None] * Q
    amin = float(np.min(np.abs(sigma)))
    if amin == 0:
        raise EllipticityError("principal symbol vanishes at a nonzero covector")
    dmn = L.parts["d_mn"].ravel()
    dnm = L.parts["d_nm"].ravel()
    factors = (
        float(np.max(np.abs(np.angle(-P)))),
        float(np.max(np.abs(np.angle((1 - m * np.conj(n)) ** 2)))),
        float(np.max(np.abs(np.angle(dmn * np.conj(dnm))))),
        float(np.max(np.abs(np.angle(Q)))),
    )
    return SymbolReport(float(np.max(np.abs(np.angle(sigma)))), factors, m.size, directions, amin)


# --------------------------------------------------------------------------
# invariance


def invariance_check(L: HoloLaplacian, cells: int = 1) -> float:
    """Largest change of any coefficient field under the lattice generators.

    ``cells`` is the number of fundamental cells of the coefficients per grid
    period (the coefficients of a ``cells``-fold replicated ``mu`` must be
    invariant under shifts by ``N / cells`` samples along both generators).
    """
    grid = L.grid
    if not isinstance(grid, TorusGrid):
        raise TypeError("invariance_check needs a torus grid")
    if grid.N % cells:
        raise ValueError("cells must divide N")
    s = grid.N // cells
    worst = 0.0
    for c in COEFFS + ("prefactor",):
        v = getattr(L, c).values
        scale = max(1.0, float(np.max(np.abs(v))))
        for axis in (0, 1):
            worst = max(worst, float(np.max(np.abs(np.roll(v, s, axis=axis) - v))) / scale)
    return worst


# --------------------------------------------------------------------------
# quadratic forms


def _integrate(values: np.ndarray, grid) -> complex:
    return complex(np.sum(values) * grid.cell_area)


def dirichlet_energy(u: SampledField) -> float:
    """Flat Dirichlet energy ``int |u_x|^2 + |u_y|^2 dA = 2 int |du|^2 + |dbar u|^2 dA``."""
    a = derivative(u, "d").values
    b = derivative(u, "dbar").values
    return float(_integrate(2 * (np.abs(a) ** 2 + np.abs(b) ** 2), u.grid).real)


def hodge_quadratic_form(mu: BeltramiCoefficient, u: SampledField, star: str = "displayed") -> tuple[float, float]:
    """``(int du ^ *du, int (1-|mu|^2)(|du|^2 + |dbar u|^2) i dz^dzbar/2)``.

    The star acts on ``a dz + b dzbar`` through
    ``i/D [[2 conj(mu), -(1+|mu|^2)], [1+|mu|^2, -2 mu]]`` applied to
    ``(conj a, conj b)``.  ``star="displayed"`` uses ``D = (1-|mu|^2)^2``;
    ``star="conformal"`` uses ``D = 1-|mu|^2``, which is the Hodge star of the
    conformal structure of ``mu`` and makes the energy equal to the Dirichlet
    energy of ``u o (w^mu)^{-1}``.
    """
    if not np.all(np.isfinite(u.values)):
        raise ValueError("u must be finite")
    if star not in ("displayed", "conformal"):
        raise ValueError(f"unknown star {star!r}")
    m = mu.values
    a = derivative(u, "d").values
    b = derivative(u, "dbar").values
    w = 1 - np.abs(m) ** 2
    D = w**2 if star == "displayed" else w
    c = 1j / D * (2 * np.conj(m) * np.conj(a) - (1 + np.abs(m) ** 2) * np.conj(b))
    d = 1j / D * ((1 + np.abs(m) ** 2) * np.conj(a) - 2 * m * np.conj(b))
    # du ^ *du = (a d - b c) dz ^ dzbar and dz ^ dzbar = -2i dA
    energy = _integrate(-2j * (a * d - b * c), u.grid)
    comparison = _integrate(w * (np.abs(a) ** 2 + np.abs(b) ** 2), u.grid)
    return float(energy.real), float(comparison.real)


def garding_check(mu: BeltramiCoefficient, nu: BeltramiCoefficient, u: SampledField, tol: float = 1e-12) -> float:
    """Relative defect of ``<u, Delta_{mu,nu} u> = ||grad u||^2`` per unit ``eps``.

    The inner product and the gradient norm are those of the metric pulled back
    by ``w^mu``; ``eps`` is the discrete C^2 norm of ``mu - nu``.  With
    ``eps = 0`` the raw defect is returned.
    """
    if not isinstance(mu.grid, TorusGrid):
        raise TypeError("garding_check runs on torus grids")
    L = delta_mn(mu, nu, tol)
    fm, _ = fmn_pair(mu, mu, tol)
    J = np.abs(fm.d_values.values) ** 2 * (1 - np.abs(mu.values) ** 2)
    Lu = apply(L, u).values
    pairing = _integrate(u.values * np.conj(Lu) * J, u.grid)
    grad2, _ = hodge_quadratic_form(mu, u, star="conformal")
    u2 = float(_integrate(np.abs(u.values) ** 2 * J, u.grid).real)
    defect = abs(pairing - grad2)
    eps = c2_norm(SampledField(mu.grid, mu.values - nu.values))
    if eps == 0:
        return float(defect)
    return float(defect / (eps * (grad2 + u2)))
