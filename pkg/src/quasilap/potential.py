"""Holomorphic potentials of closed mixed 2-forms by cone integration.

For ``Omega = Omega(z, w) dz ^ dw`` on ``V x W`` and centers ``(z0, w0)`` the
potential::

    q(z, w) = int_0^1 int_0^1 Omega(z0 + s (z - z0), w0 + t (w - w0)) (z - z0)(w - w0) ds dt

satisfies ``d_z d_w q = Omega`` and vanishes on ``{z0} x W`` and ``V x {w0}``.
The genus-1 objects are ``omega_WP = -i (z - zbar)^-2 dz ^ dzbar`` and its
extension ``Omega = (z - w)^-2 dz ^ dw``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .grid import cr_residual
from .oracles import BranchError, torus_logdet_extension

__all__ = [
    "QuadratureError",
    "Rect",
    "ClosedTwoForm",
    "ConeChart",
    "adaptive_gl",
    "cone_potential",
    "path_potential",
    "mixed_derivative",
    "mixed_hessian_check",
    "wp_genus1",
    "extension_density",
    "log_potential",
    "kahler_potential_check",
    "tilde_q",
    "extension_split",
    "extension_structure_check",
    "polynomial_uniqueness",
]

QUAD_TOL = 1e-12
QUAD_FAIL = 1e-10
MAX_INTERVALS = 4000
_LO = leggauss(10)
_HI = leggauss(20)


class QuadratureError(RuntimeError):
    def __init__(self, msg, trace):
        super().__init__(msg)
        self.trace = trace


@dataclass(frozen=True)
class Rect:
    """Closed rectangle ``[x0, x1] x [y0, y1]`` anywhere in C."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError("empty rectangle")

    def contains(self, p) -> bool:
        p = complex(p)
        return self.x0 <= p.real <= self.x1 and self.y0 <= p.imag <= self.y1

    def conjugate(self) -> "Rect":
        return Rect(self.x0, self.x1, -self.y1, -self.y0)


def _rect_contains(win: Rect, p: complex) -> bool:
    return win.contains(p)


@dataclass(frozen=True)
class ClosedTwoForm:
    """``Omega(z, w) dz ^ dw`` on ``V x W``.

    A mixed form ``f dz ^ dw`` with ``f`` holomorphic in each variable is
    closed; the certificate is the largest sampled Cauchy-Riemann residual of
    ``f`` in ``z`` and in ``w``.
    """

    evaluator: Callable
    V: Rect
    W: Rect
    closedness_certificate: float = field(default=float("nan"))

    @classmethod
    def build(cls, evaluator, V, W, samples: int = 5, h: float = 1e-4) -> "ClosedTwoForm":
        zs = np.linspace(V.x0, V.x1, samples)[:, None] + 1j * np.linspace(V.y0, V.y1, samples)[None, :]
        ws = np.linspace(W.x0, W.x1, samples)[:, None] + 1j * np.linspace(W.y0, W.y1, samples)[None, :]
        worst = 0.0
        for z, w in zip(zs.ravel(), ws.ravel()[::-1]):
            fz = lambda s: complex(evaluator(s, w))  # noqa: E731
            fw = lambda s: complex(evaluator(z, s))  # noqa: E731
            hz = min(h, 0.5 * _inner_distance(V, z))
            hw = min(h, 0.5 * _inner_distance(W, w))
            scale = max(1.0, abs(evaluator(z, w)))
            worst = max(worst, cr_residual(fz, z, hz) / scale, cr_residual(fw, w, hw) / scale)
        return cls(evaluator, V, W, float(worst))

    def __call__(self, z, w):
        return self.evaluator(z, w)


def _inner_distance(win: Rect, p: complex) -> float:
    d = min(p.real - win.x0, win.x1 - p.real, p.imag - win.y0, win.y1 - p.imag)
    return max(d, 1e-6)


@dataclass(frozen=True)
class ConeChart:
    z0: complex
    w0: complex

    def check(self, form: ClosedTwoForm):
        if not _rect_contains(form.V, self.z0) or not _rect_contains(form.W, self.w0):
            raise ValueError("chart centers must lie in V x W")


# --------------------------------------------------------------------------
# quadrature


def _gl(f, a, b, rule):
    x, wts = rule
    m, r = 0.5 * (a + b), 0.5 * (b - a)
    return r * np.sum(wts * f(m + r * x))


def adaptive_gl(
    f: Callable[[np.ndarray], np.ndarray],
    a: float = 0.0,
    b: float = 1.0,
    tol: float = QUAD_TOL,
    max_depth: int = 30,
    max_intervals: int = MAX_INTERVALS,
):
    """Adaptive Gauss-Legendre on ``[a, b]``: 10- vs 20-point rules with bisection.

    Returns ``(value, error_estimate, trace)`` where ``trace`` lists the
    accepted intervals with their local error estimates.  Raises
    ``QuadratureError`` once more than ``max_intervals`` intervals were examined.
    """
    stack = [(a, b, 0)]
    total = 0.0
    err = 0.0
    trace = []
    visited = 0
    while stack:
        visited += 1
        if visited > max_intervals:
            raise QuadratureError(f"adaptive quadrature exceeded {max_intervals} intervals on [{a}, {b}]", trace)
        lo, hi, depth = stack.pop()
        coarse = _gl(f, lo, hi, _LO)
        fine = _gl(f, lo, hi, _HI)
        e = abs(fine - coarse)
        # tolerance shared in proportion to the interval length
        if e <= tol * (hi - lo) / (b - a) or depth >= max_depth:
            total += fine
            err += e
            trace.append((lo, hi, e))
        else:
            mid = 0.5 * (lo + hi)
            stack.append((mid, hi, depth + 1))
            stack.append((lo, mid, depth + 1))
    return total, err, trace


def _iterated(integrand, tol):
    """``int_0^1 int_0^1 integrand(s, t) dt ds`` (``integrand`` vectorized in ``t``)."""
    inner_err = [0.0]

    def outer(svals):
        out = np.empty(len(svals), dtype=complex)
        for i, s in enumerate(svals):
            try:
                v, e, tr = adaptive_gl(lambda t: integrand(s, t), 0.0, 1.0, tol)
            except QuadratureError as exc:
                raise QuadratureError(f"inner integral at s = {s:.6g}: {exc}", [(s, exc.trace)]) from None
            if not e <= QUAD_FAIL:
                raise QuadratureError(f"inner integral at s = {s:.6g} has error estimate {e:.2e}", [(s, tr)])
            inner_err[0] = max(inner_err[0], e)
            out[i] = v
        return out

    val, err, trace = adaptive_gl(outer, 0.0, 1.0, tol)
    total_err = err + inner_err[0]
    if not total_err <= QUAD_FAIL:
        raise QuadratureError(f"cone quadrature did not converge (error estimate {total_err:.2e})", trace)
    return complex(val), total_err


def cone_potential(form: ClosedTwoForm, chart: ConeChart, z: complex, w: complex, tol: float = QUAD_TOL) -> complex:
    z, w = complex(z), complex(w)
    chart.check(form)
    if not _rect_contains(form.V, z) or not _rect_contains(form.W, w):
        raise ValueError("(z, w) outside V x W")
    dz, dw = z - chart.z0, w - chart.w0
    if dz == 0 or dw == 0:
        return 0j

    def integrand(s, t):
        return form(chart.z0 + s * dz, chart.w0 + t * dw) * dz * dw

    return _iterated(integrand, tol)[0]


def path_potential(form: ClosedTwoForm, zpath, wpath, tol: float = QUAD_TOL) -> complex:
    """``int int Omega(gamma(s), delta(t)) gamma'(s) delta'(t) ds dt`` over ``[0,1]^2``.

    ``zpath`` and ``wpath`` are pairs ``(gamma, gamma')`` of vectorized callables.
    """
    g, dg = zpath
    d, dd = wpath

    def integrand(s, t):
        return form(g(s), d(t)) * dg(s) * dd(t)

    return _iterated(integrand, tol)[0]


# --------------------------------------------------------------------------
# mixed derivatives

_FD = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
}


def mixed_derivative(F: Callable[[complex, complex], complex], z: complex, w: complex, h: float, order: int = 2) -> complex:
    """Central-difference ``d_z d_w F`` for ``F`` holomorphic in each variable."""
    st = _FD[order]
    acc = 0j
    for a, ca in st:
        for b, cb in st:
            acc += ca * cb * F(z + a * h, w + b * h)
    return acc / h**2


def mixed_hessian_check(form: ClosedTwoForm, chart: ConeChart, z: complex, w: complex, h: float = 1e-3, order: int = 2) -> float:
    q = lambda a, b: cone_potential(form, chart, a, b)  # noqa: E731
    return float(abs(mixed_derivative(q, z, w, h, order) - form(z, w)))


# --------------------------------------------------------------------------
# genus 1


def wp_genus1(z: complex) -> complex:
    """Density of ``omega_WP = -i (z - zbar)^-2 dz ^ dzbar``."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("need Im z > 0")
    return -1j / (z - z.conjugate()) ** 2


def extension_density(z, w):
    """``(z - w)^-2``, the density of the holomorphic extension ``Omega``."""
    return 1.0 / (np.asarray(z) - np.asarray(w)) ** 2


def log_potential(z0: complex, w0: complex) -> Callable[[complex, complex], complex]:
    """Closed-form cone potential of ``(z - w)^-2 dz ^ dw`` with centers ``(z0, w0)``.

    Principal logs are continuous here because ``z - w`` stays in the upper
    half plane for ``z`` in H and ``w`` in the lower half plane.
    """

    def q(z, w):
        return np.log(z - w) - np.log(z0 - w) - np.log(z - w0) + np.log(z0 - w0)

    return q


def kahler_potential_check(z: complex, h: float = 1e-3) -> float:
    """``|d dbar log(z - zbar) - (z - zbar)^-2|`` with a 5-point Laplacian."""
    z = complex(z)
    f = lambda p: np.log(p - np.conj(p))  # noqa: E731
    lap = (f(z + h) + f(z - h) + f(z + 1j * h) + f(z - 1j * h) - 4 * f(z)) / h**2
    return float(abs(0.25 * lap - (z - z.conjugate()) ** -2))


def tilde_q(qfun: Callable, z: complex, w: complex, domain: Optional[tuple] = None) -> complex:
    """``(q(z, w) + conj(q(conj w, conj z))) / 2``; real on the diagonal ``w = conj z``.

    ``domain=(V, W)`` enables the check that the reflected point lies in ``V x W``.
    """
    z, w = complex(z), complex(w)
    zr, wr = w.conjugate(), z.conjugate()
    if domain is not None:
        V, W = domain
        if not (_rect_contains(V, zr) and _rect_contains(W, wr)):
            raise ValueError("reflected point (conj w, conj z) is outside V x W")
    return 0.5 * (complex(qfun(z, w)) + complex(qfun(zr, wr)).conjugate())


def extension_split(z: complex, w: complex) -> complex:
    """``F(z, w) = log det' extension - (1/2) log((z - w)/2i)``."""
    try:
        return torus_logdet_extension(z, w) - 0.5 * np.log((complex(z) - complex(w)) / 2j)
    except BranchError:
        raise
    except ValueError as exc:
        raise BranchError(str(exc)) from None


def extension_structure_check(z: complex, w: complex, h: float = 1e-3, order: int = 4) -> float:
    """``|d_z d_w F|`` by central differences; zero when ``F = f(z) + g(w)``."""
    return float(abs(mixed_derivative(extension_split, complex(z), complex(w), h, order)))


def polynomial_uniqueness(degree: int = 4, points: int = 30, center: complex = 1j, radius: float = 0.5, seed: int = 0) -> dict:
    """Numerical witness that ``P(z, conj z)`` on sample points fixes ``P``.

    Builds the ``points x (degree+1)^2`` matrix of ``(z-c)^a (conj(z)-conj(c))^b``
    at random points of a disk.  Reports its relative smallest singular value,
    the largest coefficient of a least-squares solution of ``P(z, conj z) = 0``,
    and the recovery error for a random polynomial.
    """
    n = (degree + 1) ** 2
    if points < n:
        raise ValueError(f"need at least {n} points for degree {degree}")
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=points))
    z = center + r * np.exp(2j * np.pi * rng.uniform(size=points))
    u = (z - center) / radius
    a, b = np.meshgrid(np.arange(degree + 1), np.arange(degree + 1), indexing="ij")
    M = u[:, None] ** a.ravel()[None, :] * np.conj(u)[:, None] ** b.ravel()[None, :]
    sv = np.linalg.svd(M, compute_uv=False)
    zero_sol = np.linalg.lstsq(M, np.zeros(points, dtype=complex), rcond=None)[0]
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    rec = np.linalg.lstsq(M, M @ c, rcond=None)[0]
    return {
        "unknowns": n,
        "points": points,
        "sigma_min_rel": float(sv[-1] / sv[0]),
        "max_coefficient_zero_data": float(np.max(np.abs(zero_sol))),
        "recovery_error": float(np.max(np.abs(rec - c))),
    }
