"""Spectra and log-determinants.

Two kinds of determinant live here:

* matrix scale: ``log det' A = sum log(lambda)`` over the nonzero spectrum with
  ``arg(lambda)`` taken in ``(theta - 2 pi, theta)``; different admissible cut
  angles change the value by an element of ``2 pi i Z``.
* continuum torus: ``-zeta'(0)`` of the flat Laplacian with spectrum
  ``4 pi^2 |kappa|^2`` (``kappa`` in the dual lattice), from the heat trace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import exp1

from .beltrami import BeltramiCoefficient
from .grid import LatticeSpec, SampledField, TorusGrid, cr_residual, torus_multipliers
from .operators import COEFFS, HoloLaplacian, delta_mn, symbol_report
from .oracles import dual_lattice_vectors

__all__ = [
    "SpectralDecomposition",
    "DetResult",
    "CutError",
    "KernelError",
    "ContourCrossing",
    "InadmissibleError",
    "DEFAULT_CAP",
    "discretize",
    "eigen_spectrum",
    "log_det_branch",
    "log_det",
    "heat_trace",
    "zeta_logdet_torus",
    "variation_check",
    "det_holomorphy_check",
    "default_rho",
    "diagonal_holomorphy_residual",
    "hermiticity_defect",
]

DEFAULT_CAP = 4096
CUT_TOL = 1e-10
RESIDUAL_TOL = 1e-9
# couplings below this fraction of max|A| count as zero when splitting into blocks
BLOCK_DROP = 1e-14


class CutError(ValueError):
    """An eigenvalue sits on the branch cut; choose another theta."""


class KernelError(ValueError):
    """Wrong number of eigenvalues inside the kernel radius."""


class ContourCrossing(ValueError):
    """An eigenvalue crossed the cut within a finite-difference stencil."""


class InadmissibleError(ValueError):
    """A stencil point leaves the admissible region."""


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    theta: float
    rho: float
    residual_bound: float
    kernel_dim: int
    blocks: int = 1


@dataclass(frozen=True)
class DetResult:
    log_det: complex
    branch_index: int
    method: str


# --------------------------------------------------------------------------
# discretization

_MULT = {"c20": (2, 0), "c11": (1, 1), "c02": (0, 2), "c10": (1, 0), "c01": (0, 1)}


def discretize(L: HoloLaplacian, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Matrix of ``apply(L, .)`` acting on ``fft2`` coefficients.

    Rows and columns are indexed by the flattened FFT mode ``(i, j) -> i N + j``.
    The matrix is similar (by the unitary DFT) to the nodal collocation matrix,
    so it has the same spectrum.
    """
    grid = L.grid
    if L.flavor != "flat-torus" or not isinstance(grid, TorusGrid):
        raise TypeError("discretize needs a flat-torus operator")
    N = grid.N
    n = N * N
    if n > cap:
        raise ValueError(f"{n} unknowns exceed the cap {cap}")
    d1, db1 = torus_multipliers(grid, zero_nyquist=True)
    d2, db2 = torus_multipliers(grid)
    P = L.prefactor.values
    chat = {}
    mult = {}
    for c in COEFFS:
        a, b = _MULT[c]
        chat[c] = np.fft.fft2(P * getattr(L, c).values) / n
        mult[c] = (d1**a * db1**b if a + b == 1 else d2**a * db2**b).ravel()
    i = np.repeat(np.arange(N), N)
    j = np.tile(np.arange(N), N)
    # A[k, l] = sum_c chat_c[(k - l) mod N] * mult_c[l]
    idx = ((i[:, None] - i[None, :]) % N) * N + (j[:, None] - j[None, :]) % N
    A = np.zeros((n, n), dtype=complex)
    for c in COEFFS:
        A += chat[c].ravel()[idx] * mult[c][None, :]
    return A


def hermiticity_defect(A: np.ndarray) -> float:
    """``||A - A^*|| / ||A||`` (Frobenius)."""
    A = np.asarray(A, dtype=complex)
    return float(np.linalg.norm(A - A.conj().T) / np.linalg.norm(A))


# --------------------------------------------------------------------------
# spectra


def _blocks(A: np.ndarray) -> list[np.ndarray]:
    mask = np.abs(A) > BLOCK_DROP * np.max(np.abs(A))
    mask |= mask.T
    ncomp, labels = connected_components(csr_matrix(mask), directed=False)
    return [np.flatnonzero(labels == c) for c in range(ncomp)]


def _cut_distance(lam: np.ndarray, theta: float) -> np.ndarray:
    u = lam * np.exp(-1j * theta)
    # distance to the ray {r e^{i theta}, r >= 0}
    return np.where(u.real > 0, np.abs(u.imag), np.abs(u))


def _raw_spectrum(A: np.ndarray, certify: bool):
    """Eigenvalues blockwise, with the max residual ``|A v - l v|`` for unit ``v``."""
    eigs = []
    worst = 0.0
    blocks = _blocks(A)
    for idx in blocks:
        B = A[np.ix_(idx, idx)]
        if certify:
            lam, V = linalg.eig(B)
            V = V / np.linalg.norm(V, axis=0)
            # residual against the full matrix, so dropped couplings are counted
            R = A[:, idx] @ V
            R[idx, :] -= V * lam[None, :]
            worst = max(worst, float(np.max(np.linalg.norm(R, axis=0))))
        else:
            lam = linalg.eigvals(B)
        eigs.append(lam)
    return np.concatenate(eigs), worst, len(blocks)


def eigen_spectrum(
    A: np.ndarray,
    theta: float = math.pi,
    rho: Optional[float] = None,
    kernel_dim: int = 1,
    certify: bool = True,
) -> SpectralDecomposition:
    """Full non-symmetric eigensolve with kernel and cut checks.

    ``rho=None`` uses half the smallest modulus outside the ``kernel_dim``
    smallest eigenvalues.
    """
    A = np.asarray(A, dtype=complex)
    lam, res, nblocks = _raw_spectrum(A, certify)
    lam = lam[np.argsort(np.abs(lam), kind="stable")]
    norm = float(np.linalg.norm(A, 2)) if A.shape[0] <= 512 else float(np.linalg.norm(A, "fro"))
    if certify and res > RESIDUAL_TOL * max(norm, 1e-300):
        raise RuntimeError(f"eigenpair residual {res:.3e} exceeds {RESIDUAL_TOL}*||A||")
    if rho is None:
        if lam.size <= kernel_dim:
            raise KernelError("no nonzero eigenvalues to set rho from")
        rho = 0.5 * float(np.abs(lam[kernel_dim]))
    inside = int(np.sum(np.abs(lam) < rho))
    if inside != kernel_dim:
        raise KernelError(f"{inside} eigenvalues inside |lambda| < {rho:.3e}, expected {kernel_dim}")
    outer = lam[np.abs(lam) >= rho]
    dist = _cut_distance(outer, theta)
    bad = dist < CUT_TOL * np.maximum(1.0, np.abs(outer))
    if np.any(bad):
        raise CutError(f"eigenvalue {outer[bad][0]} on the cut arg = {theta}; choose another theta")
    return SpectralDecomposition(lam, float(theta), float(rho), res / max(norm, 1e-300), kernel_dim, nblocks)


def _branch_log(lam: np.ndarray, theta: float) -> np.ndarray:
    """``log`` with ``arg`` in ``(theta - 2 pi, theta)``."""
    arg = np.angle(lam * np.exp(-1j * theta))  # in (-pi, pi]
    arg = np.where(arg > 0, arg - 2 * np.pi, arg) + theta
    return np.log(np.abs(lam)) + 1j * arg


def log_det_branch(S: SpectralDecomposition) -> DetResult:
    lam = S.eigenvalues[np.abs(S.eigenvalues) >= S.rho]
    val = complex(np.sum(_branch_log(lam, S.theta)))
    principal = complex(np.sum(np.log(lam)))
    k = int(round((val - principal).imag / (2 * np.pi)))
    return DetResult(val, k, "matrix-branch")


def log_det(L_or_A, theta: float = math.pi, rho: Optional[float] = None, kernel_dim: int = 1, certify: bool = False) -> DetResult:
    A = discretize(L_or_A) if isinstance(L_or_A, HoloLaplacian) else np.asarray(L_or_A, dtype=complex)
    return log_det_branch(eigen_spectrum(A, theta, rho, kernel_dim, certify))


# --------------------------------------------------------------------------
# continuum torus determinant

_EXP_CUT = 45.0  # e^-45 ~ 3e-20


def _lattice_vectors(z: complex, radius: float) -> np.ndarray:
    lat = LatticeSpec(z)
    B = lat.basis
    smin = np.linalg.svd(B, compute_uv=False).min()
    R = int(math.ceil(radius / smin)) + 1
    m = np.arange(-R, R + 1)
    M, Nn = np.meshgrid(m, m, indexing="ij")
    v = M.ravel()[:, None] * B[0] + Nn.ravel()[:, None] * B[1]
    g = v[:, 0] + 1j * v[:, 1]
    return g[np.abs(g) <= radius]


def heat_trace(z: complex, t: float, scale: float = 1.0, method: str = "spectral") -> float:
    """``Tr exp(-t c Delta)`` on ``T_z`` with ``c = scale``.

    ``method="spectral"`` sums ``exp(-4 pi^2 c t |kappa|^2)``; ``method="poisson"``
    uses ``A/(4 pi c t) sum exp(-|gamma|^2/(4 c t))`` over the lattice.
    """
    ct = scale * t
    if method == "spectral":
        k = dual_lattice_vectors(z, math.sqrt(_EXP_CUT / ct) / (2 * math.pi))
        return float(np.sum(np.exp(-4 * math.pi**2 * ct * np.abs(k) ** 2)))
    if method == "poisson":
        g = _lattice_vectors(z, math.sqrt(4 * ct * _EXP_CUT))
        return float(LatticeSpec(z).area / (4 * math.pi * ct) * np.sum(np.exp(-np.abs(g) ** 2 / (4 * ct))))
    raise ValueError(f"unknown method {method!r}")


def _zeta_prime0(z: complex, c: float) -> float:
    """``zeta'(0)`` of ``c Delta`` via the heat trace split at ``t = 1``.

    ``Gamma(s) zeta(s) = A/(4 pi c (s-1)) - 1/s + R(s) + I(s)`` where ``R`` is
    the small-t Poisson remainder and ``I`` the large-t spectral tail, which
    gives ``zeta(0) = -1`` and
    ``zeta'(0) = -gamma_E - A/(4 pi c) + (A/pi) sum' e^{-|g|^2/4c}/|g|^2 + sum' E1(lambda)``.
    """
    area = LatticeSpec(z).area
    k = dual_lattice_vectors(z, math.sqrt(_EXP_CUT / c) / (2 * math.pi))
    lam = 4 * math.pi**2 * c * np.abs(k[k != 0]) ** 2
    spectral = float(np.sum(exp1(lam)))
    g = _lattice_vectors(z, math.sqrt(4 * c * _EXP_CUT))
    g2 = np.abs(g[g != 0]) ** 2
    poisson = float(area / math.pi * np.sum(np.exp(-g2 / (4 * c)) / g2))
    return -np.euler_gamma - area / (4 * math.pi * c) + poisson + spectral


def zeta_logdet_torus(z: complex, convention: str = "oracle") -> DetResult:
    """Zeta-regularized log-determinant of the flat torus Laplacian.

    ``convention="laplacian"`` returns ``log det'(Delta) = -zeta'(0)`` for
    ``Delta`` with spectrum ``4 pi^2 |kappa|^2``; this equals
    ``log((Im z)^2 |eta(z)|^4)``.  ``convention="oracle"`` returns half the
    log-determinant of the area-normalized operator ``(Im z / 4 pi^2) Delta``,
    which is the quantity ``log(2 pi (Im z)^(1/2) |eta(z)|^2)`` of
    ``torus_logdet_exact``.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("need Im z > 0")
    if not 0.1 <= abs(z) <= 10:
        raise ValueError(f"|z| = {abs(z):.3g} outside [0.1, 10]: theta series truncation not controlled")
    if convention == "laplacian":
        val = -_zeta_prime0(z, 1.0)
    elif convention == "oracle":
        val = -0.5 * _zeta_prime0(z, z.imag / (4 * math.pi**2))
    else:
        raise ValueError(f"unknown convention {convention!r}")
    return DetResult(complex(val), 0, "zeta-exact-torus")


# --------------------------------------------------------------------------
# variation formula and holomorphy


def _as_matrix(x) -> np.ndarray:
    return discretize(x) if isinstance(x, HoloLaplacian) else np.asarray(x, dtype=complex)


def _group_inverse_trace(A: np.ndarray, dA: np.ndarray, kernel_dim: int) -> complex:
    """``Tr((1 - P0) A^{-1} dA)`` with ``P0`` the spectral projector on the kernel.

    Uses ``(1 - P0) A^{-1} = (A + P0)^{-1} - P0`` (the group inverse), with
    ``P0 = V (W^* V)^{-1} W^*`` from right and left null vectors.
    """
    if kernel_dim == 0:
        return complex(np.trace(linalg.solve(A, dA)))
    V = linalg.null_space(A, rcond=1e-10)
    W = linalg.null_space(A.conj().T, rcond=1e-10)
    if V.shape[1] != kernel_dim or W.shape[1] != kernel_dim:
        raise KernelError(f"null space has dimension {V.shape[1]}, expected {kernel_dim}")
    P0 = V @ linalg.solve(W.conj().T @ V, W.conj().T)
    return complex(np.trace(linalg.solve(A + P0, dA)) - np.trace(P0 @ dA))


_STENCILS = {
    2: ((-1, -0.5), (1, 0.5)),
    4: ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12)),
}


def variation_check(
    family: Callable[[complex], object],
    s0: complex = 0.0,
    h: float = 1e-4,
    theta: float = math.pi,
    rho: Optional[float] = None,
    kernel_dim: int = 1,
    order: int = 4,
) -> float:
    """``|FD d log det'/ds - Tr((1-P0) A^{-1} dA/ds)|`` at ``s0`` along real ``s``.

    ``family(s)`` returns a matrix or a flat-torus ``HoloLaplacian``.  Both
    ``d log det'/ds`` and ``dA/ds`` use the same central stencil of the given
    ``order`` (2 or 4).
    """
    try:
        stencil = _STENCILS[order]
    except KeyError:
        raise ValueError("order must be 2 or 4") from None
    A0 = _as_matrix(family(s0))
    S0 = eigen_spectrum(A0, theta, rho, kernel_dim, certify=False)
    fd = 0.0
    dA = np.zeros_like(A0)
    for k, w in stencil:
        A = _as_matrix(family(s0 + k * h))
        ld = log_det_branch(eigen_spectrum(A, theta, S0.rho, kernel_dim, certify=False)).log_det
        fd += w * ld
        dA += w * A
    fd = fd / h
    dA /= h
    trace = _group_inverse_trace(A0, dA, kernel_dim)
    if abs(fd - trace) * h > math.pi / 2:
        raise ContourCrossing("an eigenvalue crossed the cut inside the stencil; shrink h or change theta")
    return float(abs(fd - trace))


def default_rho(mu: BeltramiCoefficient, tol: float = 1e-12) -> float:
    """Half the first nonzero ``|lambda|`` of the discretized ``Delta_{mu,mu}``."""
    S = eigen_spectrum(discretize(delta_mn(mu, mu, tol)), certify=False)
    return S.rho


def _perturbed(mu: BeltramiCoefficient, mu1: BeltramiCoefficient, s: complex) -> BeltramiCoefficient:
    f = SampledField(mu.grid, mu.values + s * mu1.values)
    return BeltramiCoefficient.from_field(f, support="doubly-periodic")


def det_holomorphy_check(
    mu: BeltramiCoefficient,
    nu: BeltramiCoefficient,
    mu1: BeltramiCoefficient,
    nu1: BeltramiCoefficient,
    h: float = 1e-3,
    theta: float = math.pi,
    rho: Optional[float] = None,
    theta0: float = math.pi / 2,
    tol: float = 1e-13,
) -> tuple[float, float]:
    """CR residuals of ``s -> log det' Delta_{mu + s mu1, nu}`` and
    ``t -> log det' Delta_{mu, nu + conj(t) nu1}`` at 0.

    The operator is antiholomorphic in ``nu``, so the second map is the
    holomorphic one along the ``t`` direction.  Every stencil point must keep
    ``max |arg sigma| < theta0`` and exactly one eigenvalue inside ``rho``.
    """
    if rho is None:
        rho = default_rho(mu, tol)

    def ld(m, n):
        try:
            L = delta_mn(m, n, tol)
        except ValueError as exc:
            raise InadmissibleError(f"ellipticity: {exc}") from None
        rep = symbol_report(L)
        if rep.max_abs_arg >= theta0:
            raise InadmissibleError(f"symbol sector: max |arg sigma| = {rep.max_abs_arg:.3f} >= theta0 = {theta0:.3f}")
        try:
            S = eigen_spectrum(discretize(L), theta, rho, certify=False)
        except KernelError as exc:
            raise InadmissibleError(f"spectral gap: {exc}") from None
        except CutError as exc:
            raise InadmissibleError(f"cut: {exc}") from None
        return log_det_branch(S).log_det

    zero_s = not np.any(mu1.values)
    zero_t = not np.any(nu1.values)
    res_s = 0.0 if zero_s else cr_residual(lambda s: ld(_perturbed(mu, mu1, s), nu), 0.0, h)
    res_t = 0.0 if zero_t else cr_residual(lambda t: ld(mu, _perturbed(nu, nu1, np.conj(t))), 0.0, h)
    return float(res_s), float(res_t)


def diagonal_holomorphy_residual(mu: BeltramiCoefficient, mu1: BeltramiCoefficient, h: float = 1e-3, theta: float = math.pi, rho: Optional[float] = None, tol: float = 1e-13) -> float:
    """CR residual of the diagonal restriction ``s -> log det' Delta_{mu+s mu1, mu+s mu1}``."""
    if rho is None:
        rho = default_rho(mu, tol)

    def ld(s):
        m = _perturbed(mu, mu1, s)
        return log_det_branch(eigen_spectrum(discretize(delta_mn(m, m, tol)), theta, rho, certify=False)).log_det

    return float(cr_residual(ld, 0.0, h))
