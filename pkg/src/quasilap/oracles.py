"""Closed-form genus-1 quantities used as ground truth.

The flat torus ``T_z = C / (Z + zZ)`` has

    log det'(Delta)(z) = log(2 pi (Im z)^(1/2) |eta(z)|^2)

and this function of ``z`` extends holomorphically to ``H x conj(H)`` as

    log(2 pi ((z - w)/2i)^(1/2) eta(z) conj(eta(conj(w)))).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import LatticeSpec

__all__ = [
    "EtaValue",
    "dedekind_eta",
    "torus_logdet_exact",
    "torus_logdet_extension",
    "torus_eigenvalues",
    "dual_lattice_vectors",
    "BranchError",
]

MIN_IM = 0.05
REL_TOL = 1e-16
MAX_TERMS = 2000


class BranchError(ValueError):
    """Raised when a principal-branch formula is evaluated off its domain."""


@dataclass(frozen=True)
class EtaValue:
    z: complex
    value: complex
    truncation_terms: int
    tail_bound: float


def dedekind_eta(z: complex, terms: int | None = None) -> EtaValue:
    """Dedekind eta from its product ``q^(1/24) prod (1 - q^n)``.

    The product is truncated after ``M`` factors where ``M`` is the first
    index with ``|q|^(M+1) / (1 - |q|)^2 <= 1e-16``; this quantity bounds the
    relative size of the neglected tail.
    """
    z = complex(z)
    if z.imag <= 0:
        raise ValueError("eta needs Im z > 0")
    if z.imag < MIN_IM:
        raise ValueError(f"Im z = {z.imag} < {MIN_IM}: product converges too slowly (no modular reduction)")
    aq = math.exp(-2 * math.pi * z.imag)
    if terms is None:
        terms = 1
        while aq ** (terms + 1) / (1 - aq) ** 2 > REL_TOL and terms < MAX_TERMS:
            terms += 1
    tail = aq ** (terms + 1) / (1 - aq) ** 2
    q = np.exp(2j * np.pi * z)
    n = np.arange(1, terms + 1)
    val = np.exp(2j * np.pi * z / 24) * np.prod(1 - q**n)
    return EtaValue(z, complex(val), int(terms), float(tail))


def torus_logdet_exact(z: complex) -> float:
    z = complex(z)
    eta = dedekind_eta(z).value
    return math.log(2 * math.pi * math.sqrt(z.imag) * abs(eta) ** 2)


def torus_logdet_extension(z: complex, w: complex) -> complex:
    """Holomorphic extension in ``(z, w)``, ``w`` in the lower half plane.

    Principal branches of the square root and of the logarithm are used, which
    is unambiguous while ``Re((z - w)/2i) > 0``.
    """
    z, w = complex(z), complex(w)
    if z.imag <= 0 or w.imag >= 0:
        raise ValueError("need Im z > 0 and Im w < 0")
    u = (z - w) / 2j
    if u.real <= 0:
        raise BranchError(f"Re((z - w)/2i) = {u.real} <= 0: principal branch ambiguous")
    eta_z = dedekind_eta(z).value
    eta_w = np.conj(dedekind_eta(np.conj(w)).value)
    return complex(np.log(2 * np.pi * np.sqrt(u) * eta_z * eta_w))


def dual_lattice_vectors(z: complex, radius: float) -> np.ndarray:
    """All dual-lattice vectors of ``Z + zZ`` with ``|kappa| <= radius`` (complex)."""
    lat = LatticeSpec(z)
    D = lat.dual_basis
    smin = np.linalg.svd(D, compute_uv=False).min()
    R = int(math.ceil(radius / smin)) + 1
    m = np.arange(-R, R + 1)
    M, Nn = np.meshgrid(m, m, indexing="ij")
    v = M.ravel()[:, None] * D[0] + Nn.ravel()[:, None] * D[1]
    k = v[:, 0] + 1j * v[:, 1]
    return k[np.abs(k) <= radius * (1 + 1e-12)]


def torus_eigenvalues(z: complex, cutoff: float) -> np.ndarray:
    """Eigenvalues ``4 pi^2 |kappa|^2 <= cutoff`` of the flat Laplacian, sorted.

    Multiplicities are counted; the constant mode contributes the single 0.
    """
    if cutoff <= 0:
        raise ValueError("cutoff must be positive")
    k = dual_lattice_vectors(z, math.sqrt(cutoff) / (2 * math.pi))
    lam = 4 * math.pi**2 * np.abs(k) ** 2
    lam[np.abs(k) == 0] = 0.0
    return np.sort(lam[lam <= cutoff])
