import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import gamma

from quasilap.oracles import (
    BranchError,
    dedekind_eta,
    dual_lattice_vectors,
    torus_eigenvalues,
    torus_logdet_exact,
    torus_logdet_extension,
)

upper = st.builds(complex, st.floats(-0.5, 0.5), st.floats(0.6, 2.5))


def test_eta_at_i_closed_form():
    # eta(i) = Gamma(1/4) / (2 pi^(3/4))
    ref = gamma(0.25) / (2 * math.pi**0.75)
    e = dedekind_eta(1j)
    assert abs(e.value - ref) < 1e-15
    assert abs(e.value - 0.768225422) < 1e-9
    assert e.tail_bound <= 1e-16


def test_eta_translation():
    z = 0.3 + 0.8j
    lhs = dedekind_eta(z + 1).value
    rhs = np.exp(1j * math.pi / 12) * dedekind_eta(z).value
    assert abs(lhs - rhs) < 1e-14


@given(upper)
def test_eta_inversion(z):
    # eta(-1/z) = sqrt(-i z) eta(z)
    lhs = dedekind_eta(-1 / z).value
    rhs = np.sqrt(-1j * z) * dedekind_eta(z).value
    assert abs(lhs - rhs) < 1e-12 * abs(rhs)


@pytest.mark.parametrize("z", [-1j, 0.2 + 0.01j])
def test_eta_rejects(z):
    with pytest.raises(ValueError):
        dedekind_eta(z)


@given(upper)
def test_logdet_modular_invariance(z):
    a = torus_logdet_exact(z)
    assert abs(torus_logdet_exact(z + 1) - a) < 1e-12
    assert abs(torus_logdet_exact(-1 / z) - a) < 1e-11


def test_extension_restricts_to_exact():
    for z in (1j, 0.5 + 1j, 0.3 + 0.8j):
        assert abs(torus_logdet_extension(z, np.conj(z)) - torus_logdet_exact(z)) < 1e-14


def test_extension_rejects_wrong_half_planes():
    with pytest.raises(ValueError):
        torus_logdet_extension(1j, 0.5j)
    assert issubclass(BranchError, ValueError)
    with pytest.raises(ValueError):
        torus_logdet_extension(1j, 1j)


def test_eigenvalues_square():
    lam = torus_eigenvalues(1j, 100)
    assert lam[0] == 0 and np.sum(lam == 0) == 1
    assert np.allclose(lam[1:5], 4 * math.pi**2)
    assert lam[5] > 4 * math.pi**2 + 1


def test_eigenvalues_tall():
    lam = torus_eigenvalues(2j, 50)
    assert np.allclose(lam[1:3], math.pi**2)
    assert lam[3] > math.pi**2 + 1


def test_weyl_law():
    for z in (1j, 0.5 + 1j, 0.2 + 1.7j):
        count = torus_eigenvalues(z, 4000).size
        assert abs(count - z.imag * 4000 / (4 * math.pi)) < 0.05 * count


@given(upper, st.floats(1.0, 4.0))
def test_dual_vectors_symmetric(z, r):
    k = dual_lattice_vectors(z, r)
    assert np.all(np.abs(k) <= r * (1 + 1e-12))
    assert k.size % 2 == 1
    s = np.sort_complex(np.round(k, 10))
    assert np.allclose(s, np.sort_complex(np.round(-k, 10)))
