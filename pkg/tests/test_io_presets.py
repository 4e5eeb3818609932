import numpy as np
import pytest
from hypothesis import given, strategies as st

from quasilap.grid import SampledField, make_rect_grid, make_torus_grid
from quasilap.io import field_from_bytes, field_to_bytes, load_field, oracle_record, save_field, save_field_csv
from quasilap.presets import parse_preset, sample


@given(st.sampled_from([4, 8, 16]), st.floats(-1, 1), st.floats(0.2, 3), st.integers(0, 2**31))
def test_torus_roundtrip(N, re, im, seed):
    g = make_torus_grid(complex(re, im), N)
    r = np.random.default_rng(seed)
    f = SampledField(g, r.normal(size=g.shape) + 1j * r.normal(size=g.shape))
    back = field_from_bytes(field_to_bytes(f))
    assert back.grid.N == N and back.grid.modulus == g.modulus
    assert np.array_equal(back.values, f.values)


def test_rect_roundtrip(tmp_path):
    g = make_rect_grid(1.0, 0.25)
    f = SampledField(g, g.points**2)
    save_field(f, tmp_path / "a.qlap")
    back = load_field(tmp_path / "a.qlap")
    assert np.array_equal(back.values, f.values)
    assert back.grid.h == g.h
    save_field_csv(f, tmp_path / "a.csv")
    rows = (tmp_path / "a.csv").read_text().splitlines()
    assert rows[0] == "re_p,im_p,re_v,im_v" and len(rows) == 1 + f.values.size


@pytest.mark.parametrize("mutate", ["magic", "version", "truncate", "kind"])
def test_corrupt_containers(mutate):
    g = make_torus_grid(1j, 4)
    buf = bytearray(field_to_bytes(SampledField(g, np.zeros(g.shape, dtype=complex))))
    if mutate == "magic":
        buf[0:4] = b"XXXX"
    elif mutate == "version":
        buf[4] = 9
    elif mutate == "kind":
        buf[8] = 7
    else:
        buf = buf[:-3]
    with pytest.raises(ValueError):
        field_from_bytes(bytes(buf))


def test_oracle_record():
    r = oracle_record(1j, 0.5 + 0.25j, 1e-17)
    assert r == {"z": [0.0, 1.0], "value": [0.5, 0.25], "tail_bound": 1e-17}


def test_presets():
    g = make_torus_grid(1j, 8)
    assert np.allclose(sample("constant:0.2+0.1j", g).values, 0.2 + 0.1j)
    x1, x2 = g.coords
    assert np.allclose(sample("fourier:1,2,0.3", g).values, 0.3 * np.exp(2j * np.pi * (x1 + 2 * x2)))
    s = sample("sum:constant:0.1|fourier:1,0,0.1", g).values
    assert np.allclose(s, 0.1 + 0.1 * np.exp(2j * np.pi * x1))
    b = sample("bump:0.5,0.5,0.2,0.4", g).values
    assert abs(b[4, 4] - 0.4) < 1e-12 and b[0, 0] == 0


@pytest.mark.parametrize("bad", ["nope:1", "fourier:1,2", "constant:", "bump:0,0,-1,0.3"])
def test_bad_presets(bad):
    with pytest.raises(ValueError):
        parse_preset(bad)
