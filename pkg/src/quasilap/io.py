"""Binary and text containers for sampled fields, spectra and oracle records.

QLAP container layout (little endian)::

    b"QLAP"  version:u32  kind:u8  N:u32  modulus_re:f64  modulus_im:f64
    [kind == 1 only]  spacing:f64  ny:u32
    N * ny complex values as (re:f64, im:f64) pairs, row-major over values[j, k]

For torus grids (kind 0) ``N`` is the resolution and ``modulus`` the lattice
modulus.  For rectangular grids (kind 1) ``N`` is ``nx`` and ``modulus`` holds
the lower-left corner ``x0 + i y0``.
"""
from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .grid import LatticeSpec, RectGrid, SampledField, TorusGrid

MAGIC = b"QLAP"
VERSION = 1
_HEAD = struct.Struct("<4sIBIdd")
_RECT = struct.Struct("<dI")


def field_to_bytes(f: SampledField) -> bytes:
    g = f.grid
    if isinstance(g, TorusGrid):
        head = _HEAD.pack(MAGIC, VERSION, 0, g.N, g.modulus.real, g.modulus.imag)
    else:
        head = _HEAD.pack(MAGIC, VERSION, 1, g.nx, g.x0, g.y0) + _RECT.pack(g.h, g.ny)
    data = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    return head + data


def field_from_bytes(buf: bytes) -> SampledField:
    if len(buf) < _HEAD.size:
        raise ValueError("truncated QLAP header")
    magic, version, kind, n, re, im = _HEAD.unpack_from(buf, 0)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported QLAP version {version}")
    off = _HEAD.size
    if kind == 0:
        grid = TorusGrid(LatticeSpec(complex(re, im)), n)
    elif kind == 1:
        h, ny = _RECT.unpack_from(buf, off)
        off += _RECT.size
        grid = RectGrid(re, im, h, n, ny)
    else:
        raise ValueError(f"unknown grid kind {kind}")
    count = grid.shape[0] * grid.shape[1]
    values = np.frombuffer(buf, dtype="<c16", count=count, offset=off)
    if off + 16 * count != len(buf):
        raise ValueError("QLAP payload length does not match header")
    return SampledField(grid, values.reshape(grid.shape))


def save_field(f: SampledField, path) -> None:
    Path(path).write_bytes(field_to_bytes(f))


def load_field(path) -> SampledField:
    return field_from_bytes(Path(path).read_bytes())


def save_field_csv(f: SampledField, path) -> None:
    p = f.grid.points.ravel()
    v = f.values.ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["re_p", "im_p", "re_v", "im_v"])
        for a, b in zip(p, v):
            w.writerow([repr(a.real), repr(a.imag), repr(b.real), repr(b.imag)])


def save_eigenvalues_csv(eigs, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "eigenvalue"])
        for i, lam in enumerate(eigs):
            w.writerow([i, repr(float(lam))])


def oracle_record(z: complex, value, tail_bound: float) -> dict:
    value = complex(value)
    return {
        "z": [z.real, z.imag],
        "value": [value.real, value.imag],
        "tail_bound": tail_bound,
    }


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
