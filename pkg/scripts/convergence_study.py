"""Convergence tables: Beltrami residual vs N, CR residual vs h, variation error vs h.

    python3 scripts/convergence_study.py --out runs/convergence
"""
import argparse
import csv
from pathlib import Path

import numpy as np

from quasilap.beltrami import BeltramiCoefficient, solve_torus
from quasilap.determinant import variation_check
from quasilap.grid import SampledField, cr_residual, make_torus_grid
from quasilap.operators import delta_mn
from quasilap.oracles import torus_logdet_extension
from quasilap.presets import sample


def beltrami_table(preset, sizes):
    rows = []
    for N in sizes:
        w = solve_torus(BeltramiCoefficient.from_field(sample(preset, make_torus_grid(1j, N))))
        rows.append((N, w.residual, w.iterations, w.normalization["z_prime"].real, w.normalization["z_prime"].imag))
    return ("N", "residual", "iterations", "re_z_prime", "im_z_prime"), rows


def cr_table(z, w, steps):
    rows = []
    for h in steps:
        rz = cr_residual(lambda s: torus_logdet_extension(s, w), z, h)
        rw = cr_residual(lambda s: torus_logdet_extension(z, s), w, h)
        rows.append((h, rz, rw))
    return ("h", "res_z", "res_w"), rows


def variation_table(steps, N=16):
    g = make_torus_grid(1j, N)
    mu = BeltramiCoefficient.from_field(sample("fourier:1,0,0.1", g))
    nu = BeltramiCoefficient.from_field(sample("fourier:1,1,0.08", g))
    m1 = sample("fourier:0,1,0.1", g).values

    def fam(s):
        return delta_mn(BeltramiCoefficient.from_field(SampledField(g, mu.values + s * m1)), nu)

    rows = [(h, variation_check(fam, h=h, order=2), variation_check(fam, h=h, order=4)) for h in steps]
    return ("h", "order2", "order4"), rows


def write(path, cols, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        w.writerows(rows)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", default="runs/convergence")
    ap.add_argument("--preset", default="fourier:1,0,0.3")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    tables = {
        "beltrami_residual": beltrami_table(args.preset, (16, 32, 64, 128, 256)),
        "extension_cr": cr_table(0.1 + 0.5j, 0.1 - 0.6j, (1e-2, 1e-3, 1e-4, 1e-5)),
        "variation": variation_table((1e-2, 1e-3, 1e-4)),
    }
    for name, (cols, rows) in tables.items():
        write(out / f"{name}.csv", cols, rows)
        print(name)
        print("  " + "  ".join(f"{c:>12}" for c in cols))
        for r in rows:
            print("  " + "  ".join(f"{float(np.real(v)):>12.4g}" for v in r))


if __name__ == "__main__":
    main()
