"""Principal-symbol angle along flat and hyperbolic sweeps.

    python3 scripts/symbol_angle_study.py --out runs/symbol
"""
import argparse
import csv
from pathlib import Path

from quasilap.acceptance import hyperbolic_symbol_sweep
from quasilap.experiments import linear_fit, symbol_angle

EPS = (0.005, 0.01, 0.02, 0.04, 0.08)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", default="runs/symbol")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    flat = symbol_angle("constant:0.2", f"constant:{0.2 + EPS[-1]}", N=16, fractions=[e / EPS[-1] for e in EPS])
    rows += [("flat-constant", r[1], r[2]) for r in flat.table]
    four = symbol_angle("fourier:1,0,0.2", f"sum:fourier:1,0,0.2|fourier:0,1,{EPS[-1]}", N=32, fractions=[e / EPS[-1] for e in EPS])
    rows += [("flat-fourier", r[1], r[2]) for r in four.table]
    _, hang = hyperbolic_symbol_sweep(0.2, EPS)
    rows += [("hyperbolic-bump", e, a) for e, a in zip(EPS, hang)]
    with open(out / "symbol_angle.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("family", "eps", "max_abs_arg"))
        w.writerows(rows)
    for fam in ("flat-constant", "flat-fourier", "hyperbolic-bump"):
        e = [r[1] for r in rows if r[0] == fam]
        a = [r[2] for r in rows if r[0] == fam]
        icpt, slope, r2 = linear_fit(e, a)
        print(f"{fam:>16}: slope {slope:.4f}  intercept {icpt:.2e}  R^2 {r2:.6f}")


if __name__ == "__main__":
    main()
