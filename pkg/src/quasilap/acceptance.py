"""Acceptance suite: eleven oracle and property criteria.

``run()`` evaluates the criteria, prints one ``PASS``/``FAIL`` line per
criterion and optionally records the sub-checks in an output manifest.
Each ``criterion_<k>`` returns a list of ``Check`` rows; the criterion passes
when all of its rows pass.  Rows with ``op=">="`` and tolerance ``-inf`` are
informational (they always pass and carry a reported value).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .beltrami import BeltramiCoefficient, PlaneSolverConfig, fmn_pair, solve_torus
from .determinant import discretize, eigen_spectrum, log_det_branch, variation_check, zeta_logdet_torus
from .experiments import Check, det_sweep, holomorphy_check, linear_fit, potential_verify, symbol_angle
from .grid import CompactWindow, SampledField, cr_residual, make_torus_grid
from .operators import COEFFS, delta_mn, pullback_laplacian, restrict, symbol_report
from .oracles import torus_eigenvalues, torus_logdet_exact, torus_logdet_extension
from .presets import sample

TITLES = {
    1: "torus determinant vs eta oracle",
    2: "holomorphic extension restriction and CR",
    3: "Beltrami solver",
    4: "diagonal coincidence with the pullback Laplacian",
    5: "principal-symbol angle",
    6: "eigenvalue lower bound along a sweep",
    7: "determinant holomorphy",
    8: "variation formula",
    9: "potential construction",
    10: "pullback spectrum at the transported modulus",
    11: "contour independence of log det",
}

EPS = (0.01, 0.02, 0.04)


def _c(name, value, tol, k, op="<="):
    return Check(name, value, tol, op, criterion=str(k))


def _info(name, value, k):
    return Check(name, value, -math.inf, ">=", criterion=str(k))


def criterion_1() -> list:
    zs = [1j, 2j, 0.5 + 1j, 1 / 3 + 2j, 0.5j]
    t0 = time.perf_counter()
    rel = max(abs(zeta_logdet_torus(z).log_det.real - torus_logdet_exact(z)) / abs(torus_logdet_exact(z)) for z in zs)
    elapsed = time.perf_counter() - t0
    return [_c("max relative error over 5 moduli", rel, 1e-8, 1), _c("runtime seconds", elapsed, 5.0, 1)]


def criterion_2() -> list:
    worst = 0.0
    for x in np.linspace(0.1, 0.9, 10):
        for y in np.linspace(0.5, 2.0, 10):
            z = complex(x, y)
            worst = max(worst, abs(torus_logdet_extension(z, z.conjugate()) - torus_logdet_exact(z)))
    z0, w0, h = 1j, -1.1j, 1e-4
    res_z = cr_residual(lambda s: torus_logdet_extension(s, w0), z0, h)
    res_w = cr_residual(lambda s: torus_logdet_extension(z0, s), w0, h)
    # the same residuals over the restriction grid, paired with w = conj(z) - 0.1i; reported only
    grid_max = 0.0
    for x in np.linspace(0.1, 0.9, 10):
        for y in np.linspace(0.5, 2.0, 10):
            z = complex(x, y)
            w = z.conjugate() - 0.1j
            grid_max = max(
                grid_max,
                cr_residual(lambda s: torus_logdet_extension(s, w), z, h),
                cr_residual(lambda s: torus_logdet_extension(z, s), w, h),
            )
    return [
        _c("restriction defect on 10x10 grid", worst, 1e-12, 2),
        _c("CR residual in z at (i, -1.1i)", res_z, 1e-8, 2),
        _c("CR residual in w at (i, -1.1i)", res_w, 1e-8, 2),
        _info("CR residual max over the grid (finite-difference truncation)", grid_max, 2),
    ]


def criterion_3(pairs: int = 5, seed: int = 7) -> list:
    worst = 0.0
    for z in (1j, 0.5 + 1j, 0.2 + 1.7j):
        g = make_torus_grid(z, 32)
        for c in (0.3, -0.2 + 0.4j, 0.5j):
            mu = BeltramiCoefficient.from_field(SampledField(g, np.full(g.shape, c, dtype=complex)))
            w = solve_torus(mu)
            p = g.points
            worst = max(worst, float(np.max(np.abs(w.map_values.values - (p + c * np.conj(p)) / (1 + c)))))
    g = make_torus_grid(1j, 256)
    res = solve_torus(BeltramiCoefficient.from_field(sample("fourier:1,0,0.3", g))).residual

    cfg = PlaneSolverConfig()
    grid = cfg.grid()
    rng = np.random.default_rng(seed)
    refl = 0.0
    kmax = 0.0
    for _ in range(pairs):
        vals = []
        for _ in range(2):
            cx, cy = rng.uniform(-0.6, 0.6), rng.uniform(0.8, 1.4)
            r = rng.uniform(0.3, 0.7)
            a = rng.uniform(0.05, 0.5) * np.exp(2j * np.pi * rng.uniform())
            vals.append(sample(f"bump:{cx},{cy},{r},{a.real}{a.imag:+}j", grid))
        mu, nu = (BeltramiCoefficient.from_field(v, "window") for v in vals)
        kmax = max(kmax, mu.k, nu.k)
        fmn, fnm = fmn_pair(mu, nu, config=cfg)
        refl = max(refl, float(np.max(np.abs(np.conj(fnm.map_values.values) - fmn.map_values.values[:, ::-1]))))
    return [
        _c("constant-mu affine map", worst, 1e-12, 3),
        _c("residual certificate, fourier:1,0,0.3 at N=256", res, 1e-10, 3),
        _c("reflection identity over random bump pairs", refl, 1e-9, 3),
        _c("largest k among the pairs", kmax, 0.5, 3),
    ]


def criterion_4(count: int = 20, N: int = 128, seed: int = 11) -> list:
    rng = np.random.default_rng(seed)
    g = make_torus_grid(0.2 + 1.1j, N)
    x1, x2 = g.coords
    worst = 0.0
    for _ in range(count):
        vals = np.zeros(g.shape, dtype=complex)
        for m in range(-2, 3):
            for n in range(-2, 3):
                vals += complex(rng.normal(), rng.normal()) * np.exp(2j * np.pi * (m * x1 + n * x2)) / (1 + m * m + n * n)
        vals *= rng.uniform(0.1, 0.6) / np.max(np.abs(vals))
        mu = BeltramiCoefficient.from_field(SampledField(g, vals))
        A = delta_mn(mu, mu).scaled()
        B = pullback_laplacian(mu, solve_torus(mu)).scaled()
        worst = max(worst, max(float(np.max(np.abs(A[c] - B[c]))) for c in COEFFS))
    return [_c(f"max coefficient defect over {count} random mu at N={N}", worst, 1e-8, 4)]


def hyperbolic_symbol_sweep(base: float = 0.2, eps_values=EPS):
    """``max |arg sigma|`` on a window for ``mu = bump(base)``, ``nu = bump(base + eps)``."""
    cfg = PlaneSolverConfig()
    grid = cfg.grid()
    window = CompactWindow(-0.5, 0.5, 0.7, 1.3, 0.25)
    mu = BeltramiCoefficient.from_field(sample(f"bump:0,1,0.8,{base}", grid), "window")
    diag = symbol_report(restrict(delta_mn(mu, mu, config=cfg), window)).max_abs_arg
    angles = []
    for e in eps_values:
        nu = BeltramiCoefficient.from_field(sample(f"bump:0,1,0.8,{base + e}", grid), "window")
        angles.append(symbol_report(restrict(delta_mn(mu, nu, config=cfg), window)).max_abs_arg)
    return diag, angles


def criterion_5() -> list:
    flat = symbol_angle("constant:0.2", "constant:0.24", N=16)
    four = symbol_angle("fourier:1,0,0.2", "sum:fourier:1,0,0.2|fourier:0,1,0.04", N=32)
    hdiag, hang = hyperbolic_symbol_sweep()
    _, _, hr2 = linear_fit(EPS, hang)
    rows = []
    for label, out in (("flat constants", flat), ("flat fourier", four)):
        rows += [
            _c(f"{label}: diagonal angle", out.payload["diagonal_max_abs_arg"], 1e-10, 5),
            _c(f"{label}: linear fit R^2", out.payload["r2"], 0.99, 5, ">="),
            _c(f"{label}: max angle", max(r[2] for r in out.table), math.pi / 2, 5),
        ]
    rows += [
        _c("hyperbolic bump: diagonal angle", hdiag, 1e-10, 5),
        _c("hyperbolic bump: linear fit R^2", hr2, 0.99, 5, ">="),
        _c("hyperbolic bump: max angle", max(hang), math.pi / 2, 5),
    ]
    return rows


def criterion_6() -> list:
    out = det_sweep("fourier:1,0,0.1", "constant:1", EPS, N=32)
    p = out.payload
    return [
        _c("min nonzero |lambda| / rho across the sweep", p["min_gap"] / p["rho"], 1.0, 6, ">="),
        _info("fitted C in |gap - gap0| <= C eps", p["gap_constant_C"], 6),
        _info("diagonal gap", p["diagonal_gap"], 6),
    ]


def criterion_7() -> list:
    rows = []
    for label, args in (
        ("constant", ("constant:0.1", "constant:0.1", "constant:0.05", "constant:0.05")),
        ("fourier", ("fourier:1,0,0.1", "fourier:1,0,0.12", "fourier:1,0,0.05", "fourier:1,0,0.05")),
    ):
        out = holomorphy_check(*args, N=32, h=1e-3)
        p = out.payload
        rows += [
            _c(f"{label}: CR residual in s", p["res_s"], 1e-5, 7),
            _c(f"{label}: CR residual in t", p["res_t"], 1e-5, 7),
            _c(f"{label}: diagonal contrast ratio", p["ratio"], 10.0, 7, ">="),
        ]
    return rows


def criterion_8() -> list:
    g = make_torus_grid(1j, 16)
    mu = BeltramiCoefficient.from_field(sample("fourier:1,0,0.1", g))
    nu = BeltramiCoefficient.from_field(sample("fourier:1,1,0.08", g))
    m1 = sample("fourier:0,1,0.1", g).values

    def fam(s):
        return delta_mn(BeltramiCoefficient.from_field(SampledField(g, mu.values + s * m1)), nu)

    op = variation_check(fam, h=1e-4)
    c = BeltramiCoefficient.from_field(sample("constant:0.1", g))
    c1 = sample("fourier:1,1,0.1", g).values
    const = variation_check(lambda s: delta_mn(BeltramiCoefficient.from_field(SampledField(g, c.values + s * c1)), c), h=1e-4)
    d1 = variation_check(lambda s: np.diag([1 + s, 2, 3]), h=1e-3, kernel_dim=0)
    d2 = variation_check(lambda s: np.diag([0, 1 + s, 2 + s**2, 3 - 2j * s]), s0=0.3, h=1e-3, kernel_dim=1)
    return [
        _c("operator family at N=16, h=1e-4", op, 1e-6, 8),
        _c("constant (0.1, 0.1) family at N=16, h=1e-4", const, 1e-6, 8),
        _c("diag(1+s, 2, 3)", d1, 1e-10, 8),
        _c("diag(0, 1+s, 2+s^2, 3-2is) at s=0.3", d2, 1e-10, 8),
    ]


_C9 = (
    "closed-form log potential",
    "mixed Hessian, (z-w)^-2 at (i, -1.2i)",
    "mixed Hessian, random cubic polynomials",
)


def criterion_9() -> list:
    out = potential_verify(0)
    return [c for c in out.checks if c.name in _C9]


def criterion_10(c: complex = 0.3 + 0.1j, z: complex = 1j, N: int = 64, modes: int = 20) -> list:
    g = make_torus_grid(z, N)
    mu = BeltramiCoefficient.from_field(SampledField(g, np.full(g.shape, c, dtype=complex)))
    zp = (z + c * np.conj(z)) / (1 + c)
    S = eigen_spectrum(discretize(delta_mn(mu, mu)))
    got = np.sort(S.eigenvalues.real)[1 : modes + 1]
    ref = torus_eigenvalues(zp, 1.5 * got[-1] + 1)[1 : modes + 1]
    return [
        _c(f"first {modes} modes vs oracle at z'", float(np.max(np.abs(got - ref))), 1e-6, 10),
        _c("largest imaginary part", float(np.max(np.abs(S.eigenvalues.imag))), 1e-6, 10),
    ]


def criterion_11(thetas=(math.pi, 0.05, -0.05)) -> list:
    g = make_torus_grid(1j, 16)
    mu = BeltramiCoefficient.from_field(sample("constant:0.2", g))
    nu = BeltramiCoefficient.from_field(sample("constant:0.3j", g))
    A = discretize(delta_mn(mu, nu))
    results = [log_det_branch(eigen_spectrum(A, theta)) for theta in thetas]
    base = results[0].log_det
    defect = 0.0
    distinct = set()
    for r in results[1:]:
        d = r.log_det - base
        k = d.imag / (2 * math.pi)
        defect = max(defect, abs(d.real), abs(k - round(k)) * 2 * math.pi)
        distinct.add(round(k))
    return [
        _c("distance of branch differences from 2 pi i Z", defect, 1e-9, 11),
        _info("distinct nonzero branch offsets", float(len(distinct - {0})), 11),
    ]


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 12)}


@dataclass
class CriterionResult:
    number: int
    checks: list
    seconds: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        parts = "; ".join(f"{c.name} {c.value:.3g}" + ("" if c.tolerance == -math.inf else f" {c.op} {c.tolerance:.3g}") for c in self.checks)
        return f"{flag} criterion {self.number:>2} ({TITLES[self.number]}, {self.seconds:.1f}s): {parts}"


def evaluate(number: int) -> CriterionResult:
    t0 = time.perf_counter()
    checks = CRITERIA[number]()
    return CriterionResult(number, checks, time.perf_counter() - t0)


def run(numbers=None, out: Optional[Path] = None, echo=print) -> list:
    """Evaluate criteria, echo one line each, optionally record them in ``out/manifest.json``."""
    from .cli import record

    results = []
    for k in numbers or sorted(CRITERIA):
        r = evaluate(k)
        echo(r.line())
        results.append(r)
    if out is not None:
        record(Path(out), "acceptance", [c for r in results for c in r.checks])
    return results
