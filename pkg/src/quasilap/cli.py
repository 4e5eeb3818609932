"""Command line entry point: ``quasilap <subcommand> [options]``.

Every run writes ``<name>.json`` (result, checks, pass flag) into the output
directory and records its checks in ``manifest.json`` there.  Sweeps with a
``--format csv`` also write ``<name>.csv``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error.

CSV columns
    symbol-angle   t, eps, max_abs_arg, arg_prefactor, arg_one_minus_mu_nubar, arg_df, arg_quadratic
    det-sweep      eps, min_gap, log_det_re, log_det_im, res_s, res_t, N, theta
    beltrami-solve re_p, im_p, re_v, im_v (the normalized map; a QLAP binary is written too)
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config, parse_complex, resolve_out
from .io import dump_json, save_field, save_field_csv
from .presets import parse_preset

MANIFEST = "manifest.json"


def _add_common(p, *, grid=True, N=32):
    p.add_argument("--config", help="INI experiment file; flags override its values")
    p.add_argument("--out", help="output directory (else $QUASILAP_OUT, else the config value)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    if grid:
        p.add_argument("--z", "--modulus", dest="modulus", default=None, help="lattice modulus, e.g. i or 0.3+1.1i")
        p.add_argument("--N", type=int, default=None, help=f"grid size (default {N})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasilap", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("torus-det", help="zeta determinant of a flat torus against the eta oracle")
    _add_common(p, N=64)

    p = sub.add_parser("beltrami-solve", help="solve the torus Beltrami equation for a preset")
    _add_common(p, N=128)
    p.add_argument("--preset", default=None, help="e.g. constant:0.3, fourier:1,0,0.2")
    p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("symbol-angle", help="principal-symbol angle along a 3-point sweep")
    _add_common(p, N=64)
    p.add_argument("--mu", default=None)
    p.add_argument("--nu", default=None)

    p = sub.add_parser("det-sweep", help="gap, log det and holomorphy along nu = mu + eps * direction")
    _add_common(p, N=32)
    p.add_argument("--mu", default=None)
    p.add_argument("--nu", default=None, help="direction d of the sweep nu = mu + eps d")
    p.add_argument("--mu1", default=None)
    p.add_argument("--nu1", default=None)
    p.add_argument("--eps", default=None, help="comma separated list")
    p.add_argument("--h", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--jobs", type=int, default=None)

    p = sub.add_parser("holomorphy-check", help="CR residuals of log det' in s and t")
    _add_common(p, N=32)
    for k in ("mu", "nu", "mu1", "nu1"):
        p.add_argument(f"--{k}", default=None)
    p.add_argument("--h", type=float, default=None)

    p = sub.add_parser("potential-verify", help="cone potential and genus-1 examples")
    _add_common(p, grid=False)
    p.add_argument("--seed", type=int, default=None)

    p = sub.add_parser("report", help="print the pass/fail table of an output directory")
    p.add_argument("dir", nargs="?", default=None)
    return ap


_DEFAULTS = {
    "torus-det": {"N": 64},
    "beltrami-solve": {"N": 128, "mu": "fourier:1,0,0.3"},
    "symbol-angle": {"N": 64, "mu": "constant:0.2", "nu": "constant:0.24"},
    "det-sweep": {"N": 32, "mu": "fourier:1,0,0.1", "nu": "constant:1", "mu1": "constant:0.05", "nu1": "constant:0.05"},
    "holomorphy-check": {"N": 32, "mu": "constant:0.1", "nu": "constant:0.1", "mu1": "constant:0.05", "nu1": "constant:0.05"},
    "potential-verify": {},
}


def make_config(args) -> ExperimentConfig:
    name = args.command
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        if cfg.name != name:
            raise ConfigError(f"config is for {cfg.name!r}, not {name!r}")
    else:
        cfg = ExperimentConfig(name=name)
        for k, v in _DEFAULTS[name].items():
            setattr(cfg, k, v)
    if getattr(args, "modulus", None):
        cfg.modulus = parse_complex(args.modulus)
    for key in ("N", "mu", "nu", "mu1", "nu1", "tol", "theta", "rho", "seed", "jobs", "format"):
        v = getattr(args, key, None)
        if v is not None:
            setattr(cfg, key, v)
    if getattr(args, "preset", None):
        cfg.mu = args.preset
    if getattr(args, "eps", None):
        try:
            cfg.eps = [float(x) for x in args.eps.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"bad --eps {args.eps!r}") from None
    if getattr(args, "h", None) is not None:
        cfg.h = [args.h]
    cfg.out = str(resolve_out(getattr(args, "out", None), cfg.out if getattr(args, "config", None) else None))
    return cfg.validate()


def run_experiment(cfg: ExperimentConfig):
    from . import experiments as ex

    if cfg.name == "torus-det":
        return ex.torus_det(cfg.modulus, cfg.N)
    if cfg.name == "beltrami-solve":
        return ex.beltrami_solve(cfg.mu, cfg.N, cfg.modulus, cfg.tol)
    if cfg.name == "symbol-angle":
        return ex.symbol_angle(cfg.mu, cfg.nu, cfg.N, cfg.modulus)
    if cfg.name == "det-sweep":
        return ex.det_sweep(cfg.mu, cfg.nu, cfg.eps, cfg.N, cfg.modulus, cfg.mu1, cfg.nu1, cfg.h[0], cfg.theta, cfg.rho, min(cfg.tol, 1e-13), cfg.jobs)
    if cfg.name == "holomorphy-check":
        return ex.holomorphy_check(cfg.mu, cfg.nu, cfg.mu1, cfg.nu1, cfg.N, cfg.modulus, cfg.h[0], cfg.theta, cfg.rho, min(cfg.tol, 1e-13))
    if cfg.name == "potential-verify":
        return ex.potential_verify(cfg.seed)
    raise ConfigError(f"unknown experiment {cfg.name!r}")


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


def record(out: Path, run: str, checks, config_hash: str = "") -> None:
    """Merge ``checks`` into ``out/manifest.json`` under ``run``."""
    out.mkdir(parents=True, exist_ok=True)
    path = out / MANIFEST
    manifest = json.loads(path.read_text()) if path.exists() else {"schema": 1, "runs": {}}
    manifest["versions"] = {"quasilap": __version__, "numpy": np.__version__, "scipy": scipy.__version__}
    manifest["runs"][run] = {"config_hash": config_hash, "checks": [asdict(c) for c in checks]}
    manifest["runs"] = dict(sorted(manifest["runs"].items()))
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_jsonable) + "\n")


def write_outputs(cfg: ExperimentConfig, outcome) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    doc = outcome.to_json()
    doc["config"] = cfg.to_dict()
    doc["config_hash"] = cfg.digest()
    (out / f"{cfg.name}.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=_jsonable) + "\n")
    if outcome.table and cfg.format == "csv":
        with open(out / f"{cfg.name}.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(outcome.columns)
            for row in outcome.table:
                w.writerow([repr(float(v)) for v in row])
    wmap = getattr(outcome, "map", None)
    if wmap is not None:
        save_field(wmap.map_values, out / f"{cfg.name}.qlap")
        if cfg.format == "csv":
            save_field_csv(wmap.map_values, out / f"{cfg.name}.csv")
    record(out, cfg.name, outcome.checks, cfg.digest())
    return out


def report(directory) -> int:
    path = Path(directory) / MANIFEST
    if not path.exists():
        print(f"no {MANIFEST} in {directory}", file=sys.stderr)
        return 2
    manifest = json.loads(path.read_text())
    rows = [(run, c) for run, entry in manifest["runs"].items() for c in entry["checks"]]
    width = max((len(c["name"]) for _, c in rows), default=10)
    print(f"{'run':<18} {'crit':>4}  {'check':<{width}}  {'value':>10}  {'tol':>8}  result")
    for run, c in rows:
        flag = "PASS" if c["passed"] else "FAIL"
        crit = c.get("criterion") or "-"
        print(f"{run:<18} {crit:>4}  {c['name']:<{width}}  {c['value']:>10.3e}  {c['op']}{c['tolerance']:>7.1e}  {flag}")
    failed = sum(not c["passed"] for _, c in rows)
    print(f"{len(rows) - failed}/{len(rows)} checks pass")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "report":
        import os

        return report(args.dir or os.environ.get("QUASILAP_OUT") or "quasilap-out")
    try:
        cfg = make_config(args)
        for key in ("mu", "nu", "mu1", "nu1"):
            parse_preset(getattr(cfg, key))
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        outcome = run_experiment(cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = write_outputs(cfg, outcome)
    print(json.dumps(outcome.to_json(), indent=2, sort_keys=True, default=_jsonable))
    for c in outcome.checks:
        print(c.line(), file=sys.stderr)
    print(f"wrote {out}", file=sys.stderr)
    return 0 if outcome.passed else 1


if __name__ == "__main__":
    sys.exit(main())
