import json

import pytest
from hypothesis import given, strategies as st

from quasilap.cli import main
from quasilap.config import ConfigError, ExperimentConfig, load_config, parse_complex, resolve_out
from quasilap.experiments import Check, linear_fit


@pytest.mark.parametrize(
    "text,value",
    [("i", 1j), ("2i", 2j), ("i/2", 0.5j), ("1/2+i", 0.5 + 1j), ("1/3+2i", 1 / 3 + 2j), ("0.3+1.1j", 0.3 + 1.1j), ("-0.5-2e-1i", -0.5 - 0.2j)],
)
def test_parse_complex(text, value):
    assert abs(parse_complex(text) - value) < 1e-15


@given(st.floats(-10, 10), st.floats(0.01, 10))
def test_parse_complex_roundtrip(a, b):
    assert abs(parse_complex(f"{a!r}+{b!r}j") - complex(a, b)) < 1e-12


@pytest.mark.parametrize("bad", ["", "abc", "1+", "2/i", "1..2"])
def test_parse_complex_rejects(bad):
    with pytest.raises(ConfigError):
        parse_complex(bad)


INI = """[experiment]
schema = 1
name = symbol-angle

[grid]
modulus = 0.3+1.1j
N = 16

[beltrami]
mu = constant:0.2
nu = constant:0.24

[output]
dir = {out}
format = csv
"""


def test_load_config(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(INI.format(out=tmp_path / "o"))
    cfg = load_config(p)
    assert cfg.name == "symbol-angle" and cfg.N == 16 and cfg.modulus == 0.3 + 1.1j
    assert cfg.format == "csv"
    other = ExperimentConfig(**{**cfg.__dict__, "out": "elsewhere", "jobs": 4})
    assert other.digest() == cfg.digest()


@pytest.mark.parametrize(
    "edit",
    [("schema = 1", "schema = 2"), ("N = 16", "N = 15"), ("constant:0.2", "constant:1.5x"), ("format = csv", "format = xml"), ("symbol-angle", "nope")],
)
def test_config_errors(tmp_path, edit):
    p = tmp_path / "c.ini"
    p.write_text(INI.format(out=tmp_path).replace(*edit))
    with pytest.raises(ConfigError):
        load_config(p)


def test_output_precedence(monkeypatch, tmp_path):
    monkeypatch.setenv("QUASILAP_OUT", str(tmp_path / "env"))
    assert resolve_out("flag", "cfg").name == "flag"
    assert resolve_out(None, "cfg").name == "env"
    monkeypatch.delenv("QUASILAP_OUT")
    assert resolve_out(None, "cfg").name == "cfg"
    assert resolve_out(None, None).name == "quasilap-out"


def test_check_rows():
    assert Check("a", 1e-12, 1e-10).passed
    assert not Check("a", 0.5, 0.99, ">=").passed
    assert not Check("a", float("nan"), 1.0).passed
    with pytest.raises(ValueError):
        Check("a", 1, 1, "<")
    a, b, r2 = linear_fit([1, 2, 3], [2, 4, 6])
    assert abs(a) < 1e-12 and abs(b - 2) < 1e-12 and abs(r2 - 1) < 1e-12


def test_torus_det_cli(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["torus-det", "--z", "0.5+1i", "--N", "16", "--out", str(out)]) == 0
    doc = json.loads((out / "torus-det.json").read_text())
    assert doc["pass"] and doc["config"]["N"] == 16
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["schema"] == 1 and "torus-det" in manifest["runs"]
    assert set(manifest["versions"]) == {"quasilap", "numpy", "scipy"}
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    assert "PASS" in capsys.readouterr().out


def test_config_file_cli(tmp_path):
    p = tmp_path / "c.ini"
    p.write_text(INI.format(out=tmp_path / "o"))
    assert main(["symbol-angle", "--config", str(p)]) == 0
    rows = (tmp_path / "o" / "symbol-angle.csv").read_text().splitlines()
    assert rows[0].startswith("t,eps,max_abs_arg") and len(rows) == 4
    with pytest.raises(SystemExit):
        main(["torus-det", "--config", str(p), "--N", "x"])
    assert main(["torus-det", "--config", str(p)]) == 2


def test_beltrami_cli_writes_container(tmp_path):
    from quasilap.io import load_field

    out = tmp_path / "b"
    assert main(["beltrami-solve", "--preset", "fourier:1,0,0.3", "--N", "32", "--out", str(out)]) == 0
    f = load_field(out / "beltrami-solve.qlap")
    assert f.grid.N == 32


def test_cli_errors(tmp_path, monkeypatch):
    monkeypatch.delenv("QUASILAP_OUT", raising=False)
    assert main(["beltrami-solve", "--preset", "wobble:1", "--out", str(tmp_path)]) == 2
    assert main(["torus-det", "--N", "7", "--out", str(tmp_path)]) == 2
    assert main(["report", str(tmp_path / "missing")]) == 2


def test_potential_verify_cli(tmp_path):
    assert main(["potential-verify", "--seed", "1", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "potential-verify.json").read_text())
    assert all(c["passed"] for c in doc["checks"])
