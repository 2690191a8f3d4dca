"""End-to-end tests of the command-line entry points and run configuration."""

import json

import numpy as np
import pytest

from cylfronts.cli import main
from cylfronts.config import load_config, parse_config
from cylfronts.errors import ConfigurationError
from cylfronts.grid import load_field


def _run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _field(out, name):
    for line in out.splitlines():
        parts = line.split()
        if parts and parts[0] == name:
            return parts[1:]
    raise AssertionError(f"no line starting with {name!r} in output:\n{out}")


def test_verify_all_pass(capsys):
    code, out, _ = _run(capsys, ["verify"])
    assert code == 0
    lines = [l for l in out.splitlines() if l]
    assert len(lines) >= 9
    assert all(l.startswith("PASS ") for l in lines)


def test_conjugate_robin_table(capsys):
    code, out, _ = _run(capsys, ["conjugate", "--problem", "robin", "--lam", "0.3"])
    assert code == 0
    slopes = [float(s) for s in _field(out, "conjugate_slopes")]
    assert slopes == pytest.approx([0.0, 0.3], abs=1e-14)
    root, _, G = _field(out, "excluded_root")
    assert float(root) == pytest.approx(0.15, abs=1e-12)
    assert float(G) == pytest.approx(5.0625e-4, rel=1e-12)


def test_conjugate_bore_table(capsys):
    code, out, _ = _run(capsys, ["conjugate", "--problem", "bore", "--lam", "0.5"])
    assert code == 0
    assert float(_field(out, "lambda_star")[0]) == pytest.approx(2.0 / 3.0)
    assert float(_field(out, "froude_squared")[0]) == pytest.approx(1.0 / 3.0)
    s_rest = float(_field(out, "flow_force_rest")[0])
    s_conj = float(_field(out, "flow_force_conjugate")[0])
    assert s_rest == pytest.approx(0.90625, abs=1e-3)
    assert s_conj == pytest.approx(s_rest, abs=1e-12)


def test_conjugate_bore_rejects_unstable_stratification(capsys):
    code, out, err = _run(
        capsys, ["conjugate", "--problem", "bore", "--rho1", "0.25", "--rho2", "1.0"]
    )
    assert code == 2
    assert "rho2 < rho1" in err


def test_eigen_robin_constant_slope(capsys):
    code, out, _ = _run(capsys, ["eigen", "--problem", "robin", "--gz", "1.0"])
    assert code == 0
    assert float(_field(out, "sigma0")[0]) == pytest.approx(
        -np.pi**2 / 4.0, abs=1e-2
    )
    assert _field(out, "positivity_ok")[0] == "True"
    # a destabilizing boundary coefficient flips the sign of sigma0
    code2, out2, _ = _run(capsys, ["eigen", "--problem", "robin", "--gz", "-1.0"])
    assert code2 == 0
    assert float(_field(out2, "sigma0")[0]) == pytest.approx(3.66726, abs=1e-2)


def test_eigen_bore_default_is_critical(capsys):
    # with no --lam the bore eigenreport is taken at lambda_star, where the
    # upstream principal eigenvalue vanishes
    code, out, _ = _run(capsys, ["eigen", "--problem", "bore", "--ny", "41"])
    assert code == 0
    assert abs(float(_field(out, "sigma0")[0])) <= 1e-2
    assert float(_field(out, "residual")[0]) <= 1e-8


def test_seed_roundtrip(tmp_path, capsys):
    out_file = str(tmp_path / "seed.txt")
    code, out, _ = _run(
        capsys,
        ["seed", "--problem", "robin", "--lam", "0.1", "--half-length", "40",
         "--nx", "81", "--ny", "11", "--out-file", out_file],
    )
    assert code == 0
    assert float(_field(out, "lam")[0]) == pytest.approx(0.1)
    f = load_field(out_file)
    assert f.values.shape == (81, 11)
    assert np.max(np.abs(f.values)) <= 0.1 + 1e-12


def _write_config(path, out_dir, **cont_over):
    cont = {
        "seed_param": 0.1,
        "ds": 0.005,
        "ds_max": 0.01,
        "max_steps": 3,
        "tol_flow_force": 1e-4,
    }
    cont.update(cont_over)
    doc = {
        "grid": {"half_length": 60.0, "nx": 101, "ny": 11},
        "problem": {"kind": "robin"},
        "continuation": cont,
        "output": {"directory": str(out_dir)},
    }
    path.write_text(json.dumps(doc))
    return doc


def test_continue_clean_run(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    out_dir = tmp_path / "out"
    _write_config(cfg, out_dir)
    code, out, _ = _run(capsys, ["--config", str(cfg), "--quiet", "continue"])
    assert code == 0
    assert "termination step_budget" in out
    csv = (out_dir / "branch.csv").read_text()
    assert csv.splitlines()[-1] == "termination,step_budget"
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["termination"] == "step_budget"
    assert summary["n_points"] == 4
    assert summary["info"]["config"]["seed_param"] == 0.1


def test_continue_is_deterministic(tmp_path, capsys):
    csvs = []
    for tag in ("a", "b"):
        cfg = tmp_path / f"run_{tag}.json"
        out_dir = tmp_path / f"out_{tag}"
        _write_config(cfg, out_dir)
        code, _, _ = _run(capsys, ["--config", str(cfg), "--quiet", "continue"])
        assert code == 0
        csvs.append((out_dir / "branch.csv").read_bytes())
    assert csvs[0] == csvs[1]


def test_continue_malformed_config_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text("{not json")
    code, _, err = _run(capsys, ["--config", str(cfg), "continue"])
    assert code == 2
    assert "config error" in err
    cfg2 = tmp_path / "bad2.json"
    _write_config(cfg2, tmp_path)
    doc = json.loads(cfg2.read_text())
    doc["continuation"]["nonsense_key"] = 1
    cfg2.write_text(json.dumps(doc))
    code2, _, err2 = _run(capsys, ["--config", str(cfg2), "continue"])
    assert code2 == 2
    assert "continuation.nonsense_key" in err2
    code3, _, err3 = _run(capsys, ["continue"])
    assert code3 == 2


def test_continue_unwritable_output_exits_3(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("")
    cfg = tmp_path / "run.json"
    _write_config(cfg, blocker / "sub")
    code, _, err = _run(capsys, ["--config", str(cfg), "continue"])
    assert code == 3
    assert "not writable" in err


def test_parse_config_defaults_and_errors():
    rc = parse_config({"continuation": {"seed_param": 0.1}})
    assert rc.grid["nx"] == 401
    assert rc.grid["half_length"] == 80.0
    assert rc.problem["kind"] == "robin"
    assert rc.continuation["ds"] == 0.002
    assert rc.output["csv_name"] == "branch.csv"
    with pytest.raises(ConfigurationError, match="unknown section"):
        parse_config({"grids": {}})
    with pytest.raises(ConfigurationError, match="grid.nx"):
        parse_config({"grid": {"nx": 10.5}, "continuation": {"seed_param": 0.1}})
    with pytest.raises(ConfigurationError, match="continuation.seed_param"):
        parse_config({})
    with pytest.raises(ConfigurationError, match="problem.kind"):
        parse_config(
            {"problem": {"kind": "poisson"}, "continuation": {"seed_param": 0.1}}
        )


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_config(str(tmp_path / "does_not_exist.json"))
