import json
import subprocess
import sys

import numpy as np
import pytest

from varreg import BasisSpec, CoefficientField, unit_field
from varreg.cli import main


SOLVE_TOML = """
[basis]
dimension = 1
n_modes = 16

[operator]
kind = "power"
t = 1.0

[penalty]
kind = "besov1"
s = 1.5

[solve]
alpha = 0.1

[solve.data]
kind = "synthetic"
delta = 0.05
seed = 3

[solve.data.truth]
kind = "exact_source"
u_modes = 2
u_decay = 1.0
"""

DIAGNOSE_TOML = """
[basis]
dimension = 1
n_modes = 256

[operator]
kind = "power"
t = 1.0

[penalty]
kind = "quadratic"

[diagnose]
quantity = "source_order"
grid_min = 1e-3
grid_max = 1e-1
grid_points = 6
predicted_slope = -0.5

[diagnose.target]
kind = "mu_decay"
a = 1.0
"""

SWEEP_TOML = """
[basis]
dimension = 1
n_modes = 24

[operator]
kind = "power"
t = 1.0

[penalty]
kind = "quadratic"

[truth]
kind = "exact_source"
decay = 0.5
norm = 1.0

[kappa]
source = "theorem"
setting = "gaussian_trace"

[sweep]
replicates = 3
master_seed = 5
alpha_prefactor = 1.0
delta_max = 1e-1
delta_min = 1e-3
delta_points = 4
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_kappa_subcommand(capsys):
    assert main(["kappa", "--setting", "gaussian-trace"]) == 0
    out = capsys.readouterr().out
    assert f"kappa={2/3!r}" in out
    assert "exponent=" in out


def test_kappa_with_parameters(capsys):
    assert main(["kappa", "--setting", "besov", "--s", "2", "--t", "1", "--r1", "0"]) == 0
    assert f"kappa={6/7!r}" in capsys.readouterr().out


def test_kappa_hypothesis_violation_exits_2(capsys):
    assert main(["kappa", "--setting", "besov", "--s", "0.5", "--t", "1"]) == 2
    assert "min(s, 2t)" in capsys.readouterr().err


def test_missing_config_names_path(tmp_path, capsys):
    missing = str(tmp_path / "nope.toml")
    assert main(["solve", "--config", missing, "--out", str(tmp_path)]) == 2
    assert "nope.toml" in capsys.readouterr().err


def test_invalid_toml_exits_2(tmp_path, capsys):
    cfg = write(tmp_path, "bad.toml", "not [ valid")
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 2


def test_missing_field_named(tmp_path, capsys):
    broken = SOLVE_TOML.replace("alpha = 0.1", "")
    cfg = write(tmp_path, "solve.toml", broken)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "solve.alpha" in capsys.readouterr().err


def test_solve_synthetic_writes_result(tmp_path, capsys):
    cfg = write(tmp_path, "solve.toml", SOLVE_TOML)
    out_dir = tmp_path / "out"
    assert main(["solve", "--config", cfg, "--out", str(out_dir)]) == 0
    target = capsys.readouterr().out.strip().splitlines()[-1]
    payload = json.loads(open(target).read())
    assert payload["seed"] == 3
    assert payload["alpha"] == 0.1
    assert payload["optimality_residual"] <= 1e-8
    assert len(payload["u"]["coeffs"]) == 16
    assert payload["config_hash"]


def test_solve_from_field_file(tmp_path, capsys):
    basis = BasisSpec(1, 16)
    field_path = tmp_path / "data.json"
    field_path.write_text((3.0 * unit_field(basis, 1, "Zdual")).to_json())
    toml = SOLVE_TOML.replace(
        'kind = "synthetic"\ndelta = 0.05\nseed = 3',
        f'kind = "file"\npath = "{field_path}"',
    )
    toml = toml.split("[solve.data.truth]")[0]
    cfg = write(tmp_path, "solve_file.toml", toml)
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == 0
    target = capsys.readouterr().out.strip().splitlines()[-1]
    payload = json.loads(open(target).read())
    assert payload["seed"] is None


def test_diagnose_report_fields(tmp_path, capsys):
    cfg = write(tmp_path, "diag.toml", DIAGNOSE_TOML)
    assert main(["diagnose", "--config", cfg, "--out", str(tmp_path)]) == 0
    target = capsys.readouterr().out.strip().splitlines()[-1]
    report = json.loads(open(target).read())
    assert report["quantity"] == "source_order"
    assert len(report["grid"]) == 6
    assert report["predicted_slope"] == -0.5
    assert report["fitted_slope"] == pytest.approx(-0.5, abs=0.1)
    assert report["residual"] < 0.05
    assert report["r_hat"] == pytest.approx(0.5, abs=0.1)


def test_diagnose_e_curve(tmp_path, capsys):
    toml = DIAGNOSE_TOML.replace('quantity = "source_order"', 'quantity = "e_curve"\nalpha = 1.0')
    toml = toml.replace('kind = "mu_decay"\na = 1.0',
                        'kind = "noise_pushforward"\nseed = 11')
    cfg = write(tmp_path, "diag2.toml", toml)
    assert main(["diagnose", "--config", cfg, "--out", str(tmp_path)]) == 0
    target = capsys.readouterr().out.strip().splitlines()[-1]
    report = json.loads(open(target).read())
    assert report["seed"] == 11
    assert len(report["values"]) == 6
    assert all(v >= 0.0 for v in report["values"])


def test_sweep_outputs_and_seed_override_determinism(tmp_path, capsys):
    cfg = write(tmp_path, "sweep.toml", SWEEP_TOML)
    out1 = tmp_path / "r1"
    out2 = tmp_path / "r2"
    assert main(["sweep", "--config", cfg, "--out", str(out1), "--seed", "7"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    csv1, json1 = lines[-2], lines[-1]
    assert main(["sweep", "--config", cfg, "--out", str(out2), "--seed", "7",
                 "--threads", "3"]) == 0
    lines2 = capsys.readouterr().out.strip().splitlines()
    csv2, json2 = lines2[-2], lines2[-1]
    assert open(csv1, "rb").read() == open(csv2, "rb").read()
    assert open(json1, "rb").read() == open(json2, "rb").read()
    summary = json.loads(open(json1).read())
    assert summary["master_seed"] == 7
    # a different seed changes the per-replicate outcomes
    out3 = tmp_path / "r3"
    assert main(["sweep", "--config", cfg, "--out", str(out3), "--seed", "8"]) == 0
    csv3 = capsys.readouterr().out.strip().splitlines()[-2]
    assert open(csv1, "rb").read() != open(csv3, "rb").read()


def test_sweep_verbose_prints_per_delta_lines(tmp_path, capsys):
    cfg = write(tmp_path, "sweep.toml", SWEEP_TOML)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "v"),
                 "--verbose"]) == 0
    out = capsys.readouterr().out
    assert out.count("delta=") == 4


def test_sweep_runtime_failure_exits_1(tmp_path, capsys):
    toml = SWEEP_TOML + '\n[solver]\ntol = 1e-16\nmax_iter = 2\n'
    toml = toml.replace('kind = "quadratic"', 'kind = "besov1"\ns = 1.5')
    toml = toml.replace('kind = "exact_source"\ndecay = 0.5\nnorm = 1.0',
                        'kind = "exact_source"\nu_modes = 2\nu_decay = 1.0')
    cfg = write(tmp_path, "sweep_fail.toml", toml)
    assert main(["sweep", "--config", cfg, "--out", str(tmp_path / "f")]) == 1
    assert "delta=" in capsys.readouterr().err


def test_console_script_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "varreg.cli", "kappa", "--setting", "gaussian-eigen",
         "--m", "0.6"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert f"kappa={2/2.6!r}" in proc.stdout
