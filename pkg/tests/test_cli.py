import csv
import json
import math
import re
import subprocess
import sys

import pytest

from mattersim.cli import main


@pytest.fixture
def run(tmp_path, capsys):
    def _run(command, cfg, *flags, out="out.csv"):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        argv = [command, "--config", str(path), *flags]
        target = None
        if out is not None:
            target = tmp_path / out
            argv += ["--out", str(target)]
        code = main(argv)
        captured = capsys.readouterr()
        return code, target, captured
    return _run


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_bands_free_particle(run):
    code, out, _ = run("bands", {"q": 0.0, "n_kappa": 8, "n_bands": 4})
    assert code == 0
    rows = read_csv(out)
    assert rows[0] == ["kappa", "band", "energy"]
    for k, _, e in rows[1:]:
        k, e = float(k), float(e)
        assert min(abs(e - (k + 2 * p) ** 2) for p in range(-4, 5)) <= 1e-10


def test_bands_gap_at_zone_edge(run):
    code, out, _ = run("bands", {"q": 0.01, "n_kappa": 4, "n_bands": 2})
    rows = [r for r in read_csv(out)[1:] if float(r[0]) == 1.0]
    assert float(rows[1][2]) - float(rows[0][2]) == pytest.approx(0.02, rel=1e-3)


def test_diffract_raman_nath(run):
    code, out, _ = run("diffract", {"mode": "analytic", "gamma": 1.17})
    assert code == 0
    rows = {int(r[0]): (float(r[1]), float(r[2])) for r in read_csv(out)[1:]}
    assert rows[0][0] == pytest.approx(0.47, abs=0.01)


def test_diffract_bragg_phase_of_zero_order(run):
    cfg = {"mode": "analytic", "initial_order": 0,
           "pulse": {"shape": "rectangular", "q_max": "pi", "tau_start": 0.0,
                     "tau_end": 157.07963267948966}}
    code, out, _ = run("diffract", cfg)
    rows = {int(r[0]): float(r[2]) for r in read_csv(out)[1:]}
    assert abs(rows[0]) == pytest.approx(math.pi, abs=1e-9)


def test_diffract_numeric_free_flight(run):
    cfg = {"mode": "numeric", "initial_state": {"-1": [0.6, 0.0], "1": [0.0, 0.8]},
           "tau_a": 0.0, "tau_b": 0.3}
    code, out, _ = run("diffract", cfg, "--format", "json", out="out.json")
    orders = {o["order"]: o for o in json.loads(out.read_text())["orders"]}
    expected = math.remainder(-4 * 0.3 + math.pi / 2, 2 * math.pi)
    assert orders[1]["phase"] == pytest.approx(expected, abs=1e-10)


def test_interferometer_default(run):
    code, out, captured = run("interferometer", {})
    assert code == 0
    fit = json.loads(out.with_name("out.fit.json").read_text())
    assert fit["phase_mod_pi"] == pytest.approx(math.pi / 3, abs=1e-6)
    assert set(fit) >= {"phase_mod_pi", "amplitude", "offset", "residual", "mode"}
    assert json.loads(captured.out) == fit
    assert read_csv(out)[0] == ["tau", "signal"]


def test_interferometer_zero_gamma_is_degenerate(run):
    code, _, captured = run("interferometer", {"gamma": 0.0})
    assert code == 4
    assert "degenerate" in captured.err


def test_sensitivity_reports_paper_mode(run):
    code, out, _ = run("sensitivity", {"eps": [0.0, 0.01]}, "--format", "json",
                       out="s.json")
    summary = json.loads(out.read_text())
    assert summary["paper_mode_delta_phase_1pct"] == pytest.approx(0.0838, abs=1e-4)
    assert summary["exact_mode_delta_phase_1pct"] == pytest.approx(0.1152, abs=1e-4)


def test_design_pulse(run):
    code, out, _ = run("design-pulse", {"shape": "gaussian", "sigma": 0.6}, "--format", "json",
                       out="d.json")
    res = json.loads(out.read_text())
    assert 2.42 <= res["q_max"] <= 2.44
    assert res["rabi_phase"] == pytest.approx(math.pi, abs=1e-9)


def test_validate_config(run):
    code, _, captured = run("validate-config", {"command": "bands", "q": 1.0}, out=None)
    assert code == 0
    assert captured.out.startswith("ok")


@pytest.mark.parametrize("command,cfg,needle", [
    ("bands", {"q": 1.0, "qq": 2}, "qq"),
    ("bands", {"q": -1.0}, "q"),
    ("diffract", {"mode": "analytic"}, "gamma"),
    ("interferometer", {"mode": "exact"}, "mode"),
    ("sensitivity", {"eps": [0.5]}, "eps"),
    ("design-pulse", {"shape": "gaussian"}, "sigma"),
    ("validate-config", {"q": 1.0}, "command"),
    ("bands", {"command": "diffract", "q": 1.0}, "command"),
])
def test_invalid_configs(run, command, cfg, needle, tmp_path):
    code, out, captured = run(command, cfg)
    assert code == 2
    assert needle in captured.err
    assert not out.exists()


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert main(["bands", "--config", str(path)]) == 2


def test_nonconvergence_exit_code(run):
    cfg = {"mode": "numeric", "pulse": {"shape": "rectangular", "q_max": 2.0,
                                        "tau_start": 0.0, "tau_end": 1.0},
           "settings": {"phase_tolerance": 1e-15, "max_step": 1e-9}}
    code, _, captured = run("diffract", cfg)
    assert code == 3


def test_twelve_significant_digits(run):
    code, out, _ = run("bands", {"q": 0.7, "n_kappa": 4, "n_bands": 3})
    for row in read_csv(out)[1:]:
        digits = re.sub(r"[-.]|e.*$", "", row[2]).lstrip("0")
        assert len(digits) <= 12


@pytest.mark.parametrize("command,cfg", [
    ("bands", {"q": 1.3, "n_kappa": 33, "n_bands": 4}),
    ("interferometer", {"mode": "numeric", "bragg_q": 0.3}),
    ("diffract", {"mode": "numeric", "pulse": {"shape": "gaussian", "q_max": 2.0,
                                               "center": 0.5, "sigma": 0.1}}),
])
def test_byte_identical_reruns(run, command, cfg):
    _, first, _ = run(command, cfg, out="a.csv")
    _, second, _ = run(command, cfg, out="b.csv")
    assert first.read_bytes() == second.read_bytes()


def test_console_entry_point(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"shape": "rectangular", "duration": 2.0}))
    proc = subprocess.run([sys.executable, "-m", "mattersim.cli", "design-pulse", "--config",
                           str(path)], capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "shape,q_max,rabi_phase"
