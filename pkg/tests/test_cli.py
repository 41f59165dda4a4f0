import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from polydiode.cli import run

DESIGNS = Path(__file__).resolve().parent.parent / "designs"
DIODE = str(DESIGNS / "diode.design")
AND = str(DESIGNS / "and_gate.design")
OR = str(DESIGNS / "or_gate.design")


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def single_error_line(err):
    lines = err.splitlines()
    assert len(lines) == 1 and lines[0].startswith("error: ")
    return lines[0]


def test_validate_ok():
    code, out, err = call("validate", DIODE)
    assert code == 0 and err == ""
    assert "valid" in out


def test_validate_json_shape():
    code, out, _ = call("validate", DIODE, "--format", "json")
    rep = json.loads(out)
    assert rep["schema_version"] == 1
    assert rep["command"] == "validate"
    assert rep["validation"]["valid"] is True
    assert rep["design"]["notation"]


def test_aromatic_bridge_is_a_domain_error():
    code, out, err = call("validate", str(DESIGNS / "aromatic_bridge.design"))
    assert code == 1 and out == ""
    line = single_error_line(err)
    assert "aromatic_bridge.design:6" in line and "aliphatic" in line


@pytest.mark.parametrize("argv", [
    ("frobnicate",),
    ("analyze",),
    ("analyze", DIODE, "--molecule", "c6"),
    ("analyze", DIODE, "--units", "kelvin"),
    ("sweep", "--fix", "donor"),
    ("sweep", "--fix", "colour=NH2"),
    ("sweep", "--fix", "donor=NH2", "--fix", "donor=OH"),
    ("catalog", "--role", "spectator"),
    ("simulate", "--molecule", "c6"),
    ("simulate", DIODE, "--bias-steps", "0"),
])
def test_usage_errors_exit_2(argv):
    code, out, err = call(*argv)
    assert code == 2
    single_error_line(err)


def test_missing_file_is_a_domain_error():
    code, _, err = call("analyze", "/nonexistent.design")
    assert code == 1
    single_error_line(err)


def test_saturated_molecule():
    code, _, err = call("analyze", "--molecule", "CC")
    assert code == 1
    assert "saturated" in single_error_line(err)


def test_parse_error_offset_reported():
    code, _, err = call("analyze", "--molecule", "C(")
    assert code == 1
    assert "offset 2" in single_error_line(err)


def test_benzene_text_report():
    code, out, _ = call("analyze", "--molecule", "c6")
    assert code == 0
    assert "C6H6" in out
    for value in ("-2", "-1", "1", "2"):
        assert value in out


def test_benzene_json_orbitals():
    code, out, _ = call("analyze", "--molecule", "c6", "--format", "json")
    rep = json.loads(out)
    energies = rep["orbitals"]["system0"]["energies"]
    assert energies == pytest.approx([-2, -1, -1, 1, 1, 2], abs=1e-9)
    assert rep["orbitals"]["system0"]["occupations"] == [2, 2, 2, 0, 0, 0]


def test_ev_units():
    _, out, _ = call("analyze", "--molecule", "c6", "--format", "json", "--units", "ev")
    rep = json.loads(out)
    assert rep["units"] == "ev"
    # alpha + 2 beta with beta = -2.4 eV
    assert rep["orbitals"]["system0"]["energies"][0] == pytest.approx(-4.8)


def test_analyze_diode_json():
    code, out, _ = call("analyze", DIODE, "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert rep["profile"]["diode"]["delta_e_lumo"] > 0
    assert rep["diode"]["diode"]["rectification_ratio"] == pytest.approx(13.606, abs=1e-3)
    assert set(rep["orbitals"]["diode"]) == {"donor", "acceptor"}


@pytest.mark.parametrize("path,outputs", [(AND, [0, 0, 0, 1]), (OR, [0, 1, 1, 1])])
def test_simulate_gate_truth_table(path, outputs):
    code, out, _ = call("simulate", path, "--format", "json")
    rep = json.loads(out)
    rows = rep["truth_table"]["rows"]
    assert code == 0
    assert len(rows) == 4
    assert [r["logic"] for r in rows] == outputs
    assert all(r["kirchhoff_residual_amps"] < 1e-12 for r in rows)


def test_simulate_gate_text_has_four_rows():
    _, out, _ = call("simulate", AND)
    body = [ln.split() for ln in out.splitlines() if ln.startswith("  ") and ln.split()[0] in "01"]
    assert [row[:2] for row in body] == [["0", "0"], ["0", "1"], ["1", "0"], ["1", "1"]]
    assert [row[-1] for row in body] == ["0", "0", "0", "1"]


def test_ambiguous_gate_exits_1_after_reporting(tmp_path):
    cfg = tmp_path / "wide.cfg"
    cfg.write_text("[model]\nbase_threshold = 2.6\non_conductance = inf\n[levels]\nv_high_min = 3.0\n")
    code, out, err = call("simulate", AND, "--config", str(cfg))
    assert code == 1
    assert "2.6" in single_error_line(err)
    assert out  # the table is still printed


def test_simulate_diode_iv_text():
    code, out, _ = call("simulate", DIODE, "--bias-min", "-1", "--bias-max", "1", "--bias-steps", "5")
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "# bias_volts current_amps"
    assert len(lines) == 6
    bias, current = map(float, lines[-1].split())
    assert bias == 1.0 and current == pytest.approx(0.7e-6)


def test_sweep_fixed_donor():
    code, out, _ = call("sweep", "--fix", "donor=NH2", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert len(rep["rows"]) == 8
    assert all(r["donor"] == "NH2" for r in rep["rows"])
    assert all(r["and_ok"] and r["or_ok"] for r in rep["rows"])


def test_full_sweep_text():
    code, out, _ = call("sweep")
    lines = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    assert code == 0
    assert len(lines) == 33  # header + 32 designs


def test_catalog():
    code, out, _ = call("catalog", "--format", "json")
    names = [g["name"] for g in json.loads(out)]
    assert code == 0 and len(names) == 10
    _, out, _ = call("catalog", "--role", "acceptor")
    assert "NO2" in out and "NH2" not in out


def test_catalog_defaults_round_trip(tmp_path):
    _, out, _ = call("catalog", "--defaults")
    cfg = tmp_path / "defaults.cfg"
    cfg.write_text(out)
    a = call("analyze", DIODE, "--format", "json")[1]
    b = call("analyze", DIODE, "--format", "json", "--config", str(cfg))[1]
    assert a == b


def test_output_file(tmp_path):
    target = tmp_path / "rep.json"
    code, out, _ = call("build", DIODE, "--format", "json", "-o", str(target))
    assert code == 0 and out == ""
    rep = json.loads(target.read_text())
    assert rep["inventory"]["formula"] == "C13H12N2O2"
    assert rep["graph"]["atoms"]


@pytest.mark.parametrize("argv", [("analyze", AND), ("simulate", OR), ("analyze", DIODE), ("sweep",)])
def test_json_is_deterministic(argv):
    first = call(*argv, "--format", "json")[1]
    second = call(*argv, "--format", "json")[1]
    assert first == second


def test_plot_dir(tmp_path):
    assert call("simulate", AND, "--plot-dir", str(tmp_path))[0] == 0
    assert call("simulate", DIODE, "--plot-dir", str(tmp_path))[0] == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["energy_a.png", "energy_b.png", "energy_diode.png", "iv_curve.png", "truth_table.png"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "polydiode", "catalog", "--role", "bridge"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "CH2CH2" in proc.stdout
