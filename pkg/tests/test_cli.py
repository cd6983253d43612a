import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from conftest import PHI
from thermoflow import config
from thermoflow.cli import RunConfig, main, run
from thermoflow.errors import ValidationError

MODELS = Path(__file__).resolve().parent.parent / "models"
LOG2 = math.log(2)


def m(name):
    return str(MODELS / name)


def invoke(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def rows_of(text):
    return {row["key"]: row["value"] for row in csv.DictReader(io.StringIO(text))}


def test_flow_pressure_of_full_shift(capsys):
    status, out, _ = invoke(capsys, "flow-pressure", "--model_path", m("full2_flow.json"))
    assert status == 0 and out == "0.693147180560\n"
    status, out, _ = invoke(
        capsys, "flow-pressure", "--model_path", m("full2_flow.json"), "--potential_path", m("full2_zero_potential.json")
    )
    assert out == "0.693147180560\n"


def test_pressure_and_scaling(capsys):
    status, out, _ = invoke(capsys, "pressure", "--model_path", m("golden_mean.json"))
    assert status == 0 and float(out) == pytest.approx(math.log(PHI), abs=1e-11)
    status, out, _ = invoke(capsys, "pressure", "--model_path", m("phase_toy.json"), "--potential_path", m("phase_toy_potential.json"), "--q", "0.5")
    assert float(out) == pytest.approx(0.5 * LOG2, abs=1e-11)


def test_verify_b_on_golden_mean(capsys):
    status, out, _ = invoke(
        capsys, "verify-b", "--model_path", m("golden_mean_flow.json"), "--potential_path", m("golden_mean_potential.json")
    )
    rows = rows_of(out)
    assert status == 0 and rows["passed"] == "true"
    assert abs(float(rows["h_top_synchronized"]) - 1) <= 1e-8
    assert float(rows["max_cylinder_discrepancy"]) <= 1e-6
    assert float(rows["density_check_max_error"]) <= 1e-8


def test_verify_b_reports_tolerance_breach(capsys):
    status, out, _ = invoke(
        capsys,
        "verify-b",
        "--model_path", m("golden_mean_flow.json"),
        "--potential_path", m("golden_mean_potential.json"),
        "--tolerance_overrides", "density=1e-30",
    )
    assert status == 2 and rows_of(out)["passed"] == "false"


def test_phase_curve(capsys):
    status, out, _ = invoke(
        capsys,
        "phase-curve",
        "--model_path", m("phase_toy.json"),
        "--potential_path", m("phase_toy_potential.json"),
        "--q_min", "0", "--q_max", "2", "--steps", "41",
    )
    assert status == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 41 and list(rows[0]) == ["q", "pressure"]
    for row in rows:
        q, p = float(row["q"]), float(row["pressure"])
        assert p == pytest.approx(max(0.0, (1 - q) * LOG2), abs=1e-9)


def test_phase_curve_on_a_flow(capsys):
    status, out, _ = invoke(capsys, "phase-curve", "--model_path", m("full2_flow.json"), "--steps", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["pressure"]) for r in rows] == pytest.approx([LOG2] * 3)


def test_equilibrium(capsys):
    status, out, _ = invoke(capsys, "equilibrium", "--model_path", m("full2.json"), "--max_len", "2")
    rows = rows_of(out)
    assert status == 0 and float(rows["pressure"]) == pytest.approx(LOG2)
    assert float(rows["cylinder[0 1]"]) == pytest.approx(0.25)
    assert len(rows) == 1 + 2 + 4


def test_equilibrium_at_the_phase_transition(capsys):
    status, out, err = invoke(
        capsys, "equilibrium", "--model_path", m("phase_toy.json"), "--potential_path", m("phase_toy_potential.json"), "--q", "1"
    )
    assert status == 1 and out == ""
    assert err.startswith("error: NonUniqueEquilibrium:")


def test_mme_and_hyperbolic(capsys):
    status, out, _ = invoke(capsys, "mme", "--model_path", m("golden_mean_12_flow.json"), "--max_len", "1")
    rows = rows_of(out)
    # e^{-h} solves x + x^3 = 1
    x = math.exp(-float(rows["entropy"]))
    assert x + x**3 == pytest.approx(1.0, abs=1e-11)
    status, out, _ = invoke(
        capsys, "hyperbolic", "--model_path", m("golden_mean_flow.json"), "--potential_path", m("golden_mean_potential.json")
    )
    rows = rows_of(out)
    assert rows["hyperbolic"] == "true" and rows["witness_cycle"] == "0"
    assert float(rows["gap"]) > 0


def test_synchronize_writes_a_flow(capsys, tmp_path):
    target = tmp_path / "synced.json"
    status, out, _ = invoke(
        capsys, "synchronize", "--model_path", m("full2_flow.json"), "--output_path", str(target)
    )
    assert status == 0 and out == ""
    data = json.loads(target.read_text())
    assert set(data["roof"]["table"].values()) == {round(LOG2, 12)}
    # the written file is itself a valid flow model
    status, out, _ = invoke(capsys, "mme", "--model_path", str(target), "--max_len", "1")
    assert float(rows_of(out)["entropy"]) == pytest.approx(1.0, abs=1e-10)


def test_shadow_and_close(capsys):
    status, out, _ = invoke(
        capsys, "shadow", "--model_path", m("golden_mean_flow.json"), "--orbit_path", m("golden_pseudo_orbit.json")
    )
    data = json.loads(out)
    assert status == 0 and data["max_distance"] <= data["epsilon"]
    assert data["traced_point"]["future"] == [0, 1]
    status, out, _ = invoke(
        capsys, "close", "--model_path", m("golden_mean_flow.json"), "--orbit_path", m("golden_orbit.json")
    )
    data = json.loads(out)
    assert status == 0 and data["period"] == 3.0 and data["requested"] == 2.98
    assert data["periodic_point"]["past"] == data["periodic_point"]["future"]
    status, _, err = invoke(capsys, "close", "--model_path", m("golden_mean_flow.json"))
    assert status == 1 and "orbit_path" in err


def test_dichotomy(capsys):
    status, out, _ = invoke(capsys, "dichotomy", "--model_path", m("golden_mean_flow.json"))
    rows = rows_of(out)
    assert rows["class"] == "ConstantSuspension" and float(rows["c"]) == pytest.approx(1.0)
    status, out, _ = invoke(capsys, "dichotomy", "--model_path", m("golden_mean_12_flow.json"))
    assert rows_of(out) == {"class": "Mixing"}


def test_factor_check(capsys):
    status, out, _ = invoke(capsys, "factor-check", "--model_path", m("full2_flow.json"), "--code_path", m("xor_code.json"))
    rows = rows_of(out)
    assert status == 0 and rows["degree"] == "2" and rows["passed"] == "true"
    assert float(rows["pressure_gap"]) <= 1e-9
    status, out, _ = invoke(capsys, "factor-check", "--model_path", m("full2.json"), "--code_path", m("xor_code.json"))
    assert status == 0 and "passed" not in rows_of(out)
    status, out, err = invoke(capsys, "factor-check", "--model_path", m("full2.json"), "--code_path", m("collapse_code.json"))
    assert status == 1 and err.startswith("error: NotFiniteToOne:")


def test_output_is_deterministic(capsys):
    argv = ["mme", "--model_path", m("golden_mean_12_flow.json")]
    first = invoke(capsys, *argv)
    second = invoke(capsys, *argv)
    assert first == second and first[0] == 0


@pytest.mark.parametrize(
    "argv, fragment",
    [
        (["explode", "--model_path", "x"], "ValidationError"),
        (["pressure"], "ValidationError"),
        (["pressure", "--model_path", "missing.json"], "ValidationError"),
        (["pressure", "--model_path", "MODEL", "--q", "nan"], "ValidationError"),
        (["phase-curve", "--model_path", "MODEL", "--steps", "1"], "ValidationError"),
        (["shadow", "--model_path", "MODEL", "--epsilon", "0"], "ValidationError"),
        (["synchronize", "--model_path", "MODEL", "--t_horizon", "-1"], "ValidationError"),
        (["flow-pressure", "--model_path", "MODEL"], "ValidationError"),
        (["pressure", "--model_path", "MODEL", "--tolerance_overrides", "bogus=1"], "ValidationError"),
        (["pressure", "--model_path", "MODEL", "--tolerance_overrides", "bowen"], "ValidationError"),
    ],
)
def test_user_errors_exit_one(capsys, argv, fragment):
    argv = [m("golden_mean.json") if a == "MODEL" else a for a in argv]
    status, out, err = invoke(capsys, *argv)
    assert status == 1 and out == ""
    assert err.startswith(f"error: {fragment}:") and "Traceback" not in err


def test_parse_errors_exit_one(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"states": [0], "edges": [[0, 0]], "color": 1}')
    status, _, err = invoke(capsys, "pressure", "--model_path", str(bad))
    assert status == 1 and err.startswith("error: ParseError:") and "'color'" in err


def test_bad_environment_tolerances(capsys, monkeypatch):
    monkeypatch.setenv("THERMOFLOW_TOL", "bowen=tiny")
    status, _, err = invoke(capsys, "pressure", "--model_path", m("golden_mean.json"))
    assert status == 1 and err.startswith("error: ValidationError:")


def test_run_restores_tolerances():
    before = config.get()
    cfg = RunConfig("flow-pressure", m("full2_flow.json"), tolerance_overrides={"bowen": 1e-3})
    assert run(cfg) == ("0.693147180560\n", 0)
    assert config.get() is before


def test_run_config_validation():
    with pytest.raises(ValidationError):
        RunConfig("pressure", m("golden_mean.json"), max_len=0)
    with pytest.raises(ValidationError):
        RunConfig("pressure", m("golden_mean.json"), code_path="missing.json")


def test_module_entry_point():
    ok = subprocess.run(
        [sys.executable, "-m", "thermoflow", "flow-pressure", "--model_path", m("full2_flow.json")],
        capture_output=True, text=True,
    )
    assert ok.returncode == 0 and ok.stdout == "0.693147180560\n"
    bad = subprocess.run(
        [sys.executable, "-m", "thermoflow", "equilibrium", "--model_path", m("phase_toy.json"),
         "--potential_path", m("phase_toy_potential.json")],
        capture_output=True, text=True,
    )
    assert bad.returncode == 1 and bad.stdout == ""
    assert bad.stderr.startswith("error: NonUniqueEquilibrium:") and "Traceback" not in bad.stderr
