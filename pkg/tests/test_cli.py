"""Command-line surface: output contracts, exit codes, error formatting."""

import json

import numpy as np
import pytest

from ruinflow.cli import main
from ruinflow.renewal import solve_hitting

from conftest import MODELS_DIR, make_cl


def _csv_to_dict(text):
    lines = [l for l in text.strip().splitlines() if l]
    assert lines[0] == "key,value"
    out = {}
    for line in lines[1:]:
        k, v = line.split(",", 1)
        out[k] = v
    return out


def test_decay_classical(capsys):
    assert main(["decay", "--model", "cl"]) == 0
    rec = _csv_to_dict(capsys.readouterr().out)
    assert abs(float(rec["alpha"]) - 0.5) < 1e-10
    assert abs(float(rec["prefactor_total[0]"]) - 0.5) < 1e-8


def test_record_format_is_json(capsys):
    assert main(["decay", "--model", "onoff", "--format", "record"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert abs(rec["alpha"] - 1.0) < 1e-10
    assert rec["prefactor_total"] == pytest.approx([0.5, 1.0], abs=1e-8)


def test_hitting_table_spot_value(tmp_path, capsys):
    out = tmp_path / "table.csv"
    assert main(["hitting", "--model", "cl", "--xmax", "10", "--h", "0.01",
                 "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == ["x", "psi_0_0", "rowsum_0"]
    rows = {float(r.split(",")[0]): r.split(",") for r in lines[1:]}
    assert abs(float(rows[2.0][1]) - 0.5 * np.exp(-1.0)) < 1e-3


def test_csv_round_trip_exact(tmp_path):
    out = tmp_path / "table.csv"
    main(["hitting", "--model", "cl", "--xmax", "2", "--h", "0.5",
          "--out", str(out)])
    table = solve_hitting(make_cl(), 2.0, 0.5)
    lines = out.read_text().strip().splitlines()[1:]
    for k, line in enumerate(lines):
        cells = [float(c) for c in line.split(",")]
        assert cells[1] == table.psi[k, 0, 0]  # bit-exact round trip


def test_validate_broken_row(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "states": 2, "v": [-1.0, 1.0],
        "C": [[-1.0, 1.0], [2.0, -1.0]],
        "D": [[0.0, 0.0], [0.0, 0.0]],
        "jumps": [],
    }))
    assert main(["validate", "--model", str(bad)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("ERROR:NonConservativeRows:")
    assert "row 1" in err


def test_unknown_key_is_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"states": 1, "v": [-1.0], "C": [[0.0]],
                               "D": [[0.0]], "jumps": [], "foo": 1}))
    assert main(["validate", "--model", str(bad)]) == 2
    assert capsys.readouterr().err.startswith("ERROR:Parse:")


def test_missing_file_is_exit_two(capsys):
    assert main(["validate", "--model", "/nonexistent/model.json"]) == 2
    assert capsys.readouterr().err.startswith("ERROR:Parse:")


def test_computation_error_is_exit_one(tmp_path, capsys):
    pos = tmp_path / "pos.json"
    pos.write_text(json.dumps({
        "states": 2, "v": [-1.0, 3.0],
        "C": [[-1.0, 1.0], [1.0, -1.0]],
        "D": [[0.0, 0.0], [0.0, 0.0]],
        "jumps": [],
    }))
    assert main(["decay", "--model", str(pos)]) == 1
    assert capsys.readouterr().err.startswith("ERROR:DriftNonNegative:")


def test_model_file_matches_builtin(capsys):
    assert main(["drift", "--model", str(MODELS_DIR / "cl.json")]) == 0
    from_file = _csv_to_dict(capsys.readouterr().out)
    assert main(["drift", "--model", "cl"]) == 0
    builtin = _csv_to_dict(capsys.readouterr().out)
    assert from_file == builtin


def test_report_record(capsys):
    assert main(["validate", "--model", "onoff", "--report",
                 "--format", "record"]) == 0
    rec = json.loads(capsys.readouterr().out)
    for key in ("ladder_residual", "wiener_hopf_residual", "twisted_row_sum_dev",
                "nu_alpha_identity", "envelope_margin"):
        assert key in rec
    assert rec["ladder_residual"] < 1e-11


def test_simulate_command(capsys):
    assert main(["simulate", "--model", "onoff", "--xmax", "1.0",
                 "--reps", "20000", "--seed", "4", "--format", "record"]) == 0
    rec = json.loads(capsys.readouterr().out)
    est = rec["total"]
    from conftest import make_onoff

    solver = solve_hitting(make_onoff(), 1.0, 0.01).psi[-1, 0, :].sum()
    assert abs(est["value"] - solver) < 4 * est["stderr"]


def test_ladder_command(capsys):
    assert main(["ladder", "--model", "onoff", "--format", "record"]) == 0
    rec = json.loads(capsys.readouterr().out)
    assert rec["L"][0][0] == pytest.approx(0.5, abs=1e-10)
    assert rec["kminus"][0] == pytest.approx(1.5, abs=1e-9)
