"""CLI surface: config parsing, subcommands, output formats, exit codes."""

import json
import math

import numpy as np
import pytest

from hyperbell import cli
from hyperbell.cli import (
    MalformedDocumentError,
    OutOfRangeValueError,
    UnknownKeyError,
    parse_config,
)
from hyperbell.elements import FilterShape, visibility


# --- parse_config ---


def test_empty_document_yields_defaults():
    config = parse_config("{}")
    assert config.delay_um == 0.0
    assert config.filter.center_nm == 728.0
    assert config.filter.fwhm_nm == 6.0
    assert config.filter.shape is FilterShape.GAUSSIAN
    assert config.pol_werner_p == 1.0
    assert config.bs_imbalance == 0.0
    assert config.detector_efficiency == 1.0
    assert config.count_rate_hz == 1000.0
    assert config.acquisition_s == 10.0
    assert config.seed == 0


def test_unknown_key_is_an_error():
    with pytest.raises(UnknownKeyError) as excinfo:
        parse_config('{"delay": 3.0}')
    assert excinfo.value.key == "delay"
    assert excinfo.value.code == "UnknownKey"


@pytest.mark.parametrize(
    "doc",
    [
        '{"pol_werner_p": 1.2}',
        '{"bs_imbalance": 0.7}',
        '{"detector_efficiency": 0}',
        '{"count_rate_hz": -5}',
        '{"delay_um": -0.1}',
        '{"seed": -1}',
        '{"seed": 1.5}',
        '{"filter_shape": "triangular"}',
        '{"pol_werner_p": true}',
        '{"fwhm_nm": 800, "lambda0_nm": 728}',
    ],
)
def test_out_of_range_values_are_errors(doc):
    with pytest.raises(OutOfRangeValueError):
        parse_config(doc)


def test_malformed_document_reports_position():
    with pytest.raises(MalformedDocumentError) as excinfo:
        parse_config('{"delay_um": }')
    assert excinfo.value.line == 1
    assert excinfo.value.column == 14


def test_non_object_document_is_malformed():
    with pytest.raises(MalformedDocumentError):
        parse_config("[1, 2, 3]")


def test_rectangular_filter_shape_accepted():
    config = parse_config('{"filter_shape": "rectangular", "fwhm_nm": 10.0}')
    assert config.filter.shape is FilterShape.RECTANGULAR
    assert config.filter.fwhm_nm == 10.0


def test_configured_delay_reaches_the_visibility_curve():
    config = parse_config('{"delay_um": 88.33066666666667}')
    assert abs(visibility(config.delay_um, config.filter) - 0.028447149087636) < 1e-12


def test_number_formatting_snaps_negative_zero():
    assert cli._fmt(-0.0) == "0"
    assert cli._fmt(0.25) == "0.25"
    assert cli._fmt(1.0 / 3.0) == "0.333333333333"


# --- analyze command ---


def read_analyze_csv(text: str):
    """Parse the two-table analyze CSV into (bins, fidelities)."""
    bins_part, fid_part = text.strip().split("\n\n")
    bins = []
    for line in bins_part.splitlines()[1:]:
        pattern, rest = line.split(",", 1)
        port_pol, prob, count = rest.rsplit(",", 2)
        bins.append((pattern, port_pol.strip('"'), float(prob), int(count)))
    fids = []
    for line in fid_part.splitlines()[1:]:
        label, value, sigma, n = line.split(",")
        fids.append((label, float(value), float(sigma), int(n)))
    return bins, fids


def test_analyze_ideal_stdout(capsys):
    assert cli.main(["analyze", "--state", "phi+"]) == 0
    bins, fids = read_analyze_csv(capsys.readouterr().out)
    probs = sorted(b[2] for b in bins)
    assert probs == [0.0] * 12 + [0.25] * 4
    summary = {label: value for label, value, _, _ in fids}
    assert summary == {"phi+": 1.0, "phi-": 0.0, "psi+": 0.0, "psi-": 0.0}


def test_analyze_writes_file_and_manifest(tmp_path):
    out = tmp_path / "analysis.csv"
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"pol_werner_p": 0.852, "seed": 5}')
    code = cli.main(
        ["analyze", "--state", "phi+", "--config", str(cfg), "--out", str(out)]
    )
    assert code == 0
    assert out.exists()
    manifest = json.loads((tmp_path / "analysis.csv.manifest.json").read_text())
    assert manifest["command"] == "analyze"
    assert manifest["config"]["pol_werner_p"] == 0.852
    assert manifest["config"]["seed"] == 5
    assert manifest["seed"] == 5
    assert manifest["arguments"]["state"] == "phi+"
    assert manifest["version"]
    assert "T" in manifest["timestamp_utc"]  # ISO-8601


def test_analyze_csv_is_bit_stable(tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    for out in (out_a, out_b):
        assert cli.main(["analyze", "--state", "psi-", "--out", str(out)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_analyze_formats_encode_identical_numbers(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"pol_werner_p": 0.9, "seed": 3}')
    csv_path = tmp_path / "run.csv"
    json_path = tmp_path / "run.json"
    args = ["analyze", "--state", "psi+", "--config", str(cfg)]
    assert cli.main(args + ["--out", str(csv_path), "--format", "csv"]) == 0
    assert cli.main(args + ["--out", str(json_path), "--format", "json"]) == 0
    bins, fids = read_analyze_csv(csv_path.read_text())
    doc = json.loads(json_path.read_text())
    for (pattern, port_pol, prob, count), jbin in zip(bins, doc["bins"]):
        assert pattern == jbin["pattern"]
        assert port_pol == jbin["port_pol"]
        assert abs(prob - jbin["probability"]) < 1e-12
        assert count == jbin["count"]
    for (label, value, sigma, n), jfid in zip(fids, doc["fidelities"]):
        assert label == jfid["label"]
        assert abs(value - jfid["value"]) < 1e-12
        assert abs(sigma - jfid["std_error"]) < 1e-12
        assert n == jfid["n_events"]
    assert doc["manifest"]["command"] == "analyze"


def test_analyze_calibrated_summary_in_band(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"pol_werner_p": 0.852, "seed": 21}')
    out = tmp_path / "cal.csv"
    assert cli.main(
        ["analyze", "--state", "phi+", "--config", str(cfg),
         "--shots", "100000", "--out", str(out)]
    ) == 0
    _, fids = read_analyze_csv(out.read_text())
    summary = {label: value for label, value, _, _ in fids}
    assert 0.880 <= summary["phi+"] <= 0.899


def test_analyze_zero_shots_is_config_error(capsys):
    assert cli.main(["analyze", "--state", "psi-", "--shots", "0"]) == 2
    err = capsys.readouterr().err
    assert err.splitlines()[0].startswith("error-code:")


def test_analyze_missing_config_file_is_io_error(capsys):
    code = cli.main(["analyze", "--state", "phi+", "--config", "/nonexistent/c.json"])
    assert code == 3
    assert capsys.readouterr().err.splitlines()[0] == "error-code: IOError"


def test_analyze_bad_config_content_is_config_error(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"pol_werner_p": 2.0}')
    assert cli.main(["analyze", "--state", "phi+", "--config", str(cfg)]) == 2
    assert capsys.readouterr().err.splitlines()[0] == "error-code: OutOfRangeValue"


def test_analyze_unwritable_output_is_io_error(capsys):
    code = cli.main(["analyze", "--state", "phi+", "--out", "/nonexistent/dir/x.csv"])
    assert code == 3


# --- sweep command ---


def test_sweep_csv_columns_and_shape(tmp_path):
    out = tmp_path / "sweep.csv"
    code = cli.main(
        ["sweep", "--from-um", "0", "--to-um", "265", "--steps", "31", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text().strip().splitlines()
    header = lines[0].split(",")
    assert header == [
        "delta_x_um", "visibility",
        "f_phi_plus", "f_phi_minus", "f_psi_plus", "f_psi_minus",
        "sigma_phi_plus", "sigma_phi_minus", "sigma_psi_plus", "sigma_psi_minus",
        "analytic_f_plus", "analytic_f_minus",
    ]
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 31
    first = dict(zip(header, map(float, rows[0])))
    assert first["visibility"] == 1.0
    assert first["f_psi_plus"] == 1.0
    f_psi = [float(r[4]) for r in rows]
    assert f_psi[0] > 0.99 and f_psi[-1] < 0.6  # decreasing toward 1/2
    for row in rows:
        values = dict(zip(header, map(float, row)))
        assert values["f_phi_plus"] == 0.0
        assert values["f_phi_minus"] == 0.0
        assert abs(values["analytic_f_plus"] - (1 + values["visibility"]) / 2) < 1e-12
    manifest = json.loads((tmp_path / "sweep.csv.manifest.json").read_text())
    assert manifest["command"] == "sweep"
    assert manifest["arguments"]["steps"] == 31


def test_sweep_to_stdout(capsys):
    assert cli.main(["sweep", "--from-um", "0", "--to-um", "50", "--steps", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("delta_x_um,visibility,")
    assert len(lines) == 4


@pytest.mark.parametrize(
    "args",
    [
        ["sweep", "--from-um", "0", "--to-um", "10", "--steps", "1"],
        ["sweep", "--from-um", "10", "--to-um", "5", "--steps", "4"],
        ["sweep", "--from-um", "-2", "--to-um", "5", "--steps", "4"],
    ],
)
def test_sweep_flag_validation(args, capsys):
    assert cli.main(args) == 2
    assert capsys.readouterr().err.splitlines()[0].startswith("error-code:")


# --- decompose command ---


def test_decompose_phi_plus(capsys):
    assert cli.main(["decompose", "--state", "phi+"]) == 0
    out = capsys.readouterr().out
    lines = [line.split() for line in out.splitlines()[2:]]
    by_pattern = {cells[0]: cells[2] for cells in lines}
    assert by_pattern["σ+τ+"] == "+0.5"
    assert by_pattern["σ-τ-"] == "-0.5"
    assert by_pattern["τ+σ+"] == "+0.5"
    assert by_pattern["τ-σ-"] == "-0.5"
    zeros = [v for k, v in by_pattern.items()
             if k not in ("σ+τ+", "σ-τ-", "τ+σ+", "τ-σ-")]
    assert zeros == ["0"] * 12


def test_decompose_psi_plus(capsys):
    assert cli.main(["decompose", "--state", "psi+"]) == 0
    out = capsys.readouterr().out
    by_pattern = {c[0]: c[2] for c in (line.split() for line in out.splitlines()[2:])}
    assert by_pattern["σ+σ+"] == "+0.5"
    assert by_pattern["σ-σ-"] == "-0.5"
    assert by_pattern["τ+τ+"] == "+0.5"
    assert by_pattern["τ-τ-"] == "-0.5"


def test_decompose_magnitudes_are_half_or_zero(capsys):
    for state in ("phi+", "phi-", "psi+", "psi-"):
        assert cli.main(["decompose", "--state", state]) == 0
        out = capsys.readouterr().out
        values = [c[2] for c in (line.split() for line in out.splitlines()[2:])]
        assert all(v in ("+0.5", "-0.5", "0") for v in values)


# --- verify command ---


def test_verify_passes_on_pristine_build(capsys):
    assert cli.main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "PASS decision-table-disjointness" in out
    assert "PASS transfer-plate-single-photon-action" in out
    assert "PASS ancilla-phase-transfer" in out


def test_verify_negative_control(capsys):
    assert cli.main(["verify", "--corrupt-decision-table"]) == 1
    out = capsys.readouterr().out
    assert "FAIL decision-table-disjointness" in out
    # only the corrupted check fails
    assert out.count("FAIL") == 1
