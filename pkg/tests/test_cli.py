"""End-to-end command runs: artifacts, determinism, exit codes."""

import csv
import json
import math

import pytest

from fibspectra.cli import main


def run(tmp_path, name, argv):
    out = tmp_path / name
    rc = main(argv + ["--output-path", str(out)])
    return rc, out


def test_spectrum_rowcount_and_sidecar(tmp_path):
    rc, out = run(tmp_path, "s.csv", ["spectrum", "--k", "8", "--lambda", "2"])
    assert rc == 0
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["component_lo", "component_hi"]
    assert len(rows) - 1 == 42
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["command"] == "spectrum"
    assert meta["precision_bits"] == 53
    assert meta["band_counts"] == [34, 55]
    assert meta["rows"] == 42
    assert "wall_time_seconds" in meta and "version" in meta
    assert meta["parameters"]["coupling"] == 2.0


def test_data_files_byte_identical_across_runs(tmp_path):
    _, out1 = run(tmp_path, "a.csv", ["spectrum", "--k", "7", "--lambda", "3"])
    _, out2 = run(tmp_path, "b.csv", ["spectrum", "--k", "7", "--lambda", "3"])
    assert out1.read_bytes() == out2.read_bytes()


def test_lf_line_endings(tmp_path):
    _, out = run(tmp_path, "s.csv", ["spectrum", "--k", "6", "--lambda", "2"])
    data = out.read_bytes()
    assert b"\r" not in data
    assert data.endswith(b"\n")


def test_json_mirrors_csv(tmp_path):
    _, out_c = run(tmp_path, "x.csv", ["bounds", "--name", "dim_upper",
                                       "--lambda-grid", "8,16"])
    _, out_j = run(tmp_path, "x.json", ["bounds", "--name", "dim_upper",
                                        "--lambda-grid", "8,16",
                                        "--format", "json"])
    with open(out_c) as fh:
        rows = list(csv.DictReader(fh))
    records = json.loads(out_j.read_text())
    assert rows == records


def test_precision_bits_env_default(tmp_path, monkeypatch):
    monkeypatch.setenv("FIBSPECTRA_BITS", "96")
    _, out = run(tmp_path, "s.csv", ["spectrum", "--k", "5", "--lambda", "2"])
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["precision_bits"] == 96
    # rendered digits follow ceil(96 log10 2) = 29
    with open(out) as fh:
        first = next(csv.reader(fh))
        cell = next(csv.reader(fh))[0]
    mantissa = cell.split("e")[0].lstrip("-")
    assert len(mantissa.replace(".", "")) == 29


def test_flag_overrides_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FIBSPECTRA_BITS", "96")
    _, out = run(tmp_path, "s.csv", ["spectrum", "--k", "5", "--lambda", "2",
                                     "--precision-bits", "64"])
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["precision_bits"] == 64


def test_deep_transitions_force_high_precision(tmp_path):
    # k > 12 silently upgrades 53-bit requests; visible in the sidecar
    rc, out = run(tmp_path, "t.csv",
                  ["thickness", "--k", "13", "--lambda", "1.0"])
    assert rc == 0
    meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
    assert meta["precision_bits"] == 128


def test_exit_code_bad_flags():
    with pytest.raises(SystemExit) as exc_info:
        main(["spectrum", "--k", "8"])
    assert exc_info.value.code == 2


def test_exit_code_precondition(tmp_path):
    rc, _ = run(tmp_path, "x.csv", ["spectrum", "--k", "8", "--lambda", "-3"])
    assert rc == 3


def test_exit_code_not_found_thickness(tmp_path):
    rc, _ = run(tmp_path, "x.csv",
                ["thickness", "--k", "6", "--lambda-range", "0.1", "0.2"])
    assert rc == 4


def test_transitions_not_found_still_writes_trace(tmp_path):
    rc, out = run(tmp_path, "t.csv",
                  ["transitions", "--k", "6", "--dim", "2", "--m", "99",
                   "--lambda-range", "1.0", "1.05"])
    assert rc == 4
    assert out.exists()
    meta = json.loads((tmp_path / "t.csv.meta.json").read_text())
    assert len(meta["trace"]) >= 2


def test_transitions_found_row(tmp_path):
    rc, out = run(tmp_path, "t.csv",
                  ["transitions", "--k", "6", "--dim", "2", "--m", "1",
                   "--lambda-range", "1.25", "1.4"])
    assert rc == 0
    with open(out) as fh:
        row = list(csv.DictReader(fh))[0]
    assert math.isclose(float(row["lambda_star"]), 1.313172936, abs_tol=1e-5)
    assert row["count_left"] == "1"


def test_labels_artifact(tmp_path):
    rc, out = run(tmp_path, "l.csv",
                  ["labels", "--k", "8", "--lambda", "2", "--m-cap", "40"])
    assert rc == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 34  # F_8 - 1 interior gaps + above-spectrum row
    above = [r for r in rows if r["m"] == ""]
    assert len(above) == 1
    assert above[0]["gap_hi"] == "inf"


def test_sweep_is_deterministic_and_ordered(tmp_path):
    argv = ["sweep", "--task", "counts", "--k", "7", "--dim", "2",
            "--lambda-grid", "2.0,1.0,1.5", "--threads", "2"]
    _, out1 = run(tmp_path, "s1.csv", argv)
    _, out2 = run(tmp_path, "s2.csv", argv)
    assert out1.read_bytes() == out2.read_bytes()
    with open(out1) as fh:
        rows = list(csv.DictReader(fh))
    got = [float(r["coupling"]) for r in rows]
    assert got == [2.0, 1.0, 1.5]  # submission order preserved
    assert all(r["error"] == "" for r in rows)


def test_sweep_records_row_failures_without_aborting(tmp_path):
    rc, out = run(tmp_path, "s.csv",
                  ["sweep", "--task", "counts", "--k", "30",
                   "--lambda-grid", "2.0"])
    assert rc == 0
    with open(out) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1
    assert rows[0]["error"] != ""
    meta = json.loads((tmp_path / "s.csv.meta.json").read_text())
    assert meta["failed_points"] == 1


def test_trace_command_meta(tmp_path):
    rc, out = run(tmp_path, "tr.csv",
                  ["trace", "--k", "12", "--lambda", "2", "--energy", "0"])
    assert rc == 0
    meta = json.loads((tmp_path / "tr.csv.meta.json").read_text())
    assert meta["escape_index"] == 3


def test_holder_meta_records_exclusion(tmp_path):
    rc, out = run(tmp_path, "h.csv",
                  ["holder", "--n", "500", "--lambda", "8"])
    assert rc == 0
    meta = json.loads((tmp_path / "h.csv.meta.json").read_text())
    assert meta["exclusion_threshold"] > 0


def test_dims_meta_has_infimum(tmp_path):
    rc, out = run(tmp_path, "d.csv",
                  ["dims", "--k", "7", "--lambda", "4",
                   "--eps-grid", "geom:1e-2:1e-4:6"])
    assert rc == 0
    meta = json.loads((tmp_path / "d.csv.meta.json").read_text())
    assert 0 < meta["dim_infimum"] < 1
