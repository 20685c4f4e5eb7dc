import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sppkit import io
from sppkit.classical import SpectralDecomposition, TruncationPolicy, gaussian_spp_coeffs
from sppkit.cli import EXIT_FAILURE, EXIT_MISMATCH, EXIT_OK, main
from sppkit.oracle import grid_overlap_coefficients
from sppkit.paraxial import FieldGrid, ModeIndex, synthesize
from sppkit.quantum import TwoModeState, displace_vacuum

W0 = 100e-6


def _run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


# --- file formats -----------------------------------------------------------

def test_decomposition_json_round_trip(tmp_path):
    d = gaussian_spp_coeffs(1.5, TruncationPolicy(6, 6), w0=W0)
    io.write_decomposition_json(d, tmp_path / "t.json")
    back = io.read_decomposition(tmp_path / "t.json")
    assert back.entries == d.entries
    assert back.w0 == W0 and back.q == 1.5
    assert back.truncation == d.truncation


def test_decomposition_csv_round_trip(tmp_path):
    d = gaussian_spp_coeffs(2.5, TruncationPolicy(6, 6))
    io.write_decomposition_csv(d, tmp_path / "t.csv")
    assert io.read_decomposition(tmp_path / "t.csv").entries == d.entries


def test_unreadable_table(tmp_path):
    (tmp_path / "bad.json").write_text('{"entries": [{"p": 0}]}')
    with pytest.raises(ValueError):
        io.read_decomposition(tmp_path / "bad.json")
    with pytest.raises(ValueError):
        io.read_decomposition(tmp_path / "missing.csv")


def test_state_json_layout(tmp_path):
    s = displace_vacuum(0.3, 0.2, tol=1e-6)
    io.write_state_json(s, tmp_path / "s.json")
    data = json.loads((tmp_path / "s.json").read_text())
    assert set(data) == {"entries", "norm"}
    assert set(data["entries"][0]) == {"n_plus", "n_minus", "re", "im"}
    assert io.read_state_json(tmp_path / "s.json").amplitudes == s.amplitudes


def test_grid_csv_round_trip(tmp_path):
    g = synthesize(SpectralDecomposition({ModeIndex(1, 2): 1 - 0.5j}, W0), n=(9, 7))
    io.write_grid_csv(g, tmp_path / "g.csv")
    back = io.read_grid_csv(tmp_path / "g.csv")
    assert np.array_equal(back.samples, g.samples)
    assert back.half_extent == g.half_extent


def test_pgm_round_trip_and_orientation(tmp_path):
    vals = np.arange(12, dtype=np.uint16).reshape(3, 4) * 5000
    io.write_pgm(vals, tmp_path / "a.pgm")
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n4 3\n65535\n")
    # first stored row is the last array row (largest y)
    assert int.from_bytes(raw[13:15], "big") == int(vals[-1, 0])
    assert np.array_equal(io.read_pgm(tmp_path / "a.pgm"), vals)


def test_image_levels():
    g = FieldGrid(np.array([[1.0, -1.0], [1j, 0.5]]), 1.0)
    assert io.magnitude_levels(g).tolist() == [[65535, 65535], [65535, 32768]]
    assert io.phase_levels(g).tolist() == [[0, 32768], [16384, 0]]


def test_report_key_order():
    text = io.write_report_json({"pass": True, "n_compared": 1, "worst_index": {"p": 0, "l": 0},
                                 "power_diff": 0.0, "max_abs_diff": 0.0})
    assert list(json.loads(text)) == ["max_abs_diff", "power_diff", "worst_index", "n_compared", "pass"]


# --- commands ---------------------------------------------------------------

def test_decompose_both(tmp_path, capsys):
    assert _run(tmp_path, "decompose", "--q", "0.5", "--method", "both") == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["max_abs_diff"] < 1e-9
    for name in ("classical.json", "classical.csv", "quantum.json", "quantum.csv", "quantum_state.json"):
        assert (tmp_path / name).is_file()
    assert "max_abs_diff" in capsys.readouterr().out


def test_decompose_identity_plate(tmp_path):
    assert _run(tmp_path, "decompose", "--q", "0") == EXIT_OK
    data = json.loads((tmp_path / "classical.json").read_text())
    assert data["entries"] == [{"p": 0, "l": 0, "re": 1.0, "im": 0.0}]


def test_decompose_displaced_scenario(tmp_path):
    assert _run(tmp_path, "decompose", "--q", "2.5", "--r0", "100e-6", "--w0", "100e-6", "--phi0", "1.5708",
                "--pmax", "12", "--lmax", "12") == EXIT_OK
    d = io.read_decomposition(tmp_path / "classical.json")
    assert 0.5 < d.captured_power < 1


def test_decompose_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["decompose", "--q", "1.5", "--method", "both", "--pmax", "10", "--lmax", "10",
                     "--out", str(out)]) == EXIT_OK
    for name in ("classical.json", "classical.csv", "quantum.json", "quantum_state.json", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_synthesize_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["synthesize", "--q", "1.5", "--grid-n", "32", "--out", str(out)]) == EXIT_OK
    for name in ("field.csv", "field_abs.pgm", "field_phase.pgm"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_synthesize_empty_table(tmp_path):
    io.write_decomposition_json(SpectralDecomposition({}, W0), tmp_path / "empty.json")
    assert _run(tmp_path, "synthesize", "--table", str(tmp_path / "empty.json"), "--grid-n", "8") == EXIT_OK
    g = io.read_grid_csv(tmp_path / "field.csv")
    assert not np.any(g.samples)


def test_round_trip_decompose_synthesize_redecompose(tmp_path):
    assert _run(tmp_path, "decompose", "--q", "0.5", "--pmax", "6", "--lmax", "6") == EXIT_OK
    assert _run(tmp_path, "synthesize", "--table", str(tmp_path / "classical.json"), "--grid-n", "257",
                "--grid-extent", str(8 * W0)) == EXIT_OK
    table = io.read_decomposition(tmp_path / "classical.json")
    grid = io.read_grid_csv(tmp_path / "field.csv")
    idx = TruncationPolicy(6, 6).indices()
    got = grid_overlap_coefficients(grid, idx, W0)
    assert np.abs(got - np.array([table[i] for i in idx])).max() < 1e-8


def test_propagate_writes_each_plane(tmp_path):
    zr = math.pi * W0**2 / 632.8e-9
    assert _run(tmp_path, "propagate", "--q", "1.5", "--pmax", "8", "--lmax", "8", "--grid-n", "48",
                "--z", "0", str(zr)) == EXIT_OK
    summary = json.loads((tmp_path / "propagation.json").read_text())
    assert [s["index"] for s in summary] == [0, 1]
    assert summary[1]["width"] == pytest.approx(math.sqrt(2) * W0)
    assert (tmp_path / "field_001_phase.pgm").is_file()


def test_compare_vacuum_passes(tmp_path):
    assert _run(tmp_path, "compare", "--q", "1.5", "--pmax", "10", "--lmax", "10") == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["pass"] and rep["max_abs_diff"] < 1e-9


def test_compare_negative_control(tmp_path):
    assert _run(tmp_path, "compare", "--q", "1.5", "--pmax", "10", "--lmax", "10",
                "--quantum-kmax", "3") == EXIT_MISMATCH
    rep = json.loads((tmp_path / "report.json").read_text())
    assert not rep["pass"]
    assert rep["power_diff"] < 0 and rep["truncation_overflow"] > 0


@pytest.mark.slow
def test_compare_displaced_passes(tmp_path):
    assert _run(tmp_path, "compare", "--q", "2.5", "--r0", "100e-6", "--phi0", "1.5708", "--pmax", "20",
                "--lmax", "20") == EXIT_OK


def test_charge_map_outputs(tmp_path):
    assert _run(tmp_path, "charge-map", "--q", "2.5", "--grid-n", "128") == EXIT_OK
    summary = json.loads((tmp_path / "charge_summary.json").read_text())
    charges = [loop["charge"] for loop in summary["loops"] if loop["charge"] is not None]
    assert charges and all(abs(c - round(c)) < 1e-6 for c in charges)
    lines = (tmp_path / "charges.csv").read_text().splitlines()
    assert lines[0] == "x,y,charge" and len(lines) - 1 == summary["n_vortices"]


def test_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as err:
        main(["decompose", "--w0", "-1", "--out", str(tmp_path)])
    assert err.value.code == 2
    with pytest.raises(SystemExit) as err:
        main(["nonsense"])
    assert err.value.code == 2


def test_missing_table_is_a_failure(tmp_path):
    assert _run(tmp_path, "synthesize", "--table", str(tmp_path / "nope.json")) == EXIT_FAILURE


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "sppkit", "decompose", "--q", "0.5", "--pmax", "4", "--lmax", "4",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert (tmp_path / "classical.json").is_file()
