"""File formats: coefficient tables, two-mode states, reports and field grids.

All writers are deterministic: entries are emitted in sorted index order and
floats use ``repr`` (shortest round-tripping form).
"""

from __future__ import annotations

import csv
import json
import math
import re
from pathlib import Path

import numpy as np

from .classical import SpectralDecomposition, TruncationPolicy
from .errors import InvalidParameterError
from .paraxial import FieldGrid, ModeIndex


def _dump(obj, path):
    text = json.dumps(obj, indent=2, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _trunc_dict(tr):
    if tr is None:
        return {}
    if isinstance(tr, TruncationPolicy):
        return tr.to_dict()
    return dict(tr)


def decomposition_to_dict(decomp: SpectralDecomposition) -> dict:
    return {
        "w0": decomp.w0,
        "q": decomp.q,
        "entries": [{"p": i.p, "l": i.l, "re": c.real, "im": c.imag} for i, c in decomp.entries.items()],
        "captured_power": decomp.captured_power,
        "truncation": _trunc_dict(decomp.truncation),
    }


def write_decomposition_json(decomp: SpectralDecomposition, path=None) -> str:
    return _dump(decomposition_to_dict(decomp), path)


def read_decomposition_json(path) -> SpectralDecomposition:
    try:
        data = json.loads(Path(path).read_text())
        entries = {ModeIndex(int(e["p"]), int(e["l"])): complex(e["re"], e["im"]) for e in data["entries"]}
        tr = data.get("truncation") or None
        policy = TruncationPolicy(**tr) if tr else None
        return SpectralDecomposition(entries, float(data.get("w0", 1.0)), policy, data.get("q"))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"unreadable coefficient table {path}: {exc}") from exc


def write_decomposition_csv(decomp: SpectralDecomposition, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p", "l", "re", "im"])
        for i, c in decomp.entries.items():
            w.writerow([i.p, i.l, repr(c.real), repr(c.imag)])


def read_decomposition_csv(path, w0: float = 1.0) -> SpectralDecomposition:
    try:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        entries = {ModeIndex(int(r["p"]), int(r["l"])): complex(float(r["re"]), float(r["im"])) for r in rows}
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidParameterError(f"unreadable coefficient table {path}: {exc}") from exc
    return SpectralDecomposition(entries, w0)


def read_decomposition(path, w0: float = 1.0) -> SpectralDecomposition:
    """Read a coefficient table, choosing the format from the file suffix."""
    path = Path(path)
    if not path.is_file():
        raise InvalidParameterError(f"coefficient table {path} does not exist")
    if path.suffix.lower() == ".csv":
        return read_decomposition_csv(path, w0)
    return read_decomposition_json(path)


def state_to_dict(state) -> dict:
    return {
        "entries": [{"n_plus": o.n_plus, "n_minus": o.n_minus, "re": a.real, "im": a.imag}
                    for o, a in state.amplitudes.items()],
        "norm": state.norm,
    }


def write_state_json(state, path=None) -> str:
    return _dump(state_to_dict(state), path)


def read_state_json(path):
    from .quantum import CircularOccupation, TwoModeState

    data = json.loads(Path(path).read_text())
    return TwoModeState({CircularOccupation(int(e["n_plus"]), int(e["n_minus"])): complex(e["re"], e["im"])
                         for e in data["entries"]})


def write_report_json(report: dict, path=None) -> str:
    keys = ("max_abs_diff", "power_diff", "worst_index", "n_compared")
    ordered = {k: report[k] for k in keys}
    ordered.update({k: v for k, v in report.items() if k not in keys})
    return _dump(ordered, path)


def write_grid_csv(grid: FieldGrid, path) -> None:
    X, Y = np.meshgrid(grid.x, grid.y)
    data = np.column_stack([X.ravel(), Y.ravel(), grid.samples.real.ravel(), grid.samples.imag.ravel()])
    np.savetxt(path, data, delimiter=",", header="x,y,re,im", comments="", fmt="%.17g")


def read_grid_csv(path, z: float = 0.0) -> FieldGrid:
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    samples = (data[:, 2] + 1j * data[:, 3]).reshape(ys.size, xs.size)
    return FieldGrid(samples, float(xs.max()), z)


def write_pgm(values: np.ndarray, path) -> None:
    """16-bit binary PGM; the first image row is the top (largest y) of the grid."""
    img = np.asarray(values, dtype=np.uint16)[::-1]
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(img.astype(">u2").tobytes())


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    m = re.match(rb"P5\s+(\d+)\s+(\d+)\s+(\d+)\s", raw)
    if m is None or int(m.group(3)) != 65535:
        raise InvalidParameterError(f"{path} is not a 16-bit binary PGM")
    w, h = int(m.group(1)), int(m.group(2))
    img = np.frombuffer(raw[m.end(): m.end() + 2 * w * h], dtype=">u2").reshape(h, w)
    return img[::-1].astype(np.uint16)


def magnitude_levels(grid: FieldGrid) -> np.ndarray:
    """|V| scaled to the grid maximum, as integers in [0, 65535]."""
    mag = np.abs(grid.samples)
    peak = mag.max()
    if peak == 0:
        return np.zeros(mag.shape, dtype=np.uint16)
    return np.rint(mag / peak * 65535.0).astype(np.uint16)


def phase_levels(grid: FieldGrid) -> np.ndarray:
    """arg V in [0, 2pi) mapped linearly onto [0, 65535]."""
    ph = np.mod(np.angle(grid.samples), 2.0 * math.pi)
    return np.minimum(np.rint(ph / (2.0 * math.pi) * 65535.0), 65535).astype(np.uint16)


def write_grid_images(grid: FieldGrid, magnitude_path, phase_path) -> None:
    write_pgm(magnitude_levels(grid), magnitude_path)
    write_pgm(phase_levels(grid), phase_path)
