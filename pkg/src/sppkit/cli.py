"""Command-line front end: ``sppkit {decompose,synthesize,propagate,compare,charge-map}``.

Physical inputs are SI.  Every command writes into ``--out`` (created if
missing).  Exit status: 0 success, 1 classical/quantum disagreement above
``--tol``, 2 usage error, 3 numerical or input failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io, scenarios
from ._accel import configure_threads
from .classical import SpectralDecomposition, TruncationPolicy
from .errors import SppkitError, TruncationOverflowError
from .oracle import equivalence_report
from .paraxial import DEFAULT_WAVELENGTH, BeamGeometry, charge_map, synthesize, topological_charge
from .quantum import state_to_lg_coeffs

log = logging.getLogger("sppkit")

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2, 3


def _add_beam(p):
    g = p.add_argument_group("beam and plate")
    g.add_argument("--q", type=float, default=0.0, help="plate topological charge")
    g.add_argument("--w0", type=float, default=100e-6, help="waist radius [m]")
    g.add_argument("--wavelength", type=float, default=DEFAULT_WAVELENGTH, help="wavelength [m]")
    g.add_argument("--r0", type=float, default=0.0, help="beam displacement [m]")
    g.add_argument("--phi0", type=float, default=0.0, help="displacement azimuth [rad]")
    g.add_argument("--dislocation-angle", type=float, default=0.0, help="azimuth of the plate step [rad]")


def _add_trunc(p):
    g = p.add_argument_group("truncation")
    g.add_argument("--pmax", type=int, default=40)
    g.add_argument("--lmax", type=int, default=40)
    g.add_argument("--kmax", type=int, default=40, help="harmonic cutoff of the operator expansion")
    g.add_argument("--series-tol", type=float, default=1e-12)
    g.add_argument("--tail-tol", type=float, default=0.1, help="largest tolerated norm lost by the operator path")


def _add_grid(p):
    g = p.add_argument_group("grid")
    g.add_argument("--grid-n", type=int, default=512)
    g.add_argument("--grid-extent", type=float, default=None, help="grid half extent [m], default 3 w0")
    g.add_argument("--table", type=Path, default=None, help="coefficient table (JSON or CSV) instead of a scenario")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sppkit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="write LG coefficient tables for a scenario")
    _add_beam(p)
    _add_trunc(p)
    p.add_argument("--method", choices=("classical", "quantum", "both"), default="classical")
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("synthesize", help="sample the field on a grid")
    _add_beam(p)
    _add_trunc(p)
    _add_grid(p)
    p.add_argument("--z", type=float, default=0.0, help="distance from the waist [m]")
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("propagate", help="sample the field at several distances")
    _add_beam(p)
    _add_trunc(p)
    _add_grid(p)
    p.add_argument("--z", type=float, nargs="+", default=[0.0])
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("compare", help="classical vs quantum equivalence report")
    _add_beam(p)
    _add_trunc(p)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--quantum-method", choices=("operator", "closed"), default="operator")
    p.add_argument("--quantum-kmax", type=int, default=None,
                   help="override the operator harmonic cutoff (e.g. for a negative control)")
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("charge-map", help="vortex positions and loop charges")
    _add_beam(p)
    _add_trunc(p)
    _add_grid(p)
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--floor", type=float, default=1e-4,
                   help="ignore plaquettes darker than this fraction of the peak magnitude")
    p.add_argument("--loop-radius", type=float, nargs="*", default=None,
                   help="loop radii [m] for the circulation diagnostic, default 0.5, 1, 2 w0")
    p.add_argument("--out", type=Path, default=Path("."))
    return parser


def _policy(args) -> TruncationPolicy:
    return TruncationPolicy(args.pmax, args.lmax, args.series_tol, args.kmax)


def _classical(args) -> SpectralDecomposition:
    return scenarios.classical_decomposition(args.q, args.r0, args.phi0, args.w0, _policy(args),
                                             args.dislocation_angle)


def _quantum_state(args, method="operator", k_max=None):
    return scenarios.quantum_state(args.q, args.r0, args.phi0, args.w0, _policy(args), method=method,
                                   tail_tol=args.tail_tol, dislocation_angle=args.dislocation_angle, k_max=k_max)


def _write_table(decomp, out: Path, stem: str):
    io.write_decomposition_json(decomp, out / f"{stem}.json")
    io.write_decomposition_csv(decomp, out / f"{stem}.csv")


def cmd_decompose(args) -> int:
    policy = _policy(args)
    if args.method in ("classical", "both"):
        cl = _classical(args)
        _write_table(cl, args.out, "classical")
        log.info("classical: %d entries, captured power %.12g", len(cl), cl.captured_power)
    if args.method in ("quantum", "both"):
        st = _quantum_state(args)
        io.write_state_json(st, args.out / "quantum_state.json")
        qd = state_to_lg_coeffs(st, args.w0).restricted(policy.p_max, policy.l_max)
        qd = SpectralDecomposition(qd.entries, args.w0, policy, args.q)
        _write_table(qd, args.out, "quantum")
        log.info("quantum: %d entries, captured power %.12g", len(qd), qd.captured_power)
    if args.method == "both":
        rep = equivalence_report(cl, st, args.w0)
        io.write_report_json(rep, args.out / "report.json")
        print(f"max_abs_diff={rep['max_abs_diff']:.3e} power_diff={rep['power_diff']:.3e}")
    return EXIT_OK


def _decomp_for_grid(args) -> SpectralDecomposition:
    if args.table is not None:
        d = io.read_decomposition(args.table, args.w0)
        return SpectralDecomposition(d.entries, args.w0, d.truncation, d.q)
    return _classical(args)


def _write_grid(grid, out: Path, stem: str):
    io.write_grid_csv(grid, out / f"{stem}.csv")
    io.write_grid_images(grid, out / f"{stem}_abs.pgm", out / f"{stem}_phase.pgm")


def cmd_synthesize(args) -> int:
    beam = BeamGeometry(args.w0, args.wavelength)
    grid = synthesize(_decomp_for_grid(args), args.grid_n, args.grid_extent, args.z, beam)
    _write_grid(grid, args.out, "field")
    log.info("grid power %.12g", grid.power())
    return EXIT_OK


def cmd_propagate(args) -> int:
    beam = BeamGeometry(args.w0, args.wavelength)
    decomp = _decomp_for_grid(args)
    summary = []
    for i, z in enumerate(args.z):
        extent = args.grid_extent * beam.width(z) / beam.w0 if args.grid_extent else 3.0 * beam.width(z)
        grid = synthesize(decomp, args.grid_n, extent, z, beam)
        _write_grid(grid, args.out, f"field_{i:03d}")
        summary.append({"index": i, "z": z, "half_extent": extent, "power": grid.power(),
                        "width": beam.width(z), "gouy": beam.gouy(z)})
    (args.out / "propagation.json").write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    cl = _classical(args)
    overflow = None
    try:
        st = _quantum_state(args, args.quantum_method, args.quantum_kmax)
    except TruncationOverflowError as exc:
        # still report the disagreement, computed without the tail guard
        overflow = exc.tail
        args.tail_tol = float("inf")
        st = _quantum_state(args, args.quantum_method, args.quantum_kmax)
    rep = equivalence_report(cl, st, args.w0)
    rep["tol"] = args.tol
    rep["quantum_tail"] = st.info.get("tail")
    if overflow is not None:
        rep["truncation_overflow"] = overflow
    rep["pass"] = bool(rep["max_abs_diff"] < args.tol and overflow is None)
    io.write_report_json(rep, args.out / "report.json")
    print(f"max_abs_diff={rep['max_abs_diff']:.3e} power_diff={rep['power_diff']:.3e} "
          f"worst=(p={rep['worst_index']['p']}, l={rep['worst_index']['l']}) "
          f"{'PASS' if rep['pass'] else 'FAIL'}")
    return EXIT_OK if rep["pass"] else EXIT_MISMATCH


def cmd_charge_map(args) -> int:
    beam = BeamGeometry(args.w0, args.wavelength)
    grid = synthesize(_decomp_for_grid(args), args.grid_n, args.grid_extent, args.z, beam)
    cmap = charge_map(grid, args.floor)
    js, is_ = np.nonzero(cmap)
    half = 0.5 * grid.dx
    with open(args.out / "charges.csv", "w") as fh:
        fh.write("x,y,charge\n")
        for j, i in zip(js, is_):
            fh.write(f"{float(grid.x[i] + half)!r},{float(grid.y[j] + half)!r},{int(cmap[j, i])}\n")
    radii = args.loop_radius if args.loop_radius else [0.5 * args.w0, args.w0, 2.0 * args.w0]
    loops = []
    for R in radii:
        try:
            loops.append({"radius": R, "charge": topological_charge(grid, R)})
        except SppkitError as exc:
            loops.append({"radius": R, "charge": None, "error": str(exc)})
    summary = {"net_charge": int(cmap.sum()), "n_vortices": int(np.count_nonzero(cmap)), "loops": loops}
    (args.out / "charge_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    return EXIT_OK


COMMANDS = {
    "decompose": cmd_decompose,
    "synthesize": cmd_synthesize,
    "propagate": cmd_propagate,
    "compare": cmd_compare,
    "charge-map": cmd_charge_map,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    for name in ("w0", "wavelength"):
        if not getattr(args, name) > 0:
            parser.error(f"--{name} must be positive")
    if args.r0 < 0:
        parser.error("--r0 must be non-negative")
    configure_threads()
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except (SppkitError, OSError) as exc:
        print(f"sppkit: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
