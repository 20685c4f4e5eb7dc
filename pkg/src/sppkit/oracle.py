"""Brute-force quadrature references for every overlap the closed forms claim to compute.

Nothing here uses the closed-form coefficients, the coupling kernel or the
operator engine.  Mode functions come from :func:`sppkit.paraxial.lg_mode`
and the Laguerre kernel integrand from ``scipy.special.eval_genlaguerre``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss
from scipy.special import eval_genlaguerre

from .classical import SpectralDecomposition
from .errors import InvalidParameterError, NotConvergedError
from .paraxial import BeamGeometry, ModeIndex, lg_mode


@dataclass(frozen=True)
class QuadratureSpec:
    """Node counts and tolerance for the overlap quadratures.

    Parameters
    ----------
    radial_nodes : int
        Gauss-Legendre nodes in rho = sqrt(2) r / w0 on [0, rho_max].
    azimuthal_nodes : int
        Gauss-Legendre nodes over one turn starting at the field's phase cut.
    target_tol : float
        Largest accepted change when both node counts are doubled.
    rho_max : float or None
        Radial cutoff; by default chosen from the largest requested mode.
    """

    radial_nodes: int = 96
    azimuthal_nodes: int = 128
    target_tol: float = 1e-10
    rho_max: float | None = None

    def __post_init__(self):
        if self.radial_nodes < 1 or self.azimuthal_nodes < 1:
            raise InvalidParameterError("node counts must be positive")
        if not self.target_tol > 0:
            raise InvalidParameterError("target_tol must be positive")

    def doubled(self):
        return QuadratureSpec(2 * self.radial_nodes, 2 * self.azimuthal_nodes, self.target_tol, self.rho_max)

    @staticmethod
    def minimum_azimuthal(l_max: int, q: float) -> int:
        """Smallest admissible azimuthal count, 4 (l_max + ceil(q) + 2)."""
        return 4 * (l_max + math.ceil(abs(q)) + 2)


def spp_field(q: float, w0: float, r0: float = 0.0, phi0: float = 0.0, dislocation_angle: float = 0.0):
    """Callable (r, phi) -> Gaussian (optionally displaced) times the plate phase.

    The plate phase is e^{iq[(phi - theta) mod 2pi]}; the returned function
    carries ``cut_angle = theta`` so the quadrature can split at the jump.
    """
    norm = math.sqrt(2.0 / math.pi) / w0

    def field(r, phi):
        r = np.asarray(r, dtype=float)
        phi = np.asarray(phi, dtype=float)
        d2 = r * r + r0 * r0 - 2.0 * r * r0 * np.cos(phi - phi0)
        ramp = np.mod(phi - dislocation_angle, 2.0 * math.pi)
        return norm * np.exp(-d2 / (w0 * w0)) * np.exp(1j * q * ramp)

    field.cut_angle = dislocation_angle
    return field


def _grid(spec, rho_max, cut):
    xr, wr = leggauss(spec.radial_nodes)
    rho = 0.5 * rho_max * (xr + 1.0)
    wr = 0.5 * rho_max * wr
    xa, wa = leggauss(spec.azimuthal_nodes)
    phi = cut + math.pi * (xa + 1.0)
    wa = math.pi * wa
    return rho, wr, phi, wa


def _project(field, indices, w0, spec, rho_max, cut):
    rho, wr, phi, wa = _grid(spec, rho_max, cut)
    r = rho * w0 / math.sqrt(2.0)
    F = np.asarray(field(r[:, None], phi[None, :]), dtype=complex)
    ls = sorted({i.l for i in indices})
    # azimuthal transforms per harmonic, then radial sums per mode
    az = {l: F @ (wa * np.exp(-1j * l * phi)) for l in ls}
    beam = BeamGeometry(w0)
    jac = r * (w0 / math.sqrt(2.0)) * wr  # r dr = r (w0/sqrt2) drho
    out = np.empty(len(indices), dtype=complex)
    for j, idx in enumerate(indices):
        radial = np.conj(lg_mode(idx, r, 0.0, 0.0, beam))
        out[j] = np.sum(az[idx.l] * radial * jac)
    return out


def _default_rho_max(indices, spec):
    if spec.rho_max is not None:
        return spec.rho_max
    top = max(4 * i.p + 2 * abs(i.l) for i in indices)
    return math.sqrt(80.0 + top)


def overlap_coefficients(field, indices, w0: float, spec: QuadratureSpec | None = None,
                         cut_angle: float | None = None, full_output: bool = False):
    """<u_pl, field> for several modes at once, with a node-doubling check.

    Parameters
    ----------
    field : callable
        ``field(r, phi)`` on broadcast arrays.  If it has a ``cut_angle``
        attribute (a phase jump), the azimuthal rule starts there.
    indices : sequence of ModeIndex
    w0 : float
        Waist of the LG basis.
    spec : QuadratureSpec
    full_output : bool
        Also return the per-mode change under doubling.

    Raises
    ------
    NotConvergedError
        If doubling both node counts moves any coefficient by more than
        ``spec.target_tol``.
    """
    spec = spec or QuadratureSpec()
    indices = [i if isinstance(i, ModeIndex) else ModeIndex(*i) for i in indices]
    if not indices:
        return (np.zeros(0, complex), np.zeros(0)) if full_output else np.zeros(0, complex)
    cut = getattr(field, "cut_angle", 0.0) if cut_angle is None else cut_angle
    rho_max = _default_rho_max(indices, spec)
    coarse = _project(field, indices, w0, spec, rho_max, cut)
    fine = _project(field, indices, w0, spec.doubled(), rho_max, cut)
    change = np.abs(fine - coarse)
    worst = float(change.max())
    if worst > spec.target_tol:
        raise NotConvergedError(f"node doubling changed an overlap by {worst:.3g}", estimate=fine, change=worst)
    return (fine, change) if full_output else fine


def overlap_coefficient(field, idx: ModeIndex, w0: float, spec: QuadratureSpec | None = None,
                        cut_angle: float | None = None, full_output: bool = False):
    """Single-mode form of :func:`overlap_coefficients`."""
    res = overlap_coefficients(field, [idx], w0, spec, cut_angle, full_output=True)
    return (complex(res[0][0]), float(res[1][0])) if full_output else complex(res[0][0])


def decompose_field(field, w0: float, p_max: int, l_max: int, spec: QuadratureSpec | None = None,
                    cut_angle: float | None = None) -> SpectralDecomposition:
    """Quadrature decomposition over the window p <= p_max, |l| <= l_max."""
    idx = [ModeIndex(p, l) for p in range(p_max + 1) for l in range(-l_max, l_max + 1)]
    vals = overlap_coefficients(field, idx, w0, spec, cut_angle)
    return SpectralDecomposition(dict(zip(idx, vals)), w0)


def grid_overlap_coefficients(grid, indices, w0: float, beam: BeamGeometry | None = None):
    """<u_pl, V> from sampled field values by the 2-D trapezoid rule.

    Accurate to spectral order when the field is smooth and negligible at
    the grid edge, which makes it a check on synthesized grids read back
    from disk.
    """
    beam = beam or BeamGeometry(w0)
    indices = [i if isinstance(i, ModeIndex) else ModeIndex(*i) for i in indices]
    X, Y = np.meshgrid(grid.x, grid.y)
    r, phi = np.hypot(X, Y), np.arctan2(Y, X)
    wx = np.full(grid.nx, grid.dx)
    wx[[0, -1]] *= 0.5
    wy = np.full(grid.ny, grid.dy)
    wy[[0, -1]] *= 0.5
    weighted = grid.samples * np.outer(wy, wx)
    return np.array([np.sum(np.conj(lg_mode(i, r, phi, grid.z, beam)) * weighted) for i in indices])


_laggauss = lru_cache(maxsize=64)(laggauss)
_hermgauss = lru_cache(maxsize=64)(hermgauss)


def _kernel_rule(p, h, a, b, n):
    s = 0.5 * (a + b)
    if s == int(s):
        x, w = _laggauss(n)
        f = x**int(s) * eval_genlaguerre(p, a, x) * eval_genlaguerre(h, b, x)
        return float(np.dot(w, f))
    # x = t^2 makes the integrand e^{-t^2} |t|^{2s+1} (...) even in t
    t, w = _hermgauss(2 * n)
    x = t * t
    f = np.abs(t) ** (2 * s + 1) * eval_genlaguerre(p, a, x) * eval_genlaguerre(h, b, x)
    return float(np.dot(w, f))


def kernel_quadrature(p: int, h: int, l: int, k: int, spec: QuadratureSpec | None = None,
                      full_output: bool = False):
    """int_0^inf e^{-x} x^{(|l|+|k|)/2} L_p^{|l|}(x) L_h^{|k|}(x) dx by Gauss rules.

    Integer exponents use Gauss-Laguerre; half-integer exponents use
    Gauss-Hermite after x = t^2, where the integrand becomes a polynomial
    times e^{-t^2}.  Both are exact once the node count passes the degree;
    the result is checked by doubling.
    """
    spec = spec or QuadratureSpec()
    a, b = abs(l), abs(k)
    n = max(p + h + (a + b) // 2 + 4, 8)
    v1 = _kernel_rule(p, h, a, b, n)
    v2 = _kernel_rule(p, h, a, b, 2 * n)
    change = abs(v2 - v1)
    if change > spec.target_tol * max(1.0, abs(v2)):
        raise NotConvergedError(f"kernel quadrature changed by {change:.3g} under doubling", estimate=v2, change=change)
    return (v2, change) if full_output else v2


def equivalence_report(classical: SpectralDecomposition, quantum_state, w0: float | None = None,
                       p_max: int | None = None, l_max: int | None = None) -> dict:
    """Compare a classical spectrum with a two-mode state mapped to LG coefficients.

    The comparison window defaults to the classical truncation window, or to
    the union of both supports when the classical side has none.  Missing
    entries count as zero.  ``power_diff`` is the quantum minus the classical
    captured power over the full (unwindowed) data.
    """
    from .quantum import state_to_lg_coeffs

    w0 = classical.w0 if w0 is None else w0
    if not math.isclose(w0, classical.w0, rel_tol=1e-12):
        raise InvalidParameterError("waist mismatch between classical spectrum and comparison")
    qd = state_to_lg_coeffs(quantum_state, w0)
    tr = classical.truncation
    if p_max is None:
        p_max = tr.p_max if tr is not None else max([i.p for i in list(classical.entries) + list(qd.entries)] + [0])
    if l_max is None:
        l_max = tr.l_max if tr is not None else max([abs(i.l) for i in list(classical.entries) + list(qd.entries)] + [0])
    diff = np.abs(classical.dense(p_max, l_max) - qd.dense(p_max, l_max))
    p, j = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return {
        "max_abs_diff": float(diff.max()),
        "power_diff": qd.captured_power - classical.captured_power,
        "worst_index": {"p": int(p), "l": int(j) - l_max},
        "n_compared": int(diff.size),
    }
