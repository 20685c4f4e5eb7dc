"""Closed-form Laguerre-Gaussian spectra of (displaced) Gaussian beams behind a spiral phase plate."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import InvalidParameterError
from .paraxial import ModeIndex
from .specfun import bessel_i, coupling_kernel, sinc_phase


@dataclass(frozen=True)
class TruncationPolicy:
    """Index window and tolerances for the (infinite) modal sums.

    Parameters
    ----------
    p_max, l_max : int
        Keep modes with p <= p_max and |l| <= l_max.
    series_tol : float
        Input amplitudes below this magnitude are skipped in compositions.
    k_max : int
        Harmonic cutoff handed to the operator expansion.
    """

    p_max: int = 40
    l_max: int = 40
    series_tol: float = 1e-12
    k_max: int = 40

    def __post_init__(self):
        if min(self.p_max, self.l_max, self.k_max) < 0:
            raise InvalidParameterError("truncation indices must be non-negative")
        if not self.series_tol > 0:
            raise InvalidParameterError("series_tol must be positive")

    def indices(self):
        """All ModeIndex values in the window, ordered by (p, l)."""
        return [ModeIndex(p, l) for p in range(self.p_max + 1) for l in range(-self.l_max, self.l_max + 1)]

    def to_dict(self) -> dict:
        return asdict(self)


class SpectralDecomposition:
    """Sparse map ModeIndex -> complex amplitude at the waist ``w0``.

    Exact zeros are not stored.  ``captured_power`` is the sum of |C|^2 over
    the stored entries and ``deficit`` is 1 minus that.
    """

    def __init__(self, entries, w0: float = 1.0, truncation: TruncationPolicy | None = None, q: float | None = None):
        clean = {}
        for idx, c in dict(entries).items():
            idx = idx if isinstance(idx, ModeIndex) else ModeIndex(*idx)
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise InvalidParameterError(f"non-finite amplitude at {idx}")
            if c != 0:
                clean[idx] = clean.get(idx, 0j) + c
        if not w0 > 0:
            raise InvalidParameterError("basis waist must be positive")
        self.entries = dict(sorted(clean.items()))
        self.w0 = float(w0)
        self.truncation = truncation
        self.q = q

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx):
        idx = idx if isinstance(idx, ModeIndex) else ModeIndex(*idx)
        return self.entries.get(idx, 0j)

    def __add__(self, other):
        if not math.isclose(self.w0, other.w0):
            raise InvalidParameterError("cannot add decompositions with different waists")
        merged = dict(self.entries)
        for idx, c in other.entries.items():
            merged[idx] = merged.get(idx, 0j) + c
        return SpectralDecomposition(merged, self.w0, self.truncation)

    def scaled(self, factor: complex):
        return SpectralDecomposition({i: c * factor for i, c in self.entries.items()}, self.w0, self.truncation, self.q)

    def restricted(self, p_max: int, l_max: int):
        """Entries inside the window p <= p_max, |l| <= l_max."""
        keep = {i: c for i, c in self.entries.items() if i.p <= p_max and abs(i.l) <= l_max}
        return SpectralDecomposition(keep, self.w0, self.truncation, self.q)

    @property
    def captured_power(self) -> float:
        return float(sum(abs(c) ** 2 for c in self.entries.values()))

    @property
    def deficit(self) -> float:
        return 1.0 - self.captured_power

    def dense(self, p_max: int, l_max: int) -> np.ndarray:
        """Array ``a[p, l + l_max]`` over the window; entries outside are dropped."""
        out = np.zeros((p_max + 1, 2 * l_max + 1), dtype=complex)
        for idx, c in self.entries.items():
            if idx.p <= p_max and abs(idx.l) <= l_max:
                out[idx.p, idx.l + l_max] = c
        return out

    @classmethod
    def from_dense(cls, arr, w0=1.0, truncation=None, q=None):
        arr = np.asarray(arr)
        l_max = (arr.shape[1] - 1) // 2
        ps, cols = np.nonzero(arr)
        return cls({ModeIndex(int(p), int(j) - l_max): arr[p, j] for p, j in zip(ps, cols)}, w0, truncation, q)

    def __repr__(self):
        return f"SpectralDecomposition(n={len(self)}, w0={self.w0:g}, captured_power={self.captured_power:.12g})"


def _lg_norm_log(p, a):
    return 0.5 * (math.lgamma(p + 1) + math.lgamma(p + a + 1))


def gaussian_spp_coeffs(q: float, trunc: TruncationPolicy | None = None, w0: float = 1.0,
                        dislocation_angle: float = 0.0) -> SpectralDecomposition:
    """LG spectrum of an on-axis fundamental Gaussian behind a charge-``q`` plate.

    C_pl = sinc_phase(q, l) (|l|/2) Gamma(|l|/2 + p) / sqrt(p! (p+|l|)!) for
    l != 0 and C_p0 = sinc_phase(q, 0) delta_{p0}.  A dislocation at angle
    theta multiplies C_pl by e^{-il theta}.
    """
    trunc = trunc or TruncationPolicy()
    entries = {}
    for l in range(-trunc.l_max, trunc.l_max + 1):
        s = sinc_phase(q, l)
        if s == 0:
            continue
        s *= np.exp(-1j * l * dislocation_angle)
        if l == 0:
            entries[ModeIndex(0, 0)] = s
            continue
        a = abs(l)
        for p in range(trunc.p_max + 1):
            entries[ModeIndex(p, l)] = s * 0.5 * a * math.exp(math.lgamma(0.5 * a + p) - _lg_norm_log(p, a))
    return SpectralDecomposition(entries, w0, trunc, q)


def displaced_gaussian_coeffs(r0: float, phi0: float, w0: float,
                              trunc: TruncationPolicy | None = None) -> SpectralDecomposition:
    """LG spectrum (waist ``w0``) of the fundamental Gaussian centred at (r0, phi0).

    c_pl = e^{-t} t^{p+|l|/2} (-1)^p e^{-il phi0} / sqrt(p! (p+|l|)!),
    t = r0^2 / (2 w0^2).
    """
    if r0 < 0:
        raise InvalidParameterError("displacement must be non-negative")
    trunc = trunc or TruncationPolicy()
    t = r0 * r0 / (2.0 * w0 * w0)
    if t == 0.0:
        return SpectralDecomposition({ModeIndex(0, 0): 1.0}, w0, trunc, 0.0)
    logt = math.log(t)
    entries = {}
    for p in range(trunc.p_max + 1):
        for l in range(-trunc.l_max, trunc.l_max + 1):
            a = abs(l)
            mag = math.exp(-t + (p + 0.5 * a) * logt - _lg_norm_log(p, a))
            if mag == 0.0:
                continue
            entries[ModeIndex(p, l)] = (-1) ** p * mag * np.exp(-1j * l * phi0)
    return SpectralDecomposition(entries, w0, trunc, 0.0)


def displaced_gaussian_field(r, phi, r0: float, phi0: float, w0: float):
    """Fundamental Gaussian of waist ``w0`` centred at polar position (r0, phi0), at z = 0."""
    r = np.asarray(r, dtype=float)
    d2 = r * r + r0 * r0 - 2.0 * r * r0 * np.cos(np.asarray(phi) - phi0)
    return math.sqrt(2.0 / math.pi) / w0 * np.exp(-d2 / (w0 * w0))


def bessel_azimuthal_spectrum(r: float, r0: float, phi0: float, w0: float, l_max: int) -> np.ndarray:
    """Azimuthal harmonics h_l of the displaced Gaussian on the circle of radius ``r``.

    Returns an array indexed by ``l + l_max`` for l in [-l_max, l_max] such
    that sum_l h_l e^{il phi} is the displaced Gaussian at (r, phi).
    """
    if r < 0 or r0 < 0:
        raise InvalidParameterError("radii must be non-negative")
    ls = np.arange(-l_max, l_max + 1)
    arg = 2.0 * r * r0 / (w0 * w0)
    # fold e^{-arg} into I_l so that large arguments stay finite
    env = math.sqrt(2.0 / math.pi) / w0 * math.exp(-((r - r0) ** 2) / (w0 * w0))
    scaled = np.array([bessel_i(int(l), arg) for l in range(l_max + 1)]) * math.exp(-arg)
    return env * scaled[np.abs(ls)] * np.exp(-1j * ls * phi0)


def spp_coupling_coeff(q: float, src: ModeIndex, dst: ModeIndex, dislocation_angle: float = 0.0) -> complex:
    """Amplitude transferred from mode ``src`` = (p, l) to ``dst`` = (h, k) by the plate.

    sinc_phase(q, k - l) sqrt(p! h! / ((p+|l|)! (h+|k|)!)) I_{p,h}(l, k).
    """
    s = sinc_phase(q, dst.l - src.l)
    if s == 0:
        return 0j
    if dislocation_angle:
        s *= np.exp(-1j * (dst.l - src.l) * dislocation_angle)
    norm = math.exp(-0.5 * (math.lgamma(src.p + abs(src.l) + 1) - math.lgamma(src.p + 1)
                            + math.lgamma(dst.p + abs(dst.l) + 1) - math.lgamma(dst.p + 1)))
    return complex(s * norm * coupling_kernel(src.p, dst.p, src.l, dst.l))


@lru_cache(maxsize=4096)
def _coupling_block(a: int, b: int, p_max: int, h_max: int) -> np.ndarray:
    m = kernels.coupling_matrix(a, b, p_max, h_max)
    m.flags.writeable = False
    return m


def displaced_spp_coeffs(q: float, r0: float, phi0: float, w0: float,
                         trunc: TruncationPolicy | None = None,
                         dislocation_angle: float = 0.0) -> SpectralDecomposition:
    """LG spectrum of a displaced Gaussian after the plate.

    D_hk = sum_{pl} c_pl C_{pl,hk}: the displaced spectrum composed with the
    plate coupling, as a dense product over the truncation window.  Input
    amplitudes below ``trunc.series_tol`` are skipped.
    """
    trunc = trunc or TruncationPolicy()
    src = displaced_gaussian_coeffs(r0, phi0, w0, trunc)
    by_l = {}
    for idx, c in src.entries.items():
        if abs(c) >= trunc.series_tol:
            by_l.setdefault(idx.l, {})[idx.p] = c
    L = trunc.l_max
    out = np.zeros((trunc.p_max + 1, 2 * L + 1), dtype=complex)
    for l, col in by_l.items():
        p_top = max(col)
        vec = np.zeros(p_top + 1, dtype=complex)
        for p, c in col.items():
            vec[p] = c
        for k in range(-L, L + 1):
            s = sinc_phase(q, k - l)
            if s == 0:
                continue
            if dislocation_angle:
                s *= np.exp(-1j * (k - l) * dislocation_angle)
            out[:, k + L] += s * (vec @ _coupling_block(abs(l), abs(k), p_top, trunc.p_max))
    return SpectralDecomposition.from_dense(out, w0, trunc, q)
