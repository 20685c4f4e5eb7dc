"""Gaussian beam geometry, Laguerre-Gaussian modes and transverse field grids."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DegenerateLoopError, InvalidParameterError
from .specfun import laguerre

DEFAULT_WAVELENGTH = 632.8e-9


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Laguerre-Gaussian label: radial index ``p`` and azimuthal index ``l``."""

    p: int
    l: int

    def __post_init__(self):
        if int(self.p) != self.p or int(self.l) != self.l:
            raise InvalidParameterError("mode indices must be integers")
        if self.p < 0:
            raise InvalidParameterError(f"radial index must be >= 0, got {self.p}")
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "l", int(self.l))

    @property
    def order(self) -> int:
        """Mode order 2p + |l| multiplying the Gouy phase."""
        return 2 * self.p + abs(self.l)


@dataclass(frozen=True)
class BeamGeometry:
    """Waist and wavelength of a paraxial beam, with the derived z-dependence.

    Uses z_R = pi w0^2 / lambda, w(z) = w0 sqrt(1 + (z/z_R)^2),
    R(z) = z (1 + (z_R/z)^2) and Gouy phase arctan(z/z_R).
    """

    w0: float
    wavelength: float = DEFAULT_WAVELENGTH

    def __post_init__(self):
        if not self.w0 > 0 or not math.isfinite(self.w0):
            raise InvalidParameterError(f"waist must be positive, got {self.w0}")
        if not self.wavelength > 0 or not math.isfinite(self.wavelength):
            raise InvalidParameterError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.w0**2 / self.wavelength

    def width(self, z: float = 0.0) -> float:
        return self.w0 * math.sqrt(1.0 + (z / self.rayleigh_range) ** 2)

    def inverse_curvature(self, z: float = 0.0) -> float:
        """1/R(z); zero at the waist, where R is infinite."""
        zr = self.rayleigh_range
        return z / (z * z + zr * zr)

    def curvature_radius(self, z: float = 0.0) -> float:
        if z == 0.0:
            return math.inf
        zr = self.rayleigh_range
        return z + zr * (zr / z)

    def gouy(self, z: float = 0.0) -> float:
        return math.atan2(z, self.rayleigh_range)


@dataclass(frozen=True)
class SppSpec:
    """Spiral phase plate: charge ``q`` and the azimuth of its edge dislocation."""

    q: float
    dislocation_angle: float = 0.0


@dataclass(frozen=True)
class FieldGrid:
    """Complex samples on a uniform square grid spanning [-E, E]^2.

    ``samples[j, i]`` is the field at ``(x[i], y[j])``.
    """

    samples: np.ndarray
    half_extent: float
    z: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 2 or min(s.shape) < 2:
            raise InvalidParameterError("field grid must be 2-D with at least 2x2 samples")
        if not np.all(np.isfinite(s)):
            raise InvalidParameterError("field grid contains non-finite samples")
        if not self.half_extent > 0:
            raise InvalidParameterError("half extent must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def ny(self) -> int:
        return self.samples.shape[0]

    @property
    def nx(self) -> int:
        return self.samples.shape[1]

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(-self.half_extent, self.half_extent, self.ny)

    @property
    def dx(self) -> float:
        return 2.0 * self.half_extent / (self.nx - 1)

    @property
    def dy(self) -> float:
        return 2.0 * self.half_extent / (self.ny - 1)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def power(self) -> float:
        """Riemann-sum estimate of the integrated intensity."""
        return float(self.intensity.sum() * self.dx * self.dy)


def spp_charge(h_s: float, n: float, n0: float, wavelength: float) -> float:
    """Charge imprinted by a plate of step height ``h_s`` and index ``n`` in a medium ``n0``."""
    if not wavelength > 0:
        raise InvalidParameterError("wavelength must be positive")
    return h_s * (n - n0) / wavelength


def lg_mode(idx: ModeIndex, r, phi, z: float, beam: BeamGeometry):
    """Normalised Laguerre-Gaussian mode u_pl(r, phi, z).

    Parameters
    ----------
    idx : ModeIndex
    r, phi : float or array_like
        Polar coordinates; broadcast against each other.
    z : float
        Distance from the waist.
    beam : BeamGeometry

    Returns
    -------
    complex or ndarray
        Normalised so that the integral of |u|^2 r dr dphi is 1.
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(r < 0):
        raise InvalidParameterError("radius must be non-negative")
    a = abs(idx.l)
    w = beam.width(z)
    X = 2.0 * r * r / (w * w)
    lognorm = 0.5 * (math.lgamma(idx.p + 1) - math.lgamma(idx.p + a + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        radial = np.where(X > 0, np.exp(lognorm + 0.5 * a * np.log(X) - 0.5 * X), 1.0 if a == 0 else 0.0)
    radial = radial * laguerre(idx.p, a, X)
    k = beam.wavenumber
    phase = idx.l * phi + 0.5 * k * r * r * beam.inverse_curvature(z) + k * z - idx.order * beam.gouy(z)
    out = math.sqrt(2.0 / math.pi) / w * radial * np.exp(1j * phase)
    return complex(out) if out.ndim == 0 else out


def _grouped_coefficients(entries, z, beam):
    """Pack {ModeIndex: amplitude} into (ls, coefs[l, p]) with Gouy phases folded in."""
    by_l = {}
    for idx, c in entries.items():
        if c != 0:
            by_l.setdefault(idx.l, {})[idx.p] = c
    ls = np.array(sorted(by_l), dtype=np.int64)
    p_top = max((max(d) for d in by_l.values()), default=0)
    coefs = np.zeros((ls.size, p_top + 1), dtype=complex)
    g = beam.gouy(z)
    for i, l in enumerate(ls):
        for p, c in by_l[int(l)].items():
            coefs[i, p] = c * np.exp(-1j * (2 * p + abs(int(l))) * g)
    return ls, coefs


def evaluate(decomp, r, phi, z: float = 0.0, beam: BeamGeometry | None = None):
    """Field sum_{pl} C_pl u_pl(r, phi, z) at arbitrary points (arrays broadcast)."""
    beam = _beam_for(decomp, beam)
    r, phi = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(phi, dtype=float))
    ls, coefs = _grouped_coefficients(decomp.entries, z, beam)
    if ls.size == 0:
        return np.zeros(r.shape, dtype=complex)
    w = beam.width(z)
    X = 2.0 * r * r / (w * w)
    flat = kernels.synthesize_modes(X.ravel(), phi.ravel(), ls, coefs).reshape(r.shape)
    k = beam.wavenumber
    return flat * (math.sqrt(2.0 / math.pi) / w) * np.exp(1j * (0.5 * k * r * r * beam.inverse_curvature(z) + k * z))


def _beam_for(decomp, beam):
    if beam is None:
        return BeamGeometry(decomp.w0)
    if not math.isclose(beam.w0, decomp.w0, rel_tol=1e-12):
        raise InvalidParameterError(f"decomposition waist {decomp.w0} does not match beam waist {beam.w0}")
    return beam


def synthesize(decomp, n=512, half_extent=None, z: float = 0.0, beam: BeamGeometry | None = None) -> FieldGrid:
    """Sample a spectral decomposition on an ``n`` x ``n`` grid at distance ``z``.

    ``n`` may also be an ``(nx, ny)`` pair.  The default half extent is three
    basis waists.
    """
    beam = _beam_for(decomp, beam)
    nx, ny = (n, n) if np.isscalar(n) else n
    E = 3.0 * beam.w0 if half_extent is None else float(half_extent)
    x = np.linspace(-E, E, int(nx))
    y = np.linspace(-E, E, int(ny))
    X, Y = np.meshgrid(x, y)
    V = evaluate(decomp, np.hypot(X, Y), np.arctan2(Y, X), z, beam)
    return FieldGrid(V, E, z)


def _sample_bilinear(grid: FieldGrid, px, py):
    fx = (px + grid.half_extent) / grid.dx
    fy = (py + grid.half_extent) / grid.dy
    i0 = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    j0 = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    tx, ty = fx - i0, fy - j0
    s = grid.samples
    return ((1 - tx) * (1 - ty) * s[j0, i0] + tx * (1 - ty) * s[j0, i0 + 1]
            + (1 - tx) * ty * s[j0 + 1, i0] + tx * ty * s[j0 + 1, i0 + 1])


def topological_charge(grid: FieldGrid, loop_radius: float, center=(0.0, 0.0), n_points: int | None = None) -> float:
    """Winding number of the field phase around a circle.

    The field is interpolated bilinearly onto ``n_points`` equally spaced
    points of the circle; consecutive phase steps are wrapped into (-pi, pi]
    and summed.

    Raises
    ------
    DegenerateLoopError
        If |V| drops below 1e-9 of the grid maximum somewhere on the loop.
    """
    cx, cy = center
    if loop_radius <= 0:
        raise InvalidParameterError("loop radius must be positive")
    if max(abs(cx), abs(cy)) + loop_radius > grid.half_extent:
        raise InvalidParameterError("loop does not fit inside the grid")
    if n_points is None:
        n_points = max(64, int(math.ceil(16 * math.pi * loop_radius / min(grid.dx, grid.dy))))
    t = np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)
    vals = _sample_bilinear(grid, cx + loop_radius * np.cos(t), cy + loop_radius * np.sin(t))
    peak = np.abs(grid.samples).max()
    if peak == 0 or np.abs(vals).min() <= 1e-9 * peak:
        raise DegenerateLoopError("field vanishes on the loop; phase is undefined there")
    steps = np.angle(np.roll(vals, -1) / vals)
    return float(steps.sum() / (2.0 * math.pi))


def charge_map(grid: FieldGrid, rel_floor: float = 1e-9) -> np.ndarray:
    """Winding number of every 2x2 plaquette of the grid.

    Returns an integer array of shape (ny-1, nx-1); plaquettes touching a
    sample below ``rel_floor`` times the peak magnitude are reported as 0.
    """
    s = grid.samples
    a, b, c, d = s[:-1, :-1], s[:-1, 1:], s[1:, 1:], s[1:, :-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        wind = np.angle(b / a) + np.angle(c / b) + np.angle(d / c) + np.angle(a / d)
    out = np.rint(wind / (2.0 * math.pi)).astype(int)
    floor = rel_floor * np.abs(s).max()
    low = np.minimum(np.minimum(np.abs(a), np.abs(b)), np.minimum(np.abs(c), np.abs(d))) <= floor
    out[low] = 0
    return out
