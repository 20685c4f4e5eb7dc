import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial.legendre import leggauss

from sppkit import DegenerateLoopError, InvalidParameterError
from sppkit.classical import SpectralDecomposition, gaussian_spp_coeffs
from sppkit.paraxial import (BeamGeometry, FieldGrid, ModeIndex, charge_map, evaluate, lg_mode, spp_charge,
                             synthesize, topological_charge)

W0 = 100e-6


def _single(p, l, w0=W0, c=1.0):
    return SpectralDecomposition({ModeIndex(p, l): c}, w0)


# --- geometry ---------------------------------------------------------------

def test_mode_index_validation():
    with pytest.raises(InvalidParameterError):
        ModeIndex(-1, 0)
    with pytest.raises(InvalidParameterError):
        ModeIndex(0.5, 0)
    assert ModeIndex(2, -3).order == 7
    assert ModeIndex(0, 1) < ModeIndex(1, -5)


def test_beam_geometry_at_waist_and_rayleigh_range():
    beam = BeamGeometry(W0)
    zr = beam.rayleigh_range
    assert zr == pytest.approx(math.pi * W0**2 / 632.8e-9)
    assert beam.width(0) == W0
    assert beam.width(zr) == pytest.approx(math.sqrt(2) * W0)
    assert beam.gouy(zr) == pytest.approx(math.pi / 4)
    assert beam.curvature_radius(0) == math.inf
    assert beam.curvature_radius(zr) == pytest.approx(2 * zr)
    assert beam.inverse_curvature(zr) == pytest.approx(1 / (2 * zr))
    with pytest.raises(InvalidParameterError):
        BeamGeometry(0.0)
    with pytest.raises(InvalidParameterError):
        BeamGeometry(W0, -1.0)


@given(st.floats(-1e3, 1e3))
def test_curvature_forms_agree(zfac):
    beam = BeamGeometry(W0)
    z = zfac * beam.rayleigh_range
    if z != 0:
        assert beam.inverse_curvature(z) == pytest.approx(1 / beam.curvature_radius(z), rel=1e-12)


@pytest.mark.parametrize("step, q", [(632.8e-9, 1.0), (2.5 * 632.8e-9, 2.5), (0.0, 0.0)])
def test_spp_charge_examples(step, q):
    assert spp_charge(step / 0.5, 1.5, 1.0, 632.8e-9) == pytest.approx(q)


def test_spp_charge_equal_indices():
    assert spp_charge(1e-3, 1.4, 1.4, 632.8e-9) == 0.0


# --- mode functions ---------------------------------------------------------

def test_fundamental_mode_at_waist():
    beam = BeamGeometry(W0)
    r = np.linspace(0, 3 * W0, 41)
    expect = math.sqrt(2 / (math.pi * W0**2)) * np.exp(-r * r / W0**2)
    np.testing.assert_allclose(lg_mode(ModeIndex(0, 0), r, 0.3, 0.0, beam), expect, rtol=1e-14)


@pytest.mark.parametrize("p, l", [(0, 1), (2, -3), (4, 2)])
def test_vortex_modes_vanish_on_axis(p, l):
    assert lg_mode(ModeIndex(p, l), 0.0, 1.1, 0.0, BeamGeometry(W0)) == 0


def test_lg_mode_rejects_negative_radius():
    with pytest.raises(InvalidParameterError):
        lg_mode(ModeIndex(0, 0), -1.0, 0.0, 0.0, BeamGeometry(W0))


def _overlap_matrix(z):
    beam = BeamGeometry(W0)
    w = beam.width(z)
    x, wr = leggauss(160)
    rmax = 9.0 * w
    r = 0.5 * rmax * (x + 1)
    wr = 0.5 * rmax * wr * r
    n_phi = 32
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    modes = [ModeIndex(p, l) for p in range(5) for l in range(-4, 5)]
    U = np.array([lg_mode(m, r[:, None], phi[None, :], z, beam).ravel() for m in modes])
    wts = (wr[:, None] * np.full(n_phi, 2 * math.pi / n_phi)[None, :]).ravel()
    return (U.conj() * wts) @ U.T


@pytest.mark.parametrize("zfac", [0.0, 1.0])
def test_mode_orthonormality(zfac):
    z = zfac * BeamGeometry(W0).rayleigh_range
    G = _overlap_matrix(z)
    assert np.abs(G - np.eye(G.shape[0])).max() < 1e-8


# --- synthesis --------------------------------------------------------------

def test_synthesize_single_gaussian_matches_mode():
    grid = synthesize(_single(0, 0), n=65)
    X, Y = np.meshgrid(grid.x, grid.y)
    expect = math.sqrt(2 / (math.pi * W0**2)) * np.exp(-(X * X + Y * Y) / W0**2)
    np.testing.assert_allclose(grid.samples, expect, rtol=1e-12, atol=1e-12 * expect.max())
    assert grid.half_extent == pytest.approx(3 * W0)


def test_synthesize_matches_pointwise_modes_off_waist():
    beam = BeamGeometry(W0)
    z = 0.7 * beam.rayleigh_range
    d = SpectralDecomposition({ModeIndex(1, 2): 0.6, ModeIndex(0, -1): 0.8j}, W0)
    grid = synthesize(d, n=33, z=z)
    X, Y = np.meshgrid(grid.x, grid.y)
    r, phi = np.hypot(X, Y), np.arctan2(Y, X)
    expect = 0.6 * lg_mode(ModeIndex(1, 2), r, phi, z, beam) + 0.8j * lg_mode(ModeIndex(0, -1), r, phi, z, beam)
    np.testing.assert_allclose(grid.samples, expect, atol=1e-12 * np.abs(expect).max())


def test_synthesize_empty_decomposition_is_zero():
    grid = synthesize(SpectralDecomposition({}, W0), n=16)
    assert not np.any(grid.samples)


def test_synthesize_rejects_mismatched_waist():
    with pytest.raises(InvalidParameterError):
        synthesize(_single(0, 0), n=8, beam=BeamGeometry(2 * W0))


def test_integer_charge_vortex_null_on_axis():
    d = gaussian_spp_coeffs(1.0, w0=W0)
    assert abs(evaluate(d, 0.0, 0.0)) < 1e-12


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(-6, 6), st.floats(-2, 2), st.floats(-2, 2)),
                min_size=1, max_size=6),
       st.lists(st.tuples(st.integers(0, 6), st.integers(-6, 6), st.floats(-2, 2), st.floats(-2, 2)),
                min_size=1, max_size=6))
def test_synthesize_is_additive(a, b):
    A = SpectralDecomposition({ModeIndex(p, l): complex(x, y) for p, l, x, y in a}, W0)
    B = SpectralDecomposition({ModeIndex(p, l): complex(x, y) for p, l, x, y in b}, W0)
    gs = synthesize(A + B, n=17).samples
    ga = synthesize(A, n=17).samples
    gb = synthesize(B, n=17).samples
    scale = max(np.abs(ga).max(), np.abs(gb).max(), 1.0 / W0)
    assert np.abs(gs - (ga + gb)).max() <= 1e-12 * scale


def test_power_conserved_under_propagation():
    # a band-limited table, so the grid holds all of its power at both planes
    d = gaussian_spp_coeffs(1.5, w0=W0).restricted(6, 6)
    beam = BeamGeometry(W0)
    zr = beam.rayleigh_range
    p0 = synthesize(d, n=301, half_extent=8 * W0).power()
    p1 = synthesize(d, n=301, half_extent=8 * beam.width(zr), z=zr).power()
    assert abs(p0 - p1) < 1e-6
    assert p0 == pytest.approx(d.captured_power, abs=1e-6)


# --- field grid and charges -------------------------------------------------

def test_field_grid_validation():
    with pytest.raises(InvalidParameterError):
        FieldGrid(np.zeros(4), 1.0)
    with pytest.raises(InvalidParameterError):
        FieldGrid(np.full((3, 3), np.nan), 1.0)
    with pytest.raises(InvalidParameterError):
        FieldGrid(np.zeros((3, 3)), 0.0)


@pytest.mark.parametrize("l", [1, -2, 3])
def test_topological_charge_of_single_mode(l):
    grid = synthesize(_single(0, l), n=129)
    assert topological_charge(grid, W0) == pytest.approx(l, abs=1e-6)


def test_topological_charge_of_gaussian_is_zero():
    grid = synthesize(_single(0, 0), n=65)
    assert topological_charge(grid, W0) == pytest.approx(0.0, abs=1e-12)


def test_topological_charge_off_centre_loop():
    grid = synthesize(_single(0, 1), n=129)
    assert topological_charge(grid, 0.5 * W0, center=(1.2 * W0, 0.0)) == pytest.approx(0.0, abs=1e-6)


def test_topological_charge_degenerate_loop():
    # real field x: the loop crosses its zero line at the top and bottom
    x = np.linspace(-1.0, 1.0, 33)
    grid = FieldGrid(np.tile(x, (33, 1)), 1.0)
    with pytest.raises(DegenerateLoopError):
        topological_charge(grid, 0.5, n_points=64)


def test_topological_charge_rejects_bad_loops():
    grid = synthesize(_single(0, 1), n=33)
    with pytest.raises(InvalidParameterError):
        topological_charge(grid, 0.0)
    with pytest.raises(InvalidParameterError):
        topological_charge(grid, 4 * W0)


@given(st.sampled_from([0.5, 1.5, 2.5]), st.floats(0.15, 2.5), st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_topological_charge_is_integer_on_zero_avoiding_loops(q, radius, cx, cy):
    grid = _spp_grid(q)
    R = radius * W0
    try:
        val = topological_charge(grid, R, center=(cx * W0, cy * W0))
    except (DegenerateLoopError, InvalidParameterError):
        return
    assert abs(val - round(val)) < 1e-6


_GRIDS = {}


def _spp_grid(q):
    if q not in _GRIDS:
        _GRIDS[q] = synthesize(gaussian_spp_coeffs(q, w0=W0), n=129)
    return _GRIDS[q]


def test_charge_map_counts_single_vortex():
    cmap = charge_map(synthesize(_single(0, 2), n=64), rel_floor=1e-12)
    assert cmap.sum() == 2


def test_charge_map_floor_suppresses_dark_plaquettes():
    grid = synthesize(_single(0, 1), n=64)
    assert charge_map(grid, rel_floor=0.5).sum() == 0
