import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctgrad.core import EdgeMap, GeometryError, GradientField, ImageGrid, gradient_magnitude
from ctgrad.edges import canny_from_gradient, distance_band, edge_f1, hysteresis, nonmax_suppress
from ctgrad.method1 import method1_gradient_combined
from ctgrad.phantom import ellipse_outline

from conftest import oracle_gradient


def _field(gx, gy=None):
    gx = np.asarray(gx, dtype=float)
    return GradientField.from_arrays(gx, np.zeros_like(gx) if gy is None else gy)


def test_nms_zero_field():
    assert np.all(nonmax_suppress(_field(np.zeros((6, 6)))).data == 0)


def test_nms_keeps_plateau():
    # constant magnitude: every neighbor ties, so nothing is suppressed
    out = nonmax_suppress(_field(np.ones((5, 5)))).data
    np.testing.assert_array_equal(out, np.ones((5, 5)))


def test_nms_ramp_along_gradient_keeps_only_the_top():
    gx = np.tile(np.arange(1.0, 9.0), (8, 1))
    out = nonmax_suppress(_field(gx)).data
    assert np.all(out[:, :-1] == 0)
    np.testing.assert_array_equal(out[:, -1], 8.0)


def test_nms_ramp_across_gradient_is_unchanged():
    # magnitude varies along rows but the gradient points along columns
    gx = np.tile(np.arange(1.0, 9.0)[:, None], (1, 8))
    out = nonmax_suppress(_field(gx)).data
    np.testing.assert_array_equal(out, gx)


def test_nms_peak_column():
    gx = np.zeros((8, 8))
    gx[:, 2] = 1.0
    gx[:, 3] = 2.0
    gx[:, 4] = 1.0
    out = nonmax_suppress(_field(gx)).data
    expected = np.zeros((8, 8))
    expected[:, 3] = 2.0
    np.testing.assert_array_equal(out, expected)


def test_nms_peak_row_for_vertical_gradient():
    gy = np.zeros((8, 8))
    gy[2], gy[3], gy[4] = 1.0, 2.0, 1.0
    out = nonmax_suppress(GradientField.from_arrays(np.zeros((8, 8)), gy)).data
    assert np.all(out[3] == 2.0)
    assert np.count_nonzero(out) == 8


def test_nms_diagonal():
    # physical direction (1, 1) is up-right in the array, so magnitude varies with c - r
    n = 9
    offset = np.subtract.outer(np.arange(n), np.arange(n))
    mag = np.maximum(0.0, 3.0 - np.abs(offset))
    g = mag / np.sqrt(2)
    out = nonmax_suppress(GradientField.from_arrays(g, g)).data
    np.testing.assert_allclose(out[offset == 0], 3.0)
    # a diagonal step skips every other band, so offsets +-1 tie with each other and stay
    assert np.all(out[np.abs(offset) >= 2] == 0)


def _brute_nms(gx, gy):
    mag = np.sqrt(gx**2 + gy**2)
    out = np.zeros_like(mag)
    n_r, n_c = mag.shape
    offsets = {0: (0, 1), 1: (-1, 1), 2: (-1, 0), 3: (-1, -1)}
    for r in range(n_r):
        for c in range(n_c):
            k = int(np.rint(np.arctan2(gy[r, c], gx[r, c]) / (np.pi / 4))) % 4
            dr, dc = offsets[k]
            vals = []
            for sgn in (1, -1):
                rr, cc = r + sgn * dr, c + sgn * dc
                vals.append(mag[rr, cc] if 0 <= rr < n_r and 0 <= cc < n_c else 0.0)
            if mag[r, c] >= max(vals):
                out[r, c] = mag[r, c]
    return out


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_nms_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    gx, gy = rng.normal(size=(2, 9, 9))
    out = nonmax_suppress(GradientField.from_arrays(gx, gy)).data
    np.testing.assert_array_equal(out, _brute_nms(gx, gy))
    mag = gradient_magnitude(GradientField.from_arrays(gx, gy)).data
    assert np.all(out <= mag)


def test_hysteresis_all_below_low():
    nms = ImageGrid(np.full((5, 5), 0.05))
    assert hysteresis(nms, 0.1, 0.2).count == 0


def test_hysteresis_chain_kept():
    data = np.zeros((5, 5))
    data[2, :] = 0.15
    data[2, 0] = 0.5
    edges = hysteresis(ImageGrid(data), 0.1, 0.3)
    np.testing.assert_array_equal(edges.data, data > 0)


def test_hysteresis_diagonal_connectivity():
    data = np.zeros((5, 5))
    data[0, 0] = 1.0
    data[1, 1] = data[2, 2] = 0.2
    edges = hysteresis(ImageGrid(data), 0.1, 0.5)
    assert edges.data[2, 2]


def test_hysteresis_drops_isolated_weak():
    data = np.zeros((7, 7))
    data[1, 1] = 1.0
    data[5, 5] = 0.2
    edges = hysteresis(ImageGrid(data), 0.1, 0.5)
    assert edges.data[1, 1] and not edges.data[5, 5]


def test_hysteresis_validation():
    with pytest.raises(ValueError):
        hysteresis(ImageGrid(np.zeros((3, 3))), 0.5, 0.2)
    with pytest.raises(ValueError):
        hysteresis(ImageGrid(np.zeros((3, 3))), -0.1, 0.2)
    with pytest.raises(ValueError):
        canny_from_gradient(_field(np.zeros((3, 3))), 0.3, 0.2)


def test_canny_zero_field():
    assert canny_from_gradient(_field(np.zeros((8, 8)))).count == 0


@pytest.fixture(scope="module")
def disk_field(disk128):
    return method1_gradient_combined(disk128.sino, 2.0, disk128.spec)


def test_canny_disk_ring(disk128, disk_field):
    s = disk128
    edges = canny_from_gradient(disk_field)
    truth = ellipse_outline(s.ellipses, s.spec)
    band = distance_band(truth, 2.0)
    assert edges.count > 0
    assert np.mean(band[edges.data]) >= 0.95
    _, recall, _ = edge_f1(edges, truth, 2.0)
    assert recall >= 0.9


def test_canny_on_oracle_gradient(disk128):
    s = disk128
    gf = GradientField.from_arrays(oracle_gradient(s.image, 2.0, 1), oracle_gradient(s.image, 2.0, 2))
    edges = canny_from_gradient(gf)
    truth = ellipse_outline(s.ellipses, s.spec)
    _, recall, _ = edge_f1(edges, truth, 2.0)
    assert recall == 1.0
    assert np.all(distance_band(truth, 2.0)[edges.data])


@pytest.mark.parametrize("low, high", [(0.05, 0.1), (0.1, 0.25), (0.2, 0.4)])
def test_raising_thresholds_never_adds_pixels(disk_field, low, high):
    a = canny_from_gradient(disk_field, low, high).data
    b = canny_from_gradient(disk_field, min(2 * low, 1), min(2 * high, 1)).data
    assert not np.any(b & ~a)


def test_canny_is_scale_invariant(disk_field):
    scaled = GradientField.from_arrays(10 * disk_field.gx.data, 10 * disk_field.gy.data)
    np.testing.assert_array_equal(canny_from_gradient(disk_field).data, canny_from_gradient(scaled).data)


def test_f1_identical():
    truth = np.zeros((10, 10), dtype=bool)
    truth[3, 2:8] = True
    assert edge_f1(truth, truth) == (1.0, 1.0, 1.0)


def test_f1_empty_prediction():
    truth = np.zeros((10, 10), dtype=bool)
    truth[5, 5] = True
    assert edge_f1(np.zeros_like(truth), truth) == (1.0, 0.0, 0.0)
    assert edge_f1(truth, np.zeros_like(truth)) == (0.0, 1.0, 0.0)


def test_f1_one_pixel_shift():
    truth = np.zeros((12, 12), dtype=bool)
    truth[2:10, 5] = True
    pred = np.roll(truth, 1, axis=1)
    assert edge_f1(pred, truth, 2.0) == (1.0, 1.0, 1.0)
    assert edge_f1(pred, truth, 0.0) == (0.0, 0.0, 0.0)


def test_f1_one_to_one():
    # two predictions near one true pixel: only one may match
    truth = np.zeros((5, 5), dtype=bool)
    truth[2, 2] = True
    pred = np.zeros_like(truth)
    pred[2, 1] = pred[2, 3] = True
    p, r, f1 = edge_f1(pred, truth, 1.0)
    assert (p, r) == (0.5, 1.0)
    assert f1 == pytest.approx(2 / 3)


def test_f1_needs_maximum_matching():
    # a greedy nearest-first assignment would steal truth b for pred 0 and leave pred 1 unmatched
    truth = np.zeros((1, 8), dtype=bool)
    pred = np.zeros_like(truth)
    truth[0, [2, 4]] = True
    pred[0, [3, 5]] = True
    assert edge_f1(pred, truth, 1.0) == (1.0, 1.0, 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_f1_symmetric_at_radius_zero(seed):
    rng = np.random.default_rng(seed)
    a = rng.random((9, 9)) < 0.3
    b = rng.random((9, 9)) < 0.3
    pa, ra, fa = edge_f1(a, b, 0.0)
    pb, rb, fb = edge_f1(b, a, 0.0)
    assert (pa, ra) == (rb, pb)
    assert fa == pytest.approx(fb)
    overlap = np.count_nonzero(a & b)
    if a.any():
        assert pa == overlap / np.count_nonzero(a)


def test_f1_shape_mismatch():
    with pytest.raises(GeometryError):
        edge_f1(np.zeros((4, 4), bool), np.zeros((5, 5), bool))


def test_f1_accepts_edge_maps():
    e = EdgeMap(np.eye(4, dtype=bool))
    assert edge_f1(e, e)[2] == 1.0


def test_distance_band():
    truth = np.zeros((9, 9), dtype=bool)
    truth[4, 4] = True
    band = distance_band(truth, 2.0)
    assert band.sum() == 13  # lattice points within radius 2
    assert not distance_band(np.zeros((3, 3), bool), 2.0).any()
