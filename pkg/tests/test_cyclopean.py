import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.ndimage import gaussian_filter

from conftest import luma_stereo
from oracles import dct_matrix, pop_ssim
from hv3d.cyclopean import (
    CsfModel,
    coefficient_frequencies,
    csf_curve,
    csf_weights,
    cyclopean_detail,
    cyclopean_quality,
    dct2,
    extract_block,
    fuse_cyclopean,
    idct2,
    match_block,
    partition_blocks,
    round_half_toward_zero,
    single_window_ssim,
)
from hv3d.videoio import ViewingGeometry

FLAT = CsfModel(low_freq_attenuation=1.0, decay_rate=0.0)


# -- partitioning -------------------------------------------------------------


def test_partition_examples():
    assert partition_blocks(np.zeros((16, 16)), 8) == [(0, 0), (8, 0), (0, 8), (8, 8)]
    assert len(partition_blocks(np.zeros((16, 20)), 8)) == 4
    assert len(partition_blocks(np.zeros((1080, 1920)), 8)) == 240 * 135 == 32400
    with pytest.raises(ValueError):
        partition_blocks(np.zeros((4, 16)), 8)


def test_extract_block(rng):
    a = rng.random((16, 24))
    b = extract_block(a, (8, 8), 8)
    np.testing.assert_array_equal(b.samples, a[8:16, 8:16])
    with pytest.raises(ValueError):
        extract_block(a, (20, 0), 8)


# -- DCT --------------------------------------------------------------------


def test_dct_matches_explicit_matrix(rng):
    for n in (4, 8, 16):
        x = rng.random((n, n)) * 255
        c = dct_matrix(n)
        np.testing.assert_allclose(dct2(x), c @ x @ c.T, rtol=0, atol=1e-10)


def test_dct_constant_block():
    coef = dct2(np.full((8, 8), 3.5))
    assert coef[0, 0] == pytest.approx(8 * 3.5, abs=1e-12)
    coef[0, 0] = 0
    assert np.max(np.abs(coef)) < 1e-12


def test_dct_rejects_non_pow2():
    with pytest.raises(ValueError):
        dct2(np.zeros((6, 6)))
    with pytest.raises(ValueError):
        dct2(np.zeros((8, 4)))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.sampled_from([2, 4, 8, 16, 32]))
def test_dct_round_trip_and_parseval(seed, n):
    x = np.random.default_rng(seed).random((n, n)) * 255
    c = dct2(x)
    assert np.max(np.abs(idct2(c) - x)) < 1e-10
    assert np.sum(c * c) == pytest.approx(np.sum(x * x), rel=1e-12)


# -- CSF --------------------------------------------------------------------


def test_csf_flat():
    np.testing.assert_array_equal(csf_weights(FLAT, 8), np.ones((8, 8)))


def test_csf_curve_shape():
    m = CsfModel()
    assert csf_curve(m, 0.0) == pytest.approx(0.6)
    assert csf_curve(m, 8.0) == pytest.approx(1.0)
    assert csf_curve(m, 16.0) == pytest.approx(math.exp(-0.6))


def test_csf_default_non_increasing_beyond_peak():
    m = CsfModel()
    w = csf_weights(m, 8)
    f = coefficient_frequencies(m, 8)
    diag_f, diag_w = np.diag(f), np.diag(w)
    past = np.flatnonzero(diag_f >= m.peak_frequency)
    assert past.size >= 2
    assert np.all(np.diff(diag_w[past[0]:]) <= 0)
    assert w[0, 0] == 1.0 and np.all(w > 0) and w.max() == 1.0


def test_csf_doubling_distance_doubles_frequency():
    g = ViewingGeometry()
    m1 = CsfModel(geometry=g)
    m2 = CsfModel(geometry=ViewingGeometry(viewing_distance=2 * g.viewing_distance))
    np.testing.assert_allclose(coefficient_frequencies(m2, 8), 2 * coefficient_frequencies(m1, 8), rtol=1e-12)
    expected = csf_curve(m1, 2 * coefficient_frequencies(m1, 8))
    expected = expected / expected.max()
    expected[0, 0] = 1.0
    np.testing.assert_allclose(csf_weights(m2, 8), expected, rtol=1e-12)


def test_csf_lowpass_keep():
    w = csf_weights(CsfModel(lowpass_keep=3), 8)
    assert np.all(w[3:, :] == 0) and np.all(w[:, 3:] == 0) and np.all(w[:3, :3] > 0)


# -- matching ---------------------------------------------------------------


def test_round_half_toward_zero():
    assert round_half_toward_zero([2.5, -2.5, 2.6, -2.6, 0.5, 1.49]).tolist() == [2, -2, 3, -3, 0, 1]


def test_match_block_examples():
    zero = np.zeros((32, 32))
    assert match_block((16, 8), zero, 8, 32) == ((16, 8), False)
    assert match_block((16, 8), np.full((32, 32), 4), 8, 32) == ((12, 8), False)
    assert match_block((0, 8), np.full((32, 32), 4), 8, 32) == ((0, 8), True)
    assert match_block((24, 0), np.full((32, 32), -5), 8, 32) == ((24, 0), True)


def test_matching_constructed_shift(rng):
    tex = rng.random((16, 40)) * 255
    left, right = tex[:, :32], tex[:, 4:36]
    (rx, ry), clamped = match_block((16, 8), np.full((16, 32), 4), 8, 32)
    np.testing.assert_array_equal(left[8:16, 16:24], right[ry:ry + 8, rx:rx + 8])


# -- fusion -----------------------------------------------------------------


def test_fusion_identity_flat_csf(rng):
    b = rng.random((8, 8)) * 255
    out = fuse_cyclopean(b, b, csf_weights(FLAT, 8))
    assert np.max(np.abs(idct2(out.coefficients) - b)) < 1e-10


def test_fusion_cancellation(rng):
    b = rng.random((8, 8))
    b -= b.mean()
    out = fuse_cyclopean(b, -b, csf_weights(CsfModel(), 8))
    assert np.max(np.abs(out.coefficients)) < 1e-12


def test_fusion_compositional(rng):
    bl, br = rng.random((8, 8)) * 255, rng.random((8, 8)) * 255
    w = csf_weights(CsfModel(), 8)
    c = dct_matrix(8)
    expected = w * ((c @ bl @ c.T) + (c @ br @ c.T)) / 2
    np.testing.assert_allclose(fuse_cyclopean(bl, br, w).coefficients, expected, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_fusion_linear(seed, a, b):
    r = np.random.default_rng(seed)
    x1, x2, y1, y2 = (r.random((8, 8)) for _ in range(4))
    w = csf_weights(CsfModel(), 8)
    lhs = fuse_cyclopean(a * x1 + b * x2, a * y1 + b * y2, w).coefficients
    rhs = a * fuse_cyclopean(x1, y1, w).coefficients + b * fuse_cyclopean(x2, y2, w).coefficients
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_single_window_ssim(rng):
    x, y = rng.random((8, 8)) * 255, rng.random((8, 8)) * 255
    assert single_window_ssim(x, y) == pytest.approx(pop_ssim(x, y), rel=1e-12)
    assert single_window_ssim(x, x) == 1.0


# -- cyclopean quality -------------------------------------------------------


def test_cyclopean_identity(rng):
    l, r = rng.random((32, 48)) * 255, rng.random((32, 48)) * 255
    pair = luma_stereo(l, r)
    disp = rng.integers(-6, 7, (32, 48))
    assert cyclopean_quality(pair, pair, disp, disp) == 1.0


def test_cyclopean_single_block_manual(rng):
    rl, rr = rng.random((8, 8)) * 255, rng.random((8, 8)) * 255
    dl = rl + rng.normal(0, 8, (8, 8))
    dr = rr + rng.normal(0, 8, (8, 8))
    zero = np.zeros((8, 8))
    c = dct_matrix(8)
    w = csf_weights(CsfModel(), 8)
    fuse = lambda a, b: c.T @ (w * (c @ a @ c.T + c @ b @ c.T) / 2) @ c
    expected = pop_ssim(fuse(rl, rr), fuse(dl, dr))
    res = cyclopean_detail(luma_stereo(rl, rr), luma_stereo(dl, dr), zero, zero)
    assert res.n_blocks == 1
    assert res.score == pytest.approx(expected, abs=1e-12)


def test_cyclopean_flat_csf_reduces_to_average_view(rng):
    rl, rr = rng.random((16, 16)) * 255, rng.random((16, 16)) * 255
    dl, dr = rl + 5 * rng.random((16, 16)), rr - 5 * rng.random((16, 16))
    zero = np.zeros((16, 16))
    res = cyclopean_detail(luma_stereo(rl, rr), luma_stereo(dl, dr), zero, zero, csf=FLAT)
    expected = [pop_ssim(((rl + rr) / 2)[y:y + 8, x:x + 8], ((dl + dr) / 2)[y:y + 8, x:x + 8])
                for y in (0, 8) for x in (0, 8)]
    np.testing.assert_allclose(res.block_scores, expected, atol=1e-12)


def test_cyclopean_blur_monotone(rng):
    tex = rng.random((64, 72)) * 255
    l, r = tex[:, :64], tex[:, 4:68]
    ref = luma_stereo(l, r)
    disp = np.full((64, 64), 4)
    scores = [cyclopean_quality(ref, luma_stereo(gaussian_filter(l, s), gaussian_filter(r, s)), disp, disp)
              for s in (0.6, 2.0)]
    assert 1.0 > scores[0] > scores[1]


def test_cyclopean_clamp_counts(rng):
    l = rng.random((16, 32)) * 255
    pair = luma_stereo(l, l)
    disp = np.full((16, 32), 20)
    res = cyclopean_detail(pair, pair, disp, np.zeros((16, 32)))
    assert res.ref_clamps == 6 and res.dist_clamps == 0  # x = 0, 8, 16 in both rows


def test_cyclopean_disparity_shape_checked(rng):
    pair = luma_stereo(rng.random((16, 16)), rng.random((16, 16)))
    with pytest.raises(ValueError, match="co-sited"):
        cyclopean_quality(pair, pair, np.zeros((8, 16)), np.zeros((8, 16)))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), sigma=st.floats(0.5, 60))
def test_cyclopean_bounded(seed, sigma):
    r = np.random.default_rng(seed)
    l, rr = r.random((16, 24)) * 255, r.random((16, 24)) * 255
    d = r.integers(-3, 4, (16, 24))
    s = cyclopean_quality(luma_stereo(l, rr), luma_stereo(l + r.normal(0, sigma, l.shape), rr), d, d)
    assert -1.0 <= s <= 1.0
