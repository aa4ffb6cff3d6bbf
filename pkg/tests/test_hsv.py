import colorsys

import numpy as np
import pytest

from lumifit.hsv import HsvDecomposition, hsv_to_rgb, recombine, rgb_to_hsv


def test_matches_colorsys_pixel_by_pixel():
    rng = np.random.default_rng(0)
    rgb = rng.uniform(size=(500, 3))
    dec = rgb_to_hsv(rgb.reshape(-1, 1, 3))
    for k, (r, g, b) in enumerate(rgb):
        h, s, v = colorsys.rgb_to_hsv(r, g, b)
        assert abs(dec.hue[k, 0] - h) < 1e-12
        assert abs(dec.saturation[k, 0] - s) < 1e-12
        assert abs(dec.value[k, 0] - v) < 1e-12


def test_inverse_matches_colorsys():
    rng = np.random.default_rng(1)
    hsv = rng.uniform(size=(500, 3))
    dec = HsvDecomposition(
        hue=hsv[:, 0].reshape(-1, 1).copy(),
        saturation=hsv[:, 1].reshape(-1, 1).copy(),
        value=hsv[:, 2].reshape(-1, 1).copy(),
    )
    rgb = hsv_to_rgb(dec)
    for k, (h, s, v) in enumerate(hsv):
        expected = colorsys.hsv_to_rgb(h, s, v)
        np.testing.assert_allclose(rgb[k, 0], expected, atol=1e-12)


def test_roundtrip_error_small():
    rng = np.random.default_rng(2)
    rgb = rng.uniform(size=(100, 1000, 3))
    back = hsv_to_rgb(rgb_to_hsv(rgb))
    assert np.max(np.abs(back - rgb)) < 1e-12


@pytest.mark.parametrize(
    "rgb,expected_h,expected_s,expected_v",
    [
        ((1.0, 0.0, 0.0), 0.0, 1.0, 1.0),
        ((0.0, 1.0, 0.0), 1 / 3, 1.0, 1.0),
        ((0.0, 0.0, 1.0), 2 / 3, 1.0, 1.0),
        ((0.5, 0.5, 0.5), 0.0, 0.0, 0.5),
        ((0.0, 0.0, 0.0), 0.0, 0.0, 0.0),
        ((1.0, 1.0, 0.0), 1 / 6, 1.0, 1.0),
    ],
)
def test_named_colors(rgb, expected_h, expected_s, expected_v):
    dec = rgb_to_hsv(np.array(rgb).reshape(1, 1, 3))
    assert dec.hue[0, 0] == pytest.approx(expected_h, abs=1e-12)
    assert dec.saturation[0, 0] == pytest.approx(expected_s, abs=1e-12)
    assert dec.value[0, 0] == pytest.approx(expected_v, abs=1e-12)


def test_hue_stays_in_unit_interval():
    rng = np.random.default_rng(3)
    dec = rgb_to_hsv(rng.uniform(size=(64, 64, 3)))
    assert dec.hue.min() >= 0.0 and dec.hue.max() < 1.0


def test_hue_just_below_wraparound_is_red():
    dec = HsvDecomposition(
        hue=np.array([[1.0 - 1e-9]]),
        saturation=np.array([[1.0]]),
        value=np.array([[1.0]]),
    )
    np.testing.assert_allclose(hsv_to_rgb(dec)[0, 0], [1.0, 0.0, 0.0], atol=1e-6)


def test_value_is_max_channel():
    rng = np.random.default_rng(4)
    rgb = rng.uniform(size=(32, 32, 3))
    dec = rgb_to_hsv(rgb)
    np.testing.assert_array_equal(dec.value, rgb.max(axis=2))


def test_recombine_swaps_value_plane():
    rng = np.random.default_rng(5)
    rgb = rng.uniform(0.2, 0.9, size=(16, 16, 3))
    dec = rgb_to_hsv(rgb)
    out = recombine(dec, dec.value)
    np.testing.assert_allclose(out, rgb, atol=1e-12)


def test_recombine_rejects_mismatched_plane():
    dec = rgb_to_hsv(np.zeros((4, 4, 3)))
    with pytest.raises(ValueError):
        recombine(dec, np.zeros((5, 4)))
