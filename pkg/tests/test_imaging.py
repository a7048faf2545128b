import colorsys
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lanefollow.imaging import (
    ImageBuffer,
    gaussian_blur,
    gaussian_kernel,
    hsv_threshold,
    rgb_to_hsv,
    round_half_away,
    to_grayscale,
    to_uint8,
    value_channel,
)

from oracles import round_away

rgb_images = arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12), st.just(3)))
gray_images = arrays(np.uint8, st.tuples(st.integers(3, 14), st.integers(3, 14)))


def px(rgb):
    return ImageBuffer(np.array([[rgb]], dtype=np.uint8))


def test_round_half_away_ties():
    got = round_half_away([0.5, 1.5, 2.5, -0.5, -2.5, 2.4999, -0.49])
    assert got.tolist() == [1, 2, 3, -1, -3, 2, -0]


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_round_half_away_matches_decimal(v):
    assert round_half_away(v) == round_away(v)


def test_round_half_away_just_below_half():
    # floor(x + 0.5) gets this wrong: the sum rounds up to 1.0
    assert round_half_away(0.49999999999999994) == 0
    assert to_uint8(np.array([0.49999999999999994]))[0] == 0


@given(st.floats(-300, 600, allow_nan=False))
def test_to_uint8_clamps_and_rounds(v):
    want = min(255, max(0, round_away(v)))
    assert int(to_uint8(np.array([v]))[0]) == want


class TestImageBuffer:
    def test_shape_and_bytes(self):
        img = ImageBuffer.from_bytes(2, 3, 3, bytes(range(18)))
        assert (img.width, img.height, img.channels) == (2, 3, 3)
        assert img.tobytes() == bytes(range(18))
        # row-major, interleaved
        assert img.array[1, 0].tolist() == [6, 7, 8]

    def test_immutable(self):
        img = ImageBuffer.filled(4, 4, 7)
        with pytest.raises(ValueError):
            img.array[0, 0] = 1

    def test_rejects_bad_lengths_and_shapes(self):
        with pytest.raises(ValueError):
            ImageBuffer.from_bytes(2, 2, 1, b"\x00" * 3)
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((2, 2, 2)))
        with pytest.raises(ValueError):
            ImageBuffer(np.zeros((0, 3)))

    def test_mirror(self):
        img = ImageBuffer(np.arange(6, dtype=np.uint8).reshape(2, 3))
        assert img.mirrored().array.tolist() == [[2, 1, 0], [5, 4, 3]]
        assert img.mirrored().mirrored() == img


class TestHsv:
    @pytest.mark.parametrize("rgb, hsv", [
        ((255, 0, 0), (0.0, 1.0, 1.0)),
        ((0, 0, 0), (0.0, 0.0, 0.0)),
        ((0, 255, 0), (120.0, 1.0, 1.0)),
        ((0, 0, 255), (240.0, 1.0, 1.0)),
        ((128, 128, 128), (0.0, 0.0, 128 / 255)),
    ])
    def test_examples(self, rgb, hsv):
        out = rgb_to_hsv(px(rgb))
        got = (out.hue[0, 0], out.saturation[0, 0], out.value[0, 0])
        assert got == pytest.approx(hsv, abs=1e-12)

    @given(rgb_images)
    def test_matches_colorsys(self, arr):
        out = rgb_to_hsv(ImageBuffer(arr))
        for y, x in np.ndindex(arr.shape[:2]):
            h, s, v = colorsys.rgb_to_hsv(*(arr[y, x] / 255.0))
            assert out.value[y, x] == pytest.approx(v, abs=1e-12)
            assert out.saturation[y, x] == pytest.approx(s, abs=1e-12)
            dh = abs(out.hue[y, x] - 360.0 * h)
            assert min(dh, 360 - dh) < 1e-9

    @given(rgb_images)
    def test_value_is_max_channel(self, arr):
        out = rgb_to_hsv(ImageBuffer(arr))
        assert np.array_equal(out.value, arr.max(axis=2) / 255.0)
        assert np.all((out.hue >= 0) & (out.hue < 360))
        assert np.array_equal(value_channel(ImageBuffer(arr)).array, arr.max(axis=2))

    def test_rejects_gray(self):
        with pytest.raises(ValueError):
            rgb_to_hsv(ImageBuffer.filled(2, 2, 0))


class TestThreshold:
    def test_black_excluded_when_val_lo_positive(self):
        img = rgb_to_hsv(ImageBuffer.filled(5, 4, (0, 0, 0)))
        assert not hsv_threshold(img, 0, 360, 0, 1, 0.1, 1).array.any()

    def test_wraparound_contains_red(self):
        img = rgb_to_hsv(ImageBuffer.filled(5, 4, (255, 0, 0)))
        assert (hsv_threshold(img, 350, 10, 0, 1, 0, 1).array == 255).all()

    def test_half_red_half_green(self):
        arr = np.zeros((4, 6, 3), dtype=np.uint8)
        arr[:, :3] = (255, 0, 0)
        arr[:, 3:] = (0, 255, 0)
        mask = hsv_threshold(rgb_to_hsv(ImageBuffer(arr)), 110, 130, 0, 1, 0, 1).array
        want = np.zeros((4, 6), dtype=np.uint8)
        want[:, 3:] = 255
        assert np.array_equal(mask, want)

    @given(rgb_images, st.floats(0, 360), st.floats(0, 360))
    def test_binary_and_matches_per_pixel_oracle(self, arr, lo, hi):
        hsv = rgb_to_hsv(ImageBuffer(arr))
        mask = hsv_threshold(hsv, lo, hi, 0.1, 0.9, 0.2, 1.0).array
        assert set(np.unique(mask)) <= {0, 255}
        for y, x in np.ndindex(arr.shape[:2]):
            h, s, v = hsv.hue[y, x], hsv.saturation[y, x], hsv.value[y, x]
            in_hue = lo <= h <= hi if lo <= hi else (h >= lo or h <= hi)
            want = in_hue and 0.1 <= s <= 0.9 and 0.2 <= v <= 1.0
            assert (mask[y, x] == 255) == want

    @pytest.mark.parametrize("bad", [(-0.1, 1, 0, 1), (0, 1.5, 0, 1), (0, 1, -1, 1), (0, 1, 0, 2)])
    def test_rejects_out_of_range(self, bad):
        img = rgb_to_hsv(ImageBuffer.filled(2, 2, (1, 2, 3)))
        with pytest.raises(ValueError):
            hsv_threshold(img, 0, 360, *bad)


class TestGrayscale:
    @pytest.mark.parametrize("rgb, want", [((255, 255, 255), 255), ((255, 0, 0), 76), ((0, 0, 255), 29), ((0, 255, 0), 150)])
    def test_examples(self, rgb, want):
        assert to_grayscale(px(rgb)).array[0, 0] == want

    def test_exhaustive_against_decimal_luma(self):
        # every (r, g, b): exact decimal luma rounded half up
        from decimal import ROUND_HALF_UP, Decimal

        r, g, b = np.meshgrid(np.arange(256), np.arange(256), np.arange(0, 256, 15), indexing="ij")
        arr = np.stack([r, g, b], axis=-1).reshape(256, -1, 3).astype(np.uint8)
        got = to_grayscale(ImageBuffer(arr)).array
        rng = np.random.default_rng(0)
        for _ in range(2000):
            y, x = rng.integers(0, arr.shape[0]), rng.integers(0, arr.shape[1])
            R, G, B = (int(c) for c in arr[y, x])
            exact = Decimal("0.299") * R + Decimal("0.587") * G + Decimal("0.114") * B
            assert got[y, x] == int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))

    def test_tie_rounds_up(self):
        # exact x.5 lumas exist (299R + 587G + 114B = 500 mod 1000); they must round up
        for g in range(256):
            for b in range(256):
                if (587 * g + 114 * b) % 1000 == 500:
                    want = (587 * g + 114 * b + 500) // 1000
                    assert to_grayscale(px((0, g, b))).array[0, 0] == want
                    return
        pytest.fail("no tie found")

    def test_rejects_gray(self):
        with pytest.raises(ValueError):
            to_grayscale(ImageBuffer.filled(2, 2, 9))


def naive_blur(arr, sigma, ksize):
    """Direct 2-D weighted sum with clamped indices."""
    half = ksize // 2
    w = [math.exp(-(k * k) / (2 * sigma * sigma)) for k in range(-half, half + 1)]
    tot = sum(w)
    w = [v / tot for v in w]
    h, wd = arr.shape
    out = np.zeros((h, wd))
    for y in range(h):
        for x in range(wd):
            acc = 0.0
            for j in range(ksize):
                for i in range(ksize):
                    yy = min(max(y + j - half, 0), h - 1)
                    xx = min(max(x + i - half, 0), wd - 1)
                    acc += w[j] * w[i] * float(arr[yy, xx])
            out[y, x] = acc
    return out


class TestGaussian:
    def test_kernel(self):
        k = gaussian_kernel(1.0, 5)
        raw = np.exp(-np.array([4, 1, 0, 1, 4]) / 2.0)
        assert k == pytest.approx(raw / raw.sum(), abs=1e-15)
        assert k.sum() == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("sigma, ksize", [(1.0, 4), (1.0, 1), (0.0, 5), (-1.0, 5)])
    def test_rejects(self, sigma, ksize):
        with pytest.raises(ValueError):
            gaussian_blur(ImageBuffer.filled(8, 8, 0), sigma, ksize)

    def test_constant_identity(self):
        img = ImageBuffer.filled(9, 7, 200)
        assert gaussian_blur(img) == img

    def test_impulse_center(self):
        arr = np.zeros((9, 9), dtype=np.uint8)
        arr[4, 4] = 255
        raw = [math.exp(-(k * k) / 2.0) for k in range(-2, 3)]
        wc = raw[2] / sum(raw)
        want = math.floor(255 * wc * wc + 0.5)
        assert want == 41
        assert gaussian_blur(ImageBuffer(arr)).array[4, 4] == want

    @given(gray_images)
    def test_mirror_equivariance(self, arr):
        img = ImageBuffer(arr)
        assert gaussian_blur(img.mirrored()) == gaussian_blur(img).mirrored()

    @given(gray_images, st.sampled_from([(1.0, 5), (0.7, 3), (2.0, 7)]))
    def test_matches_naive_2d(self, arr, params):
        sigma, ksize = params
        got = gaussian_blur(ImageBuffer(arr), sigma, ksize).array.astype(int)
        exact = naive_blur(arr, sigma, ksize)
        want = np.floor(exact + 0.5).astype(int)
        near_tie = np.abs(exact - np.floor(exact) - 0.5) < 1e-9
        assert np.all((got == want) | near_tie)

    @given(st.integers(0, 255), st.integers(2, 10), st.integers(2, 10))
    def test_preserves_sum_of_interior_impulse(self, value, y, x):
        arr = np.zeros((13, 13), dtype=np.uint8)
        arr[y, x] = value
        out = gaussian_blur(ImageBuffer(arr)).array
        assert abs(int(out.sum()) - value) <= 5 * 5 * 0.5

    def test_deterministic(self):
        rng = np.random.default_rng(1)
        img = ImageBuffer(rng.integers(0, 256, (30, 40), dtype=np.uint8))
        assert gaussian_blur(img).tobytes() == gaussian_blur(img).tobytes()
