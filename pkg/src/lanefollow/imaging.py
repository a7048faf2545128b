"""Pixel raster type, colour-space conversion and Gaussian smoothing.

Coordinates everywhere in the package: origin at the top-left pixel, x to the
right, y downwards. Arrays are indexed ``[y, x]`` or ``[y, x, channel]``.
"""

from dataclasses import dataclass

import numpy as np


def round_half_away(values):
    """Round to the nearest integer, ties away from zero (elementwise)."""
    values = np.asarray(values, dtype=np.float64)
    mag = np.abs(values)
    whole = np.floor(mag)
    return np.copysign(whole + (mag - whole >= 0.5), values)


def to_uint8(values):
    # clamping first is equivalent (integer bounds) and leaves only x >= 0,
    # where round-half-away is floor(x) + (frac >= 0.5) with an exact frac
    x = np.clip(np.asarray(values, dtype=np.float64), 0.0, 255.0)
    whole = np.floor(x)
    x -= whole
    return (whole + (x >= 0.5)).astype(np.uint8)


class ImageBuffer:
    """Immutable 8-bit raster with 1 or 3 interleaved channels."""

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.uint8, copy=True)
        if arr.ndim == 3 and arr.shape[2] == 1:
            arr = arr[:, :, 0]
        if arr.ndim == 2:
            pass
        elif arr.ndim == 3 and arr.shape[2] == 3:
            pass
        else:
            raise ValueError(f"unsupported raster shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        arr.setflags(write=False)
        self._data = arr

    @classmethod
    def from_bytes(cls, width, height, channels, raw):
        if channels not in (1, 3):
            raise ValueError("channels must be 1 or 3")
        expected = width * height * channels
        if len(raw) != expected:
            raise ValueError(f"expected {expected} samples, got {len(raw)}")
        arr = np.frombuffer(bytes(raw), dtype=np.uint8)
        shape = (height, width) if channels == 1 else (height, width, 3)
        return cls(arr.reshape(shape))

    @classmethod
    def filled(cls, width, height, value):
        if np.ndim(value) == 0:
            return cls(np.full((height, width), value, dtype=np.uint8))
        return cls(np.broadcast_to(np.asarray(value, dtype=np.uint8), (height, width, 3)))

    @property
    def array(self):
        """Read-only view of the samples."""
        return self._data

    @property
    def width(self):
        return self._data.shape[1]

    @property
    def height(self):
        return self._data.shape[0]

    @property
    def channels(self):
        return 1 if self._data.ndim == 2 else 3

    def tobytes(self):
        return self._data.tobytes()

    def mirrored(self):
        """Horizontal mirror, x -> width - 1 - x."""
        return ImageBuffer(self._data[:, ::-1])

    def __eq__(self, other):
        if not isinstance(other, ImageBuffer):
            return NotImplemented
        return self._data.shape == other._data.shape and np.array_equal(self._data, other._data)

    def __hash__(self):
        return hash((self._data.shape, self._data.tobytes()))

    def __repr__(self):
        return f"ImageBuffer({self.width}x{self.height}x{self.channels})"


@dataclass(frozen=True, eq=False)
class HsvImage:
    """Per-pixel hue in degrees [0, 360), saturation and value in [0, 1]."""

    hue: np.ndarray
    saturation: np.ndarray
    value: np.ndarray

    @property
    def width(self):
        return self.hue.shape[1]

    @property
    def height(self):
        return self.hue.shape[0]


def _require_channels(image, channels, op):
    if image.channels != channels:
        raise ValueError(f"{op} needs a {channels}-channel image, got {image.channels}")


def rgb_to_hsv(image):
    """Hexcone RGB -> HSV. Achromatic pixels get hue 0."""
    _require_channels(image, 3, "rgb_to_hsv")
    rgb = image.array.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    cmax = rgb.max(axis=2)
    cmin = rgb.min(axis=2)
    delta = cmax - cmin
    chroma = delta > 0
    safe = np.where(chroma, delta, 1.0)

    hue = np.zeros_like(cmax)
    is_r = chroma & (cmax == r)
    is_g = chroma & ~is_r & (cmax == g)
    is_b = chroma & ~is_r & ~is_g
    hue[is_r] = np.mod((g - b)[is_r] / safe[is_r], 6.0)
    hue[is_g] = (b - r)[is_g] / safe[is_g] + 2.0
    hue[is_b] = (r - g)[is_b] / safe[is_b] + 4.0
    hue *= 60.0
    hue[hue >= 360.0] -= 360.0

    sat = np.where(cmax > 0, delta / np.where(cmax > 0, cmax, 1.0), 0.0)
    for arr in (hue, sat, cmax):
        arr.setflags(write=False)
    return HsvImage(hue=hue, saturation=sat, value=cmax)


def hsv_threshold(image, hue_lo, hue_hi, sat_lo, sat_hi, val_lo, val_hi):
    """Binary mask (0/255) of pixels inside all three ranges.

    ``hue_lo > hue_hi`` selects the wrapped interval through 0 degrees.
    """
    for name, v in (("sat_lo", sat_lo), ("sat_hi", sat_hi), ("val_lo", val_lo), ("val_hi", val_hi)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name}={v} outside [0, 1]")
    if sat_lo > sat_hi or val_lo > val_hi:
        raise ValueError("empty saturation/value range")
    h, s, v = image.hue, image.saturation, image.value
    if hue_lo <= hue_hi:
        hue_ok = (h >= hue_lo) & (h <= hue_hi)
    else:
        hue_ok = (h >= hue_lo) | (h <= hue_hi)
    ok = hue_ok & (s >= sat_lo) & (s <= sat_hi) & (v >= val_lo) & (v <= val_hi)
    return ImageBuffer(np.where(ok, 255, 0).astype(np.uint8))


LUMA_WEIGHTS = (0.299, 0.587, 0.114)
# the same weights in thousandths, so the luma sum is exact in integers
_LUMA_MILLI = (299, 587, 114)


def to_grayscale(image):
    """BT.601 luma, rounded half away from zero (half up, as it is never negative)."""
    _require_channels(image, 3, "to_grayscale")
    rgb = image.array.astype(np.int32)
    wr, wg, wb = _LUMA_MILLI
    milli = wr * rgb[..., 0] + wg * rgb[..., 1] + wb * rgb[..., 2]
    return ImageBuffer(((milli + 500) // 1000).astype(np.uint8))


def gaussian_kernel(sigma, ksize):
    """Sampled 1-D Gaussian at integer offsets, normalised to sum 1."""
    if ksize < 3 or ksize % 2 == 0:
        raise ValueError(f"ksize must be odd and >= 3, got {ksize}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    half = ksize // 2
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def _correlate(padded, taps, axis, n):
    """Sum of taps[i] * padded shifted by i along ``axis`` (window length n)."""
    def window(i):
        return padded[i:i + n] if axis == 0 else padded[:, i:i + n]

    half = len(taps) // 2
    out = taps[half] * window(half)
    symmetric = np.allclose(taps, taps[::-1], rtol=0, atol=0)
    for i in range(half):
        if symmetric:
            out += taps[i] * (window(i) + window(len(taps) - 1 - i))
        else:
            out += taps[i] * window(i) + taps[len(taps) - 1 - i] * window(len(taps) - 1 - i)
    return out


def correlate_rows(arr, taps):
    """Correlate along x with clamp-to-edge borders; ``taps`` has odd length."""
    half = len(taps) // 2
    return _correlate(np.pad(arr, ((0, 0), (half, half)), mode="edge"), taps, 1, arr.shape[1])


def correlate_cols(arr, taps):
    half = len(taps) // 2
    return _correlate(np.pad(arr, ((half, half), (0, 0)), mode="edge"), taps, 0, arr.shape[0])


def gaussian_blur(image, sigma=1.0, ksize=5):
    _require_channels(image, 1, "gaussian_blur")
    kernel = gaussian_kernel(sigma, ksize)
    smoothed = correlate_cols(correlate_rows(image.array.astype(np.float64), kernel), kernel)
    return ImageBuffer(to_uint8(smoothed))


def value_channel(image):
    """HSV value as an 8-bit image (equals max(R, G, B))."""
    return ImageBuffer(to_uint8(rgb_to_hsv(image).value * 255.0))
