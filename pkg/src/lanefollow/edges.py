"""Sobel gradients and the Canny chain."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .imaging import ImageBuffer, gaussian_blur, to_uint8

DIRECTION_BINS = (0, 45, 90, 135)

# neighbour offset (dx, dy) along the gradient for each direction bin
_BIN_STEP = {0: (1, 0), 45: (1, 1), 90: (0, 1), 135: (-1, 1)}

@dataclass(frozen=True, eq=False)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray
    direction_bin: np.ndarray  # degrees, one of DIRECTION_BINS

    @property
    def width(self):
        return self.gx.shape[1]

    @property
    def height(self):
        return self.gx.shape[0]

    @classmethod
    def from_gradients(cls, gx, gy):
        gx = np.asarray(gx, dtype=np.float64)
        gy = np.asarray(gy, dtype=np.float64)
        return cls(gx, gy, np.hypot(gx, gy), quantize_direction(gx, gy))


_TAN_22_5 = math.tan(math.radians(22.5))
_TAN_67_5 = math.tan(math.radians(67.5))


def quantize_direction(gx, gy):
    """Snap atan2(gy, gx) mod 180 to the nearest 45-degree bin.

    Done with tangent comparisons on |gx|, |gy| and the sign of gx*gy, which
    is the same as folding the angle into [0, 180) and rounding.
    """
    gx = np.asarray(gx, dtype=np.float64)
    gy = np.asarray(gy, dtype=np.float64)
    ax, ay = np.abs(gx), np.abs(gy)
    same_sign = ((gx > 0) & (gy > 0)) | ((gx < 0) & (gy < 0))
    bins = np.where(same_sign, 45, 135).astype(np.int16)
    bins[ay >= _TAN_67_5 * ax] = 90
    bins[(ay < _TAN_22_5 * ax) | ((ax == 0) & (ay == 0))] = 0
    return bins


def sobel(image):
    if image.channels != 1:
        raise ValueError("sobel needs a 1-channel image")
    if image.width < 3 or image.height < 3:
        raise ValueError(f"sobel needs at least 3x3, got {image.width}x{image.height}")
    p = np.pad(image.array.astype(np.int32), 1, mode="edge")
    col = p[:-2] + 2 * p[1:-1] + p[2:]  # [1, 2, 1] down each column
    row = p[:, :-2] + 2 * p[:, 1:-1] + p[:, 2:]
    gx = col[:, 2:] - col[:, :-2]
    gy = row[2:] - row[:-2]
    return GradientField.from_gradients(gx, gy)


def non_max_suppression(field):
    """Thin the magnitude to ridge pixels along the gradient direction.

    A pixel survives when it is >= the neighbour ahead along its direction bin
    and strictly > the neighbour behind, so two-pixel plateaus (e.g. a blurred
    step) thin to a single pixel. Border pixels are always 0.
    """
    mag = field.magnitude
    h, w = mag.shape
    p = np.pad(mag, 1)
    keep = np.zeros(mag.shape, dtype=bool)
    for b, (dx, dy) in _BIN_STEP.items():
        ahead = p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        behind = p[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        keep |= (field.direction_bin == b) & (mag >= ahead) & (mag > behind)
    keep[0, :] = keep[-1, :] = False
    keep[:, 0] = keep[:, -1] = False
    out = np.where(keep, np.minimum(255.0, mag), 0.0)
    return ImageBuffer(to_uint8(out))


_EIGHT = np.ones((3, 3), dtype=bool)


def hysteresis_threshold(nms, low=50, high=150):
    if low > high:
        raise ValueError(f"low threshold {low} exceeds high threshold {high}")
    arr = nms.array
    candidate = arr >= low
    strong = arr >= high
    labels, count = ndimage.label(candidate, structure=_EIGHT)
    if count == 0:
        return ImageBuffer(np.zeros(arr.shape, dtype=np.uint8))
    seeded = np.zeros(count + 1, dtype=bool)
    seeded[labels[strong]] = True
    seeded[0] = False
    return ImageBuffer(np.where(seeded[labels], 255, 0).astype(np.uint8))


def canny(image, low=50, high=150, sigma=1.0, ksize=5):
    blurred = gaussian_blur(image, sigma, ksize)
    return hysteresis_threshold(non_max_suppression(sobel(blurred)), low, high)


def is_binary(image):
    arr = image.array
    return bool(np.all((arr == 0) | (arr == 255)))
