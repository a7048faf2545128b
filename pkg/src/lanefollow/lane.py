"""Lane geometry from Hough lines and the per-frame detection state machine."""

import enum
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .edges import canny
from .hough import NoIntersection, PolarLine, Segment, extract_peaks, hough_transform, polar_to_segment
from .imaging import ImageBuffer, gaussian_blur, hsv_threshold, rgb_to_hsv, round_half_away, to_grayscale


class DegenerateParallel(ValueError):
    """Left and right lines are parallel; no vanishing point."""


class InvalidGeometry(ValueError):
    """Lines cross inside the region of interest, or the apex is off-image."""


class Status(str, enum.Enum):
    TRACKED = "Tracked"
    COASTING = "Coasting"
    LOST = "Lost"


DEFAULT_PRE_ROI = ((0.0, 1.0), (1.0, 1.0), (0.9, 0.55), (0.1, 0.55))


@dataclass(frozen=True)
class LaneConfig:
    # colour mask combined into the grayscale frame: "off", "and" or "or"
    color_mask: str = "off"
    hsv_hue_lo: float = 0.0
    hsv_hue_hi: float = 360.0
    hsv_sat_lo: float = 0.0
    hsv_sat_hi: float = 0.25
    hsv_val_lo: float = 0.7
    hsv_val_hi: float = 1.0
    blur_sigma: float = 1.0
    blur_ksize: int = 5
    canny_low: int = 50
    canny_high: int = 150
    hough_rho_res: float = 1.0
    hough_theta_res: float = math.pi / 180
    hough_min_votes: int = 40
    hough_nms_window: int = 5
    hough_max_lines: int = 20
    min_abs_slope: float = 0.3
    # half-width in px of the edge-pixel band used to refit each side; 0 disables
    refine_band: float = 2.0
    # bottom-left, bottom-right, top-right, top-left as fractions of (w-1, h-1)
    pre_roi: tuple = DEFAULT_PRE_ROI
    roi_top_margin: float = 5.0
    lookahead_frac: float = 0.35
    smoothing_alpha: float = 0.2
    max_coast_frames: int = 5

    def __post_init__(self):
        if self.color_mask not in ("off", "and", "or"):
            raise ValueError(f"color_mask must be off/and/or, got {self.color_mask!r}")
        if not 0.0 < self.lookahead_frac < 1.0:
            raise ValueError("lookahead_frac must be in (0, 1)")
        if not 0.0 <= self.smoothing_alpha <= 1.0:
            raise ValueError("smoothing_alpha must be in [0, 1]")
        if self.refine_band < 0:
            raise ValueError("refine_band must be >= 0")
        if self.max_coast_frames < 0:
            raise ValueError("max_coast_frames must be >= 0")
        verts = tuple(tuple(float(c) for c in v) for v in self.pre_roi)
        if len(verts) != 4 or any(len(v) != 2 for v in verts):
            raise ValueError("pre_roi needs 4 (x, y) vertices")
        if any(not 0.0 <= c <= 1.0 for v in verts for c in v):
            raise ValueError("pre_roi vertices must lie in [0, 1]^2")
        object.__setattr__(self, "pre_roi", verts)


@dataclass(frozen=True)
class LaneEstimate:
    left: PolarLine = None
    right: PolarLine = None
    center: Segment = None
    vanishing_point: tuple = None
    roi: tuple = None
    steering_angle: float = 0.0
    status: Status = Status.LOST
    coast_frames: int = 0  # consecutive frames spent coasting

    @property
    def has_geometry(self):
        return self.status is not Status.LOST


LOST = LaneEstimate()


def line_slope(line):
    """dy/dx of the line in image coordinates; +-inf for vertical lines."""
    s = math.sin(line.theta)
    if s == 0.0:
        return -math.inf
    return -math.cos(line.theta) / s


def _chord_mid_x(line, width, height, y_top):
    """x of the midpoint of the line's chord through rows [y_top, height-1]."""
    seg = polar_to_segment(line, width, height)
    (x0, y0), (x1, y1) = seg.endpoints  # y0 <= y1
    if y1 < y_top:
        raise NoIntersection(f"{line} stays above row {y_top}")
    if y0 < y_top:
        x0 = x0 + (x1 - x0) * (y_top - y0) / (y1 - y0)
    return (x0 + x1) / 2


def classify_lines(lines, width, height, min_abs_slope=0.3, y_top=0.0):
    """Split lines into (left, right) by slope sign and chord side.

    The chord is the part of the line inside the image, restricted to rows
    at or below ``y_top`` (the whole image by default).
    """
    left, right = [], []
    for line in lines:
        m = line_slope(line)
        if math.isinf(m):
            (right if line.rho >= width / 2 else left).append(line)
            continue
        if abs(m) < min_abs_slope:
            continue
        try:
            mid_x = _chord_mid_x(line, width, height, y_top)
        except NoIntersection:
            continue
        if mid_x < width / 2 and m < 0:
            left.append(line)
        elif mid_x >= width / 2 and m > 0:
            right.append(line)
    return left, right


def fit_lane_line(candidates):
    if not candidates:
        return None
    total = sum(c.votes for c in candidates)
    weights = [c.votes for c in candidates] if total > 0 else [1] * len(candidates)
    wsum = sum(weights)
    rho = sum(w * c.rho for w, c in zip(weights, candidates)) / wsum
    theta = sum(w * c.theta for w, c in zip(weights, candidates)) / wsum
    return PolarLine(rho, theta, total)


def refine_lane_line(candidates, edges, band=2.0):
    """Refit one side's candidates to the edge curves that support them.

    Every 8-connected edge curve with a pixel within ``band`` of a candidate
    is pooled whole, the mean x is taken per row (a painted stripe contributes
    both of its edges to a row, so the mean sits on the stripe centre) and
    x = a + b*y is fitted by least squares. Returns None when fewer than two
    rows have support.
    """
    if not candidates:
        return None
    labels, _ = ndimage.label(edges.array, structure=np.ones((3, 3), dtype=bool))
    ys, xs = np.nonzero(labels)
    xs = xs.astype(np.float64)
    ys = ys.astype(np.float64)
    near = np.zeros(xs.shape, dtype=bool)
    for c in candidates:
        near |= np.abs(xs * math.cos(c.theta) + ys * math.sin(c.theta) - c.rho) <= band
    lab = labels[ys.astype(np.intp), xs.astype(np.intp)]
    keep = np.isin(lab, np.unique(lab[near]))
    rows, inverse = np.unique(ys[keep], return_inverse=True)
    if len(rows) < 2:
        return None
    mean_x = np.bincount(inverse, weights=xs[keep]) / np.bincount(inverse)
    slope, intercept = np.polyfit(rows, mean_x, 1)
    return PolarLine.through((intercept, 0.0), (intercept + slope, 1.0),
                             votes=sum(c.votes for c in candidates))


def vanishing_point(left, right, eps=1e-9):
    det = math.sin(right.theta - left.theta)
    if abs(det) <= eps:
        raise DegenerateParallel(f"lines {left} and {right} are parallel")
    cl, sl = math.cos(left.theta), math.sin(left.theta)
    cr, sr = math.cos(right.theta), math.sin(right.theta)
    det = cl * sr - sl * cr
    x = (left.rho * sr - sl * right.rho) / det
    y = (cl * right.rho - left.rho * cr) / det
    return (x, y)


def _row_crossings(left, right, y):
    try:
        xl, xr = left.x_at(y), right.x_at(y)
    except ZeroDivisionError as exc:
        raise InvalidGeometry("horizontal lane line") from exc
    if not xl < xr:
        raise InvalidGeometry(f"left/right lines cross at or below row {y}")
    return xl, xr


def compute_roi(left, right, vp, width, height, top_margin=5.0):
    """Trapezoid between the lane lines, from the bottom row up to just under the apex.

    Vertices: bottom-left, bottom-right, top-right, top-left.
    """
    y_bottom = height - 1
    y_top = vp[1] + top_margin
    if not vp[1] < height or not y_top < y_bottom:
        raise InvalidGeometry(f"vanishing point row {vp[1]:.2f} leaves no region above the bottom row")
    bl, br = _row_crossings(left, right, y_bottom)
    tl, tr = _row_crossings(left, right, y_top)
    return ((bl, y_bottom), (br, y_bottom), (tr, y_top), (tl, y_top))


def lookahead_row(height, lookahead_frac):
    return float(round_half_away(height * (1.0 - lookahead_frac)))


def center_line(left, right, width, height, lookahead_frac=0.35):
    y_bottom = float(height - 1)
    y_look = lookahead_row(height, lookahead_frac)
    bl, br = _row_crossings(left, right, y_bottom)
    ll, lr = _row_crossings(left, right, y_look)
    return Segment((bl + br) / 2, y_bottom, (ll + lr) / 2, y_look)


def steering_angle(center, width, height):
    """Bearing in degrees from bottom-centre to the upper end of the centre line.

    Positive means the lane centre lies to the right.
    """
    if center.y0 == center.y1:
        raise ValueError("centre line has zero row span")
    x_look, y_look = min(center.endpoints, key=lambda p: p[1])
    angle = math.degrees(math.atan2(x_look - width / 2, (height - 1) - y_look))
    return max(-90.0, min(90.0, angle))


@lru_cache(maxsize=16)
def pre_roi_mask(width, height, pre_roi):
    verts = [(fx * (width - 1), fy * (height - 1)) for fx, fy in pre_roi]
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    signs = []
    for (x0, y0), (x1, y1) in zip(verts, verts[1:] + verts[:1]):
        signs.append((x1 - x0) * (ys - y0) - (y1 - y0) * (xs - x0))
    signs = np.stack(signs)
    tol = 1e-9
    mask = np.all(signs >= -tol, axis=0) | np.all(signs <= tol, axis=0)
    mask.setflags(write=False)
    return mask


def preprocess(frame, config):
    """Grayscale frame, optionally combined with the HSV colour mask."""
    gray = to_grayscale(frame)
    if config.color_mask == "off":
        return gray
    mask = hsv_threshold(rgb_to_hsv(frame), config.hsv_hue_lo, config.hsv_hue_hi,
                         config.hsv_sat_lo, config.hsv_sat_hi, config.hsv_val_lo, config.hsv_val_hi)
    op = np.bitwise_and if config.color_mask == "and" else np.bitwise_or
    return ImageBuffer(op(gray.array, mask.array))


def edge_map(frame, config):
    gray = preprocess(frame, config)
    blurred = gaussian_blur(gray, config.blur_sigma, config.blur_ksize)
    edges = canny(blurred, config.canny_low, config.canny_high, config.blur_sigma, config.blur_ksize)
    mask = pre_roi_mask(frame.width, frame.height, config.pre_roi)
    return ImageBuffer(np.where(mask, edges.array, 0).astype(np.uint8))


def find_lines(frame, config, edges=None):
    if edges is None:
        edges = edge_map(frame, config)
    acc = hough_transform(edges, config.hough_rho_res, config.hough_theta_res)
    return extract_peaks(acc, config.hough_min_votes, config.hough_nms_window, config.hough_max_lines)


def measure_sides(frame, config):
    """Fitted (left, right) lane lines of one frame, either may be None."""
    edges = edge_map(frame, config)
    lines = find_lines(frame, config, edges)
    fitted = []
    y_top = min(fy for _, fy in config.pre_roi) * (frame.height - 1)
    for cands in classify_lines(lines, frame.width, frame.height, config.min_abs_slope, y_top):
        line = fit_lane_line(cands)
        if line is not None and config.refine_band > 0:
            line = refine_lane_line(cands, edges, config.refine_band) or line
        fitted.append(line)
    return tuple(fitted)


def _smooth(measured, previous, alpha):
    if measured is None or previous is None:
        return measured
    return PolarLine(alpha * measured.rho + (1 - alpha) * previous.rho,
                     alpha * measured.theta + (1 - alpha) * previous.theta,
                     measured.votes)


def lane_geometry(left, right, width, height, config, status, coast_frames=0):
    vp = vanishing_point(left, right)
    roi = compute_roi(left, right, vp, width, height, config.roi_top_margin)
    center = center_line(left, right, width, height, config.lookahead_frac)
    angle = steering_angle(center, width, height)
    return LaneEstimate(left, right, center, vp, roi, angle, status, coast_frames)


def detect_lane(frame, config=LaneConfig(), prev=None):
    """One perception step: frame -> lane lines, apex, ROI, centre line, steering.

    Never raises for valid frames; failures show up in ``status``.
    """
    if frame.width < 64 or frame.height < 64:
        raise ValueError("detect_lane needs frames of at least 64x64")
    w, h = frame.width, frame.height
    left, right = measure_sides(frame, config)

    live = prev is not None and prev.status is not Status.LOST
    if live:
        left = _smooth(left, prev.left, config.smoothing_alpha)
        right = _smooth(right, prev.right, config.smoothing_alpha)

    if left is not None and right is not None:
        try:
            return lane_geometry(left, right, w, h, config, Status.TRACKED)
        except (DegenerateParallel, InvalidGeometry, ValueError):
            left = right = None

    if live and prev.coast_frames < config.max_coast_frames:
        n = prev.coast_frames + 1
        attempts = [(left or prev.left, right or prev.right), (prev.left, prev.right)]
        for cl, cr in attempts:
            try:
                return lane_geometry(cl, cr, w, h, config, Status.COASTING, n)
            except (DegenerateParallel, InvalidGeometry, ValueError):
                continue
    return LOST
