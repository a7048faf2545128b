"""Draw lane estimates onto frames with integer line rasterization."""

import numpy as np

from .imaging import ImageBuffer, round_half_away
from .lane import Status

RED = (255, 0, 0)
GREEN = (0, 255, 0)
BLUE = (0, 0, 255)
YELLOW = (255, 255, 0)

CROSS_ARM = 4


def bresenham(x0, y0, x1, y1):
    """Integer pixels of the segment between two integer endpoints."""
    x0, y0, x1, y1 = int(x0), int(y0), int(x1), int(y1)
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    xs, ys = [], []
    while True:
        xs.append(x0)
        ys.append(y0)
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    return np.array(xs), np.array(ys)


def clip_segment(p0, p1, width, height):
    """Liang-Barsky clip to [0, w-1] x [0, h-1]; None when nothing is left."""
    (x0, y0), (x1, y1) = p0, p1
    dx, dy = x1 - x0, y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in ((-dx, x0), (dx, width - 1 - x0), (-dy, y0), (dy, height - 1 - y0)):
        if p == 0:
            if q < 0:
                return None
            continue
        t = q / p
        if p < 0:
            t0 = max(t0, t)
        else:
            t1 = min(t1, t)
        if t0 > t1:
            return None
    return (x0 + t0 * dx, y0 + t0 * dy), (x0 + t1 * dx, y0 + t1 * dy)


def draw_segment(canvas, p0, p1, color):
    """Rasterize in place; endpoints may lie outside the canvas."""
    h, w = canvas.shape[:2]
    clipped = clip_segment(p0, p1, w, h)
    if clipped is None:
        return
    (x0, y0), (x1, y1) = clipped
    ends = round_half_away([x0, y0, x1, y1]).astype(int)
    xs, ys = bresenham(*ends)
    ok = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    canvas[ys[ok], xs[ok]] = color


def draw_polygon(canvas, verts, color):
    for a, b in zip(verts, verts[1:] + verts[:1]):
        draw_segment(canvas, a, b, color)


def draw_cross(canvas, center, color, arm=CROSS_ARM):
    x, y = center
    draw_segment(canvas, (x - arm, y), (x + arm, y), color)
    draw_segment(canvas, (x, y - arm), (x, y + arm), color)


def annotate(frame, est):
    """ROI outline (blue), lane lines (red), centre line (green), apex cross (yellow)."""
    if est.status is Status.LOST:
        return frame
    if frame.channels != 3:
        raise ValueError("annotate needs a 3-channel frame")
    canvas = frame.array.copy()
    h = frame.height
    roi = [tuple(map(float, v)) for v in est.roi]
    draw_polygon(canvas, roi, BLUE)
    vp = tuple(map(float, est.vanishing_point))
    for line in (est.left, est.right):
        draw_segment(canvas, (line.x_at(h - 1), h - 1), vp, RED)
    c0, c1 = est.center.endpoints
    draw_segment(canvas, c0, c1, GREEN)
    draw_cross(canvas, vp, YELLOW)
    return ImageBuffer(canvas)
