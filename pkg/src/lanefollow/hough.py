"""Dense (rho, theta) Hough transform, peak picking and line clipping."""

import math
from dataclasses import dataclass

import numpy as np

from .edges import is_binary
from .imaging import round_half_away


class NoIntersection(ValueError):
    """The line does not cross the image rectangle."""


@dataclass(frozen=True)
class PolarLine:
    """Line x*cos(theta) + y*sin(theta) = rho, theta in [0, pi)."""

    rho: float
    theta: float
    votes: int = 0

    def x_at(self, y):
        """x where the line crosses row y (the line must not be horizontal)."""
        c = math.cos(self.theta)
        if c == 0.0:
            raise ZeroDivisionError("horizontal line has no unique x for a row")
        return (self.rho - y * math.sin(self.theta)) / c

    def distance(self, x, y):
        return x * math.cos(self.theta) + y * math.sin(self.theta) - self.rho

    @classmethod
    def through(cls, p0, p1, votes=0):
        """Line through two distinct points, normalised to theta in [0, pi)."""
        (x0, y0), (x1, y1) = p0, p1
        dx, dy = x1 - x0, y1 - y0
        norm = math.hypot(dx, dy)
        if norm == 0:
            raise ValueError("points coincide")
        nx, ny = -dy / norm, dx / norm
        theta = math.atan2(ny, nx)
        if theta < 0:
            theta += math.pi
            nx, ny = -nx, -ny
        if theta >= math.pi:
            theta -= math.pi
            nx, ny = -nx, -ny
        return cls(x0 * nx + y0 * ny, theta, votes)


@dataclass(frozen=True)
class Segment:
    x0: float
    y0: float
    x1: float
    y1: float

    @property
    def endpoints(self):
        return (self.x0, self.y0), (self.x1, self.y1)

    def translated(self, dx, dy=0.0):
        return Segment(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)


@dataclass(frozen=True, eq=False)
class HoughAccumulator:
    votes: np.ndarray  # shape (rho_bins, theta_bins)
    rho_res: float
    theta_res: float
    rho_max: float

    @property
    def rho_bins(self):
        return self.votes.shape[0]

    @property
    def theta_bins(self):
        return self.votes.shape[1]

    @property
    def rho_offset(self):
        """Index of the rho = 0 bin."""
        return self.rho_bins // 2

    def rho_of(self, rho_idx):
        return (rho_idx - self.rho_offset) * self.rho_res

    def theta_of(self, theta_idx):
        return theta_idx * self.theta_res


def theta_bin_count(theta_res):
    n = int(round(math.pi / theta_res))
    if n < 2:
        raise ValueError(f"theta_res={theta_res} gives fewer than 2 bins over [0, pi)")
    return n


def rho_bin_count(rho_max, rho_res):
    return 2 * math.ceil(rho_max / rho_res) + 1


def hough_transform(edges, rho_res=1.0, theta_res=math.pi / 180):
    if rho_res <= 0:
        raise ValueError("rho_res must be positive")
    if edges.channels != 1 or not is_binary(edges):
        raise ValueError("hough_transform needs a binary (0/255) edge map")
    n_theta = theta_bin_count(theta_res)
    rho_max = math.hypot(edges.width - 1, edges.height - 1)
    n_rho = rho_bin_count(rho_max, rho_res)
    offset = n_rho // 2

    # scalar libm trig so the tables do not depend on numpy's vector kernels
    cos_t = np.array([math.cos(j * theta_res) for j in range(n_theta)])
    sin_t = np.array([math.sin(j * theta_res) for j in range(n_theta)])
    ys, xs = np.nonzero(edges.array)
    votes = np.zeros((n_rho, n_theta), dtype=np.int64)
    if len(xs):
        rho = xs[:, None].astype(np.float64) * cos_t + ys[:, None].astype(np.float64) * sin_t
        rho_idx = round_half_away(rho / rho_res).astype(np.int64) + offset
        flat = rho_idx * n_theta + np.arange(n_theta)
        votes = np.bincount(flat.ravel(), minlength=n_rho * n_theta).reshape(n_rho, n_theta)
    return HoughAccumulator(votes=votes, rho_res=rho_res, theta_res=theta_res, rho_max=rho_max)


def extract_peaks(acc, min_votes=40, nms_window=5, max_lines=20):
    """Local maxima of the accumulator as PolarLines, strongest first.

    Equal-vote neighbours are resolved in favour of the smaller
    (rho_idx, theta_idx) so plateaus yield exactly one peak.
    """
    if nms_window < 1 or nms_window % 2 == 0:
        raise ValueError("nms_window must be odd and >= 1")
    votes = acc.votes
    half = nms_window // 2
    n_rho, n_theta = votes.shape
    peaks = []
    for r, t in np.argwhere(votes >= max(min_votes, 1)):
        v = votes[r, t]
        r0, r1 = max(0, r - half), min(n_rho, r + half + 1)
        t0, t1 = max(0, t - half), min(n_theta, t + half + 1)
        win = votes[r0:r1, t0:t1]
        if (win > v).any():
            continue
        ties = np.argwhere(win == v) + (r0, t0)
        # any tied neighbour with a smaller (rho_idx, theta_idx) wins
        if any((tr, tt) < (r, t) for tr, tt in ties):
            continue
        peaks.append((int(v), int(r), int(t)))
    peaks.sort(key=lambda p: (-p[0], p[1], p[2]))
    return [PolarLine(acc.rho_of(r), acc.theta_of(t), v) for v, r, t in peaks[:max_lines]]


def polar_to_segment(line, width, height):
    """Clip the infinite line to the pixel rectangle [0, w-1] x [0, h-1]."""
    c, s = math.cos(line.theta), math.sin(line.theta)
    # cos(pi/2) is 6e-17, not 0; snap so axis-aligned chords come out exact
    c = 0.0 if abs(c) < 1e-12 else c
    s = 0.0 if abs(s) < 1e-12 else s
    xmax, ymax = width - 1, height - 1
    eps = 1e-9 * max(1.0, xmax, ymax)
    pts = []
    if s != 0.0:
        for x in (0.0, float(xmax)):
            y = (line.rho - x * c) / s
            if -eps <= y <= ymax + eps:
                pts.append((x, min(max(y, 0.0), ymax)))
    if c != 0.0:
        for y in (0.0, float(ymax)):
            x = (line.rho - y * s) / c
            if -eps <= x <= xmax + eps:
                pts.append((min(max(x, 0.0), xmax), y))
    if not pts:
        raise NoIntersection(f"{line} misses the {width}x{height} image")
    best = (pts[0], pts[0])
    best_d = -1.0
    for i, p in enumerate(pts):
        for q in pts[i:]:
            d = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
            if d > best_d:
                best, best_d = (p, q), d
    p, q = sorted(best, key=lambda pt: (pt[1], pt[0]))
    return Segment(p[0], p[1], q[0], q[1])
