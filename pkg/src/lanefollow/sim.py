"""Synthetic road camera, differential-drive kinematics and the closed loop."""

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .control import STOP, Actuator, ControlConfig, angle_to_command
from .hough import PolarLine
from .imaging import ImageBuffer
from .lane import LaneConfig, Status, detect_lane


def normalize_angle(a):
    """Wrap to (-pi, pi]."""
    a = math.remainder(a, 2.0 * math.pi)
    return math.pi if a <= -math.pi else a


@dataclass(frozen=True)
class VehicleState:
    x: float = 0.0
    y: float = 0.0
    heading: float = 0.0

    def mirrored(self):
        """Reflect across the world x axis."""
        return VehicleState(self.x, -self.y, normalize_angle(-self.heading))


@dataclass(frozen=True)
class RoadSpec:
    """Either a polyline centreline (``waypoints``) or a circular arc.

    The arc starts at the origin heading along +x; ``curvature`` > 0 turns
    left. Markings sit at +-lane_width/2 from the centreline.
    """

    waypoints: tuple = None
    curvature: float = 0.0
    lane_width: float = 0.5
    marking_width: float = 0.03
    marking_color: tuple = (255, 255, 255)
    road_color: tuple = (60, 60, 60)
    background_color: tuple = (150, 190, 230)

    def __post_init__(self):
        if self.lane_width <= 0 or self.marking_width <= 0:
            raise ValueError("lane_width and marking_width must be positive")
        if self.waypoints is None:
            if self.curvature == 0.0:
                raise ValueError("arc roads need non-zero curvature")
            return
        pts = tuple((float(x), float(y)) for x, y in self.waypoints)
        if len(pts) < 2:
            raise ValueError("polyline centreline needs at least 2 waypoints")
        if any(a == b for a, b in zip(pts, pts[1:])):
            raise ValueError("consecutive waypoints must differ")
        object.__setattr__(self, "waypoints", pts)

    @classmethod
    def straight(cls, length=200.0, **kw):
        return cls(waypoints=((-10.0, 0.0), (length, 0.0)), **kw)

    @classmethod
    def arc(cls, radius, left=True, **kw):
        return cls(waypoints=None, curvature=(1.0 if left else -1.0) / radius, **kw)

    @property
    def is_arc(self):
        return self.waypoints is None

    def mirrored(self):
        """Reflect across the world x axis."""
        if self.is_arc:
            return replace_road(self, curvature=-self.curvature)
        return replace_road(self, waypoints=tuple((x, -y) for x, y in self.waypoints))


def replace_road(road, **changes):
    from dataclasses import replace

    return replace(road, **changes)


@dataclass(frozen=True)
class CameraSpec:
    width: int = 640
    height: int = 480
    focal: float = 500.0
    cam_height: float = 0.40
    pitch: float = 0.15  # radians, downward positive

    def __post_init__(self):
        if not 0.0 < self.pitch < math.pi / 2:
            raise ValueError("pitch must be in (0, pi/2)")
        if self.width < 1 or self.height < 1 or self.focal <= 0 or self.cam_height <= 0:
            raise ValueError("camera dimensions must be positive")

    @property
    def cx(self):
        return (self.width - 1) / 2.0

    @property
    def cy(self):
        return (self.height - 1) / 2.0


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.05
    wheel_base: float = 0.15
    max_wheel_speed: float = 0.5
    steps: int = 500
    departure_abort: bool = False

    def __post_init__(self):
        if self.dt <= 0 or self.wheel_base <= 0 or self.max_wheel_speed <= 0 or self.steps < 0:
            raise ValueError("dt, wheel_base and max_wheel_speed must be positive, steps >= 0")


def lateral_offset(road, xs, ys):
    """Signed distance from points to the centreline, positive to the right."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if road.is_arc:
        k = road.curvature
        cy = 1.0 / k
        return math.copysign(1.0, k) * (np.hypot(xs, ys - cy) - abs(cy))

    pts = road.waypoints
    best_d2 = np.full(xs.shape, np.inf)
    best_sign = np.zeros(xs.shape)
    last = len(pts) - 2
    for i, ((ax, ay), (bx, by)) in enumerate(zip(pts, pts[1:])):
        dx, dy = bx - ax, by - ay
        seg2 = dx * dx + dy * dy
        t = ((xs - ax) * dx + (ys - ay) * dy) / seg2
        # end segments extend to infinity so the road has no end caps
        lo = -np.inf if i == 0 else 0.0
        hi = np.inf if i == last else 1.0
        t = np.clip(t, lo, hi)
        px, py = xs - (ax + t * dx), ys - (ay + t * dy)
        d2 = px * px + py * py
        cross = dx * (ys - ay) - dy * (xs - ax)
        closer = d2 < best_d2
        best_d2 = np.where(closer, d2, best_d2)
        best_sign = np.where(closer, -np.sign(cross), best_sign)
    return best_sign * np.sqrt(best_d2)


def cross_track_error(state, road):
    return float(lateral_offset(road, state.x, state.y))


@lru_cache(maxsize=8)
def _ground_rays(cam):
    """Vehicle-frame ground hits (forward, right) per pixel, and a hit mask."""
    us = np.arange(cam.width, dtype=np.float64) - cam.cx
    vs = np.arange(cam.height, dtype=np.float64) - cam.cy
    sp, cp = math.sin(cam.pitch), math.cos(cam.pitch)
    fwd_dir = cam.focal * cp - vs * sp
    down_dir = cam.focal * sp + vs * cp  # negated z component of the ray
    hit = down_dir > 1e-9
    scale = np.where(hit, cam.cam_height / np.where(hit, down_dir, 1.0), 0.0)
    fwd = np.broadcast_to((scale * fwd_dir)[:, None], (cam.height, cam.width))
    right = scale[:, None] * us[None, :]
    hit2d = np.broadcast_to(hit[:, None], (cam.height, cam.width))
    return fwd, right, hit2d


def render_frame(road, state, cam=CameraSpec(), noise=0, seed=0):
    """Pinhole view of the flat road from the vehicle's camera."""
    fwd, right, hit = _ground_rays(cam)
    img = np.empty((cam.height, cam.width, 3), dtype=np.uint8)
    img[...] = road.background_color
    rows = np.flatnonzero(hit[:, 0])
    if len(rows):
        # ground rays form a contiguous band of rows below the horizon
        band = slice(rows[0], rows[-1] + 1)
        ch, sh = math.cos(state.heading), math.sin(state.heading)
        f, r = fwd[band], right[band]
        wx = state.x + f * ch + r * sh
        wy = state.y + f * sh - r * ch
        d = np.abs(lateral_offset(road, wx, wy))
        marking = np.abs(d - road.lane_width / 2) <= road.marking_width / 2
        ground = img[band]
        ground[...] = road.road_color
        ground[marking] = road.marking_color
    if noise:
        rng = np.random.default_rng(seed)
        jitter = rng.integers(-noise, noise + 1, size=img.shape)
        img = np.clip(img.astype(np.int64) + jitter, 0, 255).astype(np.uint8)
    return ImageBuffer(img)


def project_ground(state, cam, wx, wy):
    """Image (u, v) of world ground points; the inverse of the renderer's rays."""
    rx, ry = wx - state.x, wy - state.y
    ch, sh = math.cos(state.heading), math.sin(state.heading)
    fwd = rx * ch + ry * sh
    right = rx * sh - ry * ch
    sp, cp = math.sin(cam.pitch), math.cos(cam.pitch)
    depth = fwd * cp + cam.cam_height * sp
    down = cam.cam_height * cp - fwd * sp
    if depth <= 0:
        raise ValueError("point is behind the camera")
    return cam.cx + cam.focal * right / depth, cam.cy + cam.focal * down / depth


def marking_lines(road, state, cam, near=1.0, far=4.0):
    """Image lines of the two marking centrelines of a straight road segment.

    Returns (left, right) PolarLines built by projecting two marking points
    each, ``near`` and ``far`` metres ahead of the vehicle along the road.
    """
    if road.is_arc:
        raise ValueError("marking_lines needs a straight road")
    (ax, ay), (bx, by) = road.waypoints[0], road.waypoints[-1]
    length = math.hypot(bx - ax, by - ay)
    tx, ty = (bx - ax) / length, (by - ay) / length
    s0 = (state.x - ax) * tx + (state.y - ay) * ty
    nx, ny = -ty, tx  # left normal
    lines = []
    for side in (1.0, -1.0):
        off = side * road.lane_width / 2
        pts = []
        for dist in (near, far):
            s = s0 + dist
            pts.append(project_ground(state, cam, ax + s * tx + off * nx, ay + s * ty + off * ny))
        lines.append(PolarLine.through(*pts))
    return tuple(lines)


def step_vehicle(state, cmd, params):
    v_left = cmd.left_duty * params.max_wheel_speed
    v_right = cmd.right_duty * params.max_wheel_speed
    v = (v_left + v_right) / 2.0
    omega = (v_right - v_left) / params.wheel_base
    h, dt = state.heading, params.dt
    if abs(omega) < 1e-9:
        x = state.x + v * dt * math.cos(h)
        y = state.y + v * dt * math.sin(h)
        h_new = h
    else:
        h_new = h + omega * dt
        r = v / omega
        x = state.x + r * (math.sin(h_new) - math.sin(h))
        y = state.y - r * (math.cos(h_new) - math.cos(h))
    return VehicleState(x, y, normalize_angle(h_new))


class SimActuator(Actuator):
    """Integrates the simulated vehicle one time step per applied command."""

    def __init__(self, state, params):
        self.state = state
        self.params = params

    def apply(self, command):
        self.state = step_vehicle(self.state, command, self.params)


@dataclass(frozen=True)
class StepRecord:
    index: int
    state: VehicleState
    estimate: object
    command: object
    cte: float


@dataclass
class RunReport:
    initial: VehicleState
    lane_width: float
    steps: list = field(default_factory=list)

    @property
    def final_state(self):
        return self.steps[-1].state if self.steps else self.initial

    @property
    def abs_cte(self):
        return np.array([abs(s.cte) for s in self.steps])

    def summary(self):
        errs = self.abs_cte
        return {
            "steps": len(self.steps),
            "max_abs_cte": float(errs.max()) if len(errs) else 0.0,
            "mean_abs_cte": float(errs.mean()) if len(errs) else 0.0,
            "departures": int((errs > self.lane_width / 2).sum()),
            "steps_lost": sum(1 for s in self.steps if s.estimate.status is Status.LOST),
        }


def run_closed_loop(road, cam=CameraSpec(), lane_cfg=LaneConfig(), ctl_cfg=ControlConfig(),
                    params=SimParams(), initial=VehicleState(), actuators=(), noise=0):
    """Frame -> lane -> steering angle -> wheel duties, ``params.steps`` times."""
    vehicle = SimActuator(initial, params)
    sinks = [vehicle, *actuators]
    report = RunReport(initial=initial, lane_width=road.lane_width)
    prev = None
    for i in range(params.steps):
        frame = render_frame(road, vehicle.state, cam, noise=noise, seed=i)
        est = detect_lane(frame, lane_cfg, prev)
        cmd = STOP if est.status is Status.LOST else angle_to_command(est.steering_angle, ctl_cfg)
        for sink in sinks:
            if cmd == STOP:
                sink.stop()
            else:
                sink.apply(cmd)
        cte = cross_track_error(vehicle.state, road)
        report.steps.append(StepRecord(i, vehicle.state, est, cmd, cte))
        prev = est
        if params.departure_abort and abs(cte) > road.lane_width / 2:
            break
    return report
