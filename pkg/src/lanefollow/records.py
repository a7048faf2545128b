"""Line-delimited JSON records for lane estimates and closed-loop runs.

Numbers are written in plain fixed-point decimal so golden files diff
cleanly: angles (degrees) with 3 fractional digits, pixel coordinates with 2,
world metres and wheel duties with 4. Line angles theta and the vehicle
heading are converted to degrees on output.
"""

import json
import math
from dataclasses import dataclass

from .lane import Status

FIELDS = ("frame_index", "status", "steering_angle", "left", "right", "vanishing_point", "roi", "center")
STATE_FIELDS = ("x", "y", "heading", "left_duty", "right_duty", "cte")


def fixed(value, digits):
    """Fixed-point text with ``digits`` decimals; negative zero prints as 0."""
    text = f"{float(value):.{digits}f}"
    if text.lstrip("-").strip("0.") == "":
        text = text.lstrip("-")
    return text


def _encode(value):
    """JSON text for nested lists of pre-formatted numbers, strings, ints, None."""
    if value is None:
        return "null"
    if isinstance(value, _Num):
        return value.text
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v)}" for k, v in value.items()) + "}"
    return "[" + ", ".join(_encode(v) for v in value) + "]"


class _Num:
    __slots__ = ("text",)

    def __init__(self, value, digits):
        self.text = fixed(value, digits)


def _px(value):
    return _Num(value, 2)


def _deg(value):
    return _Num(value, 3)


def _m(value):
    return _Num(value, 4)


@dataclass(frozen=True)
class LaneRecord:
    frame_index: int
    status: str
    steering_angle: float
    left: tuple = None  # (rho px, theta deg, votes)
    right: tuple = None
    vanishing_point: tuple = None
    roi: tuple = None
    center: tuple = None

    def __post_init__(self):
        if self.status == Status.TRACKED.value:
            missing = [f for f in FIELDS[3:] if getattr(self, f) is None]
            if missing:
                raise ValueError(f"Tracked record missing {missing}")

    @classmethod
    def from_estimate(cls, index, est):
        def line(ln):
            return None if ln is None else (float(ln.rho), math.degrees(ln.theta), int(ln.votes))

        has = est.status is not Status.LOST
        center = None
        if has and est.center is not None:
            center = tuple(tuple(map(float, p)) for p in est.center.endpoints)
        return cls(
            frame_index=int(index),
            status=est.status.value,
            steering_angle=float(est.steering_angle),
            left=line(est.left) if has else None,
            right=line(est.right) if has else None,
            vanishing_point=tuple(map(float, est.vanishing_point)) if has and est.vanishing_point is not None else None,
            roi=tuple(tuple(map(float, p)) for p in est.roi) if has and est.roi is not None else None,
            center=center,
        )

    def fields(self):
        """Ordered mapping of formatted values."""
        def line(ln):
            return None if ln is None else [_px(ln[0]), _deg(ln[1]), int(ln[2])]

        def pt(p):
            return [_px(p[0]), _px(p[1])]

        return {
            "frame_index": self.frame_index,
            "status": self.status,
            "steering_angle": _deg(self.steering_angle),
            "left": line(self.left),
            "right": line(self.right),
            "vanishing_point": None if self.vanishing_point is None else pt(self.vanishing_point),
            "roi": None if self.roi is None else [pt(p) for p in self.roi],
            "center": None if self.center is None else [pt(p) for p in self.center],
        }

    def to_line(self):
        return _encode(self.fields())


def step_line(step):
    """One closed-loop step: the lane record plus pose, duties and cte."""
    rec = LaneRecord.from_estimate(step.index, step.estimate).fields()
    s = step.state
    rec.update({
        "x": _m(s.x),
        "y": _m(s.y),
        "heading": _deg(math.degrees(s.heading)),
        "left_duty": _m(step.command.left_duty),
        "right_duty": _m(step.command.right_duty),
        "cte": _m(step.cte),
    })
    return _encode(rec)


def summary_line(report):
    summ = report.summary()
    body = {
        "steps": summ["steps"],
        "max_abs_cte": _m(summ["max_abs_cte"]),
        "mean_abs_cte": _m(summ["mean_abs_cte"]),
        "departures": summ["departures"],
        "steps_lost": summ["steps_lost"],
    }
    return _encode({"summary": body})


def report_lines(report):
    return [step_line(step) for step in report.steps] + [summary_line(report)]


def write_report(path, report):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in report_lines(report):
            fh.write(line + "\n")


def parse_line(line):
    return json.loads(line)
