"""Steering angle -> differential-drive wheel duties, and actuator sinks."""

from dataclasses import dataclass


def _clamp(v, lo, hi):
    return lo if v < lo else hi if v > hi else v


@dataclass(frozen=True)
class MotorCommand:
    left_duty: float
    right_duty: float

    def __post_init__(self):
        for name in ("left_duty", "right_duty"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")

    def swapped(self):
        return MotorCommand(self.right_duty, self.left_duty)


STOP = MotorCommand(0.0, 0.0)


@dataclass(frozen=True)
class ControlConfig:
    base_duty: float = 0.6
    theta_max: float = 45.0
    boost_gain: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.base_duty <= 1.0:
            raise ValueError("base_duty must be in (0, 1]")
        if not self.theta_max > 0:
            raise ValueError("theta_max must be positive")
        if self.boost_gain < 0:
            raise ValueError("boost_gain must be >= 0")


def angle_to_command(angle, config=ControlConfig()):
    """Slow the inner wheel and speed up the outer one, linearly in the angle.

    Positive angles turn right. At +theta_max the right wheel stops.
    """
    u = _clamp(angle, -config.theta_max, config.theta_max) / config.theta_max
    mag = abs(u)
    inner = _clamp(config.base_duty * (1.0 - mag), 0.0, 1.0)
    outer = min(1.0, config.base_duty * (1.0 + config.boost_gain * mag))
    if u > 0:
        return MotorCommand(outer, inner)
    if u < 0:
        return MotorCommand(inner, outer)
    return MotorCommand(config.base_duty, config.base_duty)


def stop():
    return STOP


class Actuator:
    """Sink for motor commands. Subclasses implement ``apply``."""

    def apply(self, command):
        raise NotImplementedError

    def stop(self):
        self.apply(STOP)


class LogActuator(Actuator):
    """Appends ``step,left_duty,right_duty`` lines to a text stream."""

    def __init__(self, stream):
        self.stream = stream
        self.step = 0
        self.commands = []

    def apply(self, command):
        self.commands.append(command)
        self.stream.write(f"{self.step},{command.left_duty:.4f},{command.right_duty:.4f}\n")
        self.step += 1

