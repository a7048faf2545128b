"""Flat ``section.key = value`` configuration over every tunable default.

Layers apply in order: built-in defaults, then a config file, then
``--set key=value`` overrides. Unknown keys are rejected so typos surface.
"""

from dataclasses import fields

from .control import ControlConfig
from .lane import LaneConfig
from .sim import CameraSpec, RoadSpec, SimParams, VehicleState


class ConfigError(ValueError):
    pass


# road geometry is described by a few scenario keys instead of RoadSpec's
# raw fields (an arc is easier to give as a radius than a curvature)
_SCENARIO = {
    "road.kind": "straight",  # straight | arc | polyline
    "road.length": 200.0,
    "road.radius": 10.0,
    "road.turn": "left",
    "road.waypoints": ((-10.0, 0.0), (200.0, 0.0)),
    "init.x": 0.0,
    "init.y": 0.0,
    "init.heading": 0.0,
    "sim.noise": 0,
}

_SECTIONS = (
    ("lane", LaneConfig),
    ("control", ControlConfig),
    ("camera", CameraSpec),
    ("sim", SimParams),
)

_ROAD_FIELDS = ("lane_width", "marking_width", "marking_color", "road_color", "background_color")


def _defaults():
    out = {}
    for prefix, cls in _SECTIONS:
        inst = cls()
        for f in fields(cls):
            out[f"{prefix}.{f.name}"] = getattr(inst, f.name)
    road = RoadSpec.straight()
    for name in _ROAD_FIELDS:
        out[f"road.{name}"] = getattr(road, name)
    out.update(_SCENARIO)
    return out


DEFAULTS = _defaults()


def _parse_tuple(text, template):
    text = text.strip()
    if template and isinstance(template[0], tuple):
        groups = [g for g in text.split(";") if g.strip()]
        return tuple(_parse_tuple(g, template[0]) for g in groups)
    parts = [p.strip() for p in text.split(",") if p.strip()]
    kind = type(template[0]) if template else float
    if kind is bool:
        kind = float
    return tuple(kind(p) if kind is int else float(p) for p in parts)


def coerce(key, text):
    """Parse ``text`` to the type of the default for ``key``."""
    if key not in DEFAULTS:
        raise ConfigError(f"unknown config key {key!r}")
    default = DEFAULTS[key]
    text = text.strip()
    try:
        if isinstance(default, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        if isinstance(default, tuple):
            return _parse_tuple(text, default)
        return text
    except ValueError as exc:
        raise ConfigError(f"bad value {text!r} for {key}") from exc


def parse_text(text, source="<config>"):
    """``key = value`` lines; '#' starts a comment; blank lines are skipped."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = coerce(key, value)
    return out


def parse_assignment(item):
    if "=" not in item:
        raise ConfigError(f"--set expects key=value, got {item!r}")
    key, value = item.split("=", 1)
    return key.strip(), coerce(key.strip(), value)


class AppConfig:
    """Resolved configuration; build the typed configs with the accessors."""

    def __init__(self, values=None):
        self.values = dict(DEFAULTS)
        for key, value in (values or {}).items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            self.values[key] = value
        # construct everything once so invalid combinations fail early
        try:
            self.lane(), self.control(), self.camera(), self.sim(), self.road()
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path=None, sets=()):
        values = {}
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                values.update(parse_text(fh.read(), str(path)))
        for item in sets:
            key, value = parse_assignment(item)
            values[key] = value
        return cls(values)

    def __getitem__(self, key):
        return self.values[key]

    def _section(self, prefix, cls):
        kw = {f.name: self.values[f"{prefix}.{f.name}"] for f in fields(cls)}
        return cls(**kw)

    def lane(self):
        return self._section("lane", LaneConfig)

    def control(self):
        return self._section("control", ControlConfig)

    def camera(self):
        return self._section("camera", CameraSpec)

    def sim(self):
        return self._section("sim", SimParams)

    def road(self):
        v = self.values
        look = {name: v[f"road.{name}"] for name in _ROAD_FIELDS}
        kind = v["road.kind"]
        if kind == "straight":
            return RoadSpec.straight(v["road.length"], **look)
        if kind == "arc":
            if v["road.turn"] not in ("left", "right"):
                raise ConfigError("road.turn must be left or right")
            return RoadSpec.arc(v["road.radius"], left=v["road.turn"] == "left", **look)
        if kind == "polyline":
            return RoadSpec(waypoints=v["road.waypoints"], **look)
        raise ConfigError(f"road.kind must be straight, arc or polyline, got {kind!r}")

    def initial_state(self):
        return VehicleState(self.values["init.x"], self.values["init.y"], self.values["init.heading"])

    def dump(self):
        """Config-file text reproducing this configuration."""
        lines = []
        for key in sorted(self.values):
            lines.append(f"{key} = {format_value(self.values[key])}")
        return "\n".join(lines) + "\n"


def format_value(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return "; ".join(format_value(v) for v in value)
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)
