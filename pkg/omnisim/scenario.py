"""
Created on 2026-10-19

@author: wf

Scenario configuration: YAML parsing with line precise errors, the
setpoint trajectory and the built-in maneuvers.
"""

import copy
import math
import os
from dataclasses import field
from typing import Any, Dict, List, Optional, Tuple

import numpy
import yaml
from basemkit.yamlable import lod_storable
from dacite import Config, from_dict
from dacite.exceptions import (
    DaciteFieldError,
    MissingValueError,
    UnexpectedDataError,
    WrongTypeError,
)

from omnisim.flight_control import ControllerGains, Setpoint
from omnisim.sim_context import Disturbance
from omnisim.spatial import (
    UnitQuaternion,
    quat_from_axis_angle,
    quat_interpolate,
    vec3,
)
from omnisim.vehicle import VehicleParams

SEGMENT_KINDS = ("hold", "ramp")


class NonFiniteValueError(DaciteFieldError):
    """
    a nan or infinite number in a float field
    """

    def __init__(self, value: float, field_path: Optional[str] = None):
        super().__init__(field_path=field_path)
        self.value = value
        self.msg = f"expected a finite number but got {value!r}"

    def __str__(self) -> str:
        return f'{self.msg} for field "{self.field_path}"'


def to_float(value: Any) -> Any:
    """
    dacite type hook for float fields: YAML integers are accepted,
    anything else that is not a float is left for the type check
    """
    if isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if isinstance(value, float) and not math.isfinite(value):
        raise NonFiniteValueError(value)
    return value


def type_name(field_type: Any) -> str:
    """
    readable name of a field type for error messages
    """
    name = getattr(field_type, "__name__", None) or str(field_type).replace("typing.", "")
    return name


class ConfigError(ValueError):
    """
    invalid scenario configuration
    """

    def __init__(self, path: str, msg: str, line: Optional[int] = None):
        self.path = path
        self.line = line
        self.msg = msg
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{path}: {msg}")


@lod_storable
class Segment:
    """
    a timed piece of the trajectory ending in the given pose

    a hold keeps the end pose for the whole segment, a ramp moves from the
    previous end pose at constant velocity and constant angular rate
    """

    t0: float
    t1: float
    kind: str = "hold"
    position: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    axis: List[float] = field(default_factory=lambda: [0.0, 0.0, 1.0])
    angle_deg: float = 0.0

    @property
    def attitude(self) -> UnitQuaternion:
        axis = numpy.asarray(self.axis, dtype=float)
        q = quat_from_axis_angle(axis / numpy.linalg.norm(axis), math.radians(self.angle_deg))
        return q


@lod_storable
class ScenarioConfig:
    """
    a complete simulation scenario
    """

    name: Optional[str] = None
    duration: float = 10.0  # [s]
    dt_phys: float = 0.001  # [s]
    dt_ctrl: float = 0.004  # [s]
    seed: int = 0
    epsilon_axis_deg: float = 2.0  # vertical arm threshold of the mask selection
    preposition_idle: bool = True  # excluded rotors follow their six rotor tilt
    realign_tolerance_deg: float = 6.0  # idle tilt error allowed for the return to six rotors
    instant_actuators: bool = False
    initial_position: List[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    initial_axis: List[float] = field(default_factory=lambda: [0.0, 0.0, 1.0])
    initial_angle_deg: float = 0.0
    params: VehicleParams = field(default_factory=VehicleParams)
    gains: ControllerGains = field(default_factory=ControllerGains)
    disturbance: Disturbance = field(default_factory=Disturbance)
    trajectory: List[Segment] = field(default_factory=list)
    out_dir: Optional[str] = None
    csv_name: str = "flight.csv"
    metrics_name: str = "metrics.txt"

    @property
    def initial_attitude(self) -> UnitQuaternion:
        axis = numpy.asarray(self.initial_axis, dtype=float)
        q = quat_from_axis_angle(
            axis / numpy.linalg.norm(axis), math.radians(self.initial_angle_deg)
        )
        return q

    @property
    def tick_count(self) -> int:
        return int(round(self.duration / self.dt_ctrl))

    def segments(self) -> List[Segment]:
        """
        my segments - a single hold at the initial pose if none are given
        """
        segments = self.trajectory
        if not segments:
            segments = [
                Segment(
                    t0=0.0,
                    t1=self.duration,
                    kind="hold",
                    position=list(self.initial_position),
                    axis=list(self.initial_axis),
                    angle_deg=self.initial_angle_deg,
                )
            ]
        return segments

    def get_trajectory(self) -> "Trajectory":
        trajectory = Trajectory(
            segments=self.segments(),
            p_start=numpy.array(self.initial_position, dtype=float),
            q_start=self.initial_attitude,
        )
        return trajectory

    def initial_setpoint(self) -> Setpoint:
        """
        rest pose at the start of the trajectory
        """
        trajectory = self.get_trajectory()
        sp = trajectory.setpoint(0.0)
        setpoint = Setpoint(p_des=sp.p_des, q_des=sp.q_des)
        return setpoint

    @classmethod
    def get_examples_path(cls) -> str:
        # the root directory (default: examples)
        path = os.path.join(os.path.dirname(__file__), "../omnisim_examples")
        path = os.path.abspath(path)
        return path


class Trajectory:
    """
    piecewise hold / ramp setpoints
    """

    def __init__(
        self,
        segments: List[Segment],
        p_start: Optional[numpy.ndarray] = None,
        q_start: Optional[UnitQuaternion] = None,
    ):
        self.segments = segments
        # start pose of each segment is the end pose of its predecessor
        self.starts: List[Tuple[numpy.ndarray, UnitQuaternion]] = []
        p = vec3() if p_start is None else p_start
        q = UnitQuaternion.identity() if q_start is None else q_start
        for segment in segments:
            self.starts.append((p, q))
            p = numpy.array(segment.position, dtype=float)
            q = segment.attitude

    def setpoint(self, t: float) -> Setpoint:
        """
        get the setpoint at time t [s]
        """
        index = len(self.segments) - 1
        for i, segment in enumerate(self.segments):
            if t < segment.t1:
                index = i
                break
        segment = self.segments[index]
        p_end = numpy.array(segment.position, dtype=float)
        q_end = segment.attitude
        if segment.kind == "hold" or t >= segment.t1:
            return Setpoint(p_des=p_end, q_des=q_end)
        p_start, q_start = self.starts[index]
        span = segment.t1 - segment.t0
        s = min(1.0, max(0.0, (t - segment.t0) / span))
        setpoint = Setpoint(
            p_des=p_start + s * (p_end - p_start),
            v_des=(p_end - p_start) / span,
            q_des=quat_interpolate(q_start, q_end, s),
        )
        return setpoint


def _hold(t0, t1, position, axis=(0, 0, 1), angle_deg=0.0) -> Dict[str, Any]:
    return {
        "t0": t0,
        "t1": t1,
        "kind": "hold",
        "position": list(position),
        "axis": list(axis),
        "angle_deg": angle_deg,
    }


def _ramp(t0, t1, position, axis=(0, 0, 1), angle_deg=0.0) -> Dict[str, Any]:
    segment = _hold(t0, t1, position, axis, angle_deg)
    segment["kind"] = "ramp"
    return segment


def _builtin_hover() -> Dict[str, Any]:
    home = (0.0, 0.0, 1.0)
    return {
        "name": "hover",
        "duration": 10.0,
        "initial_position": list(home),
        "trajectory": [_hold(0.0, 10.0, home)],
    }


def _builtin_flip_y() -> Dict[str, Any]:
    # slow flip at 15°/s in 90° ramps, upside down hold, back and settle
    home = (0.0, 0.0, 1.0)
    y = (0.0, 1.0, 0.0)
    return {
        "name": "flip_y",
        "duration": 34.0,
        "initial_position": list(home),
        "trajectory": [
            _hold(0.0, 2.0, home, y, 0.0),
            _ramp(2.0, 8.0, home, y, 90.0),
            _ramp(8.0, 14.0, home, y, 180.0),
            _hold(14.0, 17.0, home, y, 180.0),
            _ramp(17.0, 23.0, home, y, 90.0),
            _ramp(23.0, 29.0, home, y, 0.0),
            _hold(29.0, 34.0, home, y, 0.0),
        ],
    }


def _builtin_tilted_translation() -> Dict[str, Any]:
    # roll to 50° then fly a plus pattern in x and y at constant roll
    x = (1.0, 0.0, 0.0)
    roll = 50.0
    pattern = [
        (1.0, 0.0),
        (0.0, 0.0),
        (-1.0, 0.0),
        (0.0, 0.0),
        (0.0, 1.0),
        (0.0, 0.0),
        (0.0, -1.0),
        (0.0, 0.0),
    ]
    segments = [
        _ramp(0.0, 2.0, (0.0, 0.0, 1.0), x, roll),
        _hold(2.0, 3.0, (0.0, 0.0, 1.0), x, roll),
    ]
    t = 3.0
    for px, py in pattern:
        segments.append(_ramp(t, t + 3.0, (px, py, 1.0), x, roll))
        t += 3.0
    segments.append(_hold(t, t + 3.0, (0.0, 0.0, 1.0), x, roll))
    return {
        "name": "tilted_translation",
        "duration": t + 3.0,
        "initial_position": [0.0, 0.0, 1.0],
        "trajectory": segments,
    }


def _builtin_roll90_hover() -> Dict[str, Any]:
    # 90° about the body axis perpendicular to the rotor 1-4 arm, which
    # brings that arm to vertical, then hover under disturbance noise
    home = (0.0, 0.0, 1.0)
    y = (0.0, 1.0, 0.0)
    return {
        "name": "roll90_hover",
        "duration": 15.0,
        "initial_position": list(home),
        "disturbance": {"force_std": 0.5, "torque_std": 0.02},
        "trajectory": [
            _ramp(0.0, 3.0, home, y, 90.0),
            _hold(3.0, 15.0, home, y, 90.0),
        ],
    }


BUILTIN_SCENARIOS = {
    "hover": (_builtin_hover, "level hover hold"),
    "flip_y": (_builtin_flip_y, "slow 0°→180°→0° flip about the body y axis"),
    "tilted_translation": (
        _builtin_tilted_translation,
        "plus pattern in x and y at a constant roll of 50°",
    ),
    "roll90_hover": (
        _builtin_roll90_hover,
        "hover at 90° with the vertical arm rotor pair excluded",
    ),
}


def builtin_scenario_dict(name: str) -> Dict[str, Any]:
    if name not in BUILTIN_SCENARIOS:
        raise ConfigError(
            "scenario",
            f"unknown scenario {name} - expected one of {', '.join(BUILTIN_SCENARIOS)}",
        )
    generator, _description = BUILTIN_SCENARIOS[name]
    return generator()


def builtin_scenario(name: str) -> ScenarioConfig:
    """
    get the built-in scenario with the given name
    """
    config = ConfigParser().build(builtin_scenario_dict(name))
    return config


class ConfigParser:
    """
    validating builder of ScenarioConfig instances from YAML text

    keys may be nested mappings or flat dotted key paths like params.m
    """

    SECTIONS = {
        "params": VehicleParams,
        "gains": ControllerGains,
        "disturbance": Disturbance,
    }

    def __init__(self):
        self.lines: Dict[str, int] = {}
        self.dacite_config = Config(type_hooks={float: to_float}, strict=True)

    def line_of(self, path: str) -> Optional[int]:
        """
        get the line of the given key path or of its closest parent
        """
        while path:
            if path in self.lines:
                return self.lines[path]
            if "[" in path and path.endswith("]"):
                path = path[: path.rfind("[")]
            elif "." in path:
                path = path[: path.rfind(".")]
            else:
                break
        return self.lines.get(path)

    def error(self, path: str, msg: str) -> ConfigError:
        return ConfigError(path, msg, self.line_of(path))

    def collect_lines(self, node, prefix: str = "") -> None:
        """
        remember the 1-based line of every key path of the YAML node tree
        """
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key = str(key_node.value)
                path = f"{prefix}.{key}" if prefix else key
                self.lines[path] = key_node.start_mark.line + 1
                self.collect_lines(value_node, path)
        elif isinstance(node, yaml.SequenceNode):
            for index, item in enumerate(node.value):
                path = f"{prefix}[{index}]"
                self.lines[path] = item.start_mark.line + 1
                self.collect_lines(item, path)

    def expand(self, data: Dict[str, Any], prefix: str = "") -> Dict[str, Any]:
        """
        expand dotted keys into nested mappings
        """
        expanded: Dict[str, Any] = {}
        for key, value in data.items():
            key = str(key)
            parts = key.split(".")
            target = expanded
            for part in parts[:-1]:
                existing = target.setdefault(part, {})
                if not isinstance(existing, dict):
                    raise self.error(f"{prefix}{key}", f"{part} is not a section")
                target = existing
            leaf = parts[-1]
            if isinstance(value, dict):
                value = self.expand(value, f"{prefix}{key}.")
                existing = target.get(leaf)
                if isinstance(existing, dict):
                    existing.update(value)
                    continue
            if leaf in target and not isinstance(value, dict):
                raise self.error(f"{prefix}{key}", "duplicate key")
            target[leaf] = value
        return expanded

    def parse(self, text: str) -> ScenarioConfig:
        """
        parse and validate the given YAML text
        """
        try:
            root = yaml.compose(text)
            data = yaml.safe_load(text)
        except yaml.YAMLError as ex:
            mark = getattr(ex, "problem_mark", None)
            line = mark.line + 1 if mark is not None else None
            raise ConfigError("<document>", f"invalid YAML: {ex}", line)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("<document>", "expected a mapping of keys to values", 1)
        if root is not None:
            self.collect_lines(root)
        data = self.expand(data)
        name = data.pop("scenario", None)
        if name is not None:
            try:
                base = builtin_scenario_dict(str(name))
            except ConfigError as ex:
                raise self.error("scenario", ex.msg)
            data = self.merge(base, data)
        config = self.build(data)
        return config

    def merge(self, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        merged = copy.deepcopy(base)
        for key, value in override.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key] = self.merge(merged[key], value)
            else:
                merged[key] = value
        return merged

    def section(self, path: str, cls, data: Any):
        """
        build a dataclass instance of a flat section with dacite rejecting
        unknown keys and mistyped values
        """
        if not isinstance(data, dict):
            raise self.error(path or "<document>", f"expected a mapping but got {data!r}")
        prefix = f"{path}." if path else ""
        try:
            instance = from_dict(data_class=cls, data=data, config=self.dacite_config)
        except UnexpectedDataError as ex:
            key = sorted(ex.keys)[0]
            raise self.error(f"{prefix}{key}", f"unknown key {key}")
        except WrongTypeError as ex:
            raise self.error(
                f"{prefix}{ex.field_path}",
                f"expected {type_name(ex.field_type)} but got {ex.value!r}",
            )
        except MissingValueError as ex:
            raise self.error(f"{prefix}{ex.field_path}", "missing value")
        except NonFiniteValueError as ex:
            raise self.error(f"{prefix}{ex.field_path}", ex.msg)
        return instance

    def build(self, data: Dict[str, Any]) -> ScenarioConfig:
        """
        build and validate a ScenarioConfig from a plain (nested) dict
        """
        data = dict(data)
        nested = {}
        for key in [*self.SECTIONS, "trajectory"]:
            if key in data:
                nested[key] = data.pop(key)
        config = self.section("", ScenarioConfig, data)
        for key, cls in self.SECTIONS.items():
            if key in nested:
                setattr(config, key, self.section(key, cls, nested[key]))
        items = nested.get("trajectory") or []
        if not isinstance(items, list):
            raise self.error("trajectory", f"expected a list of segments but got {items!r}")
        config.trajectory = [
            self.section(f"trajectory[{index}]", Segment, item)
            for index, item in enumerate(items)
        ]
        self.validate(config)
        return config

    def check_vector(self, path: str, value: List[float], nonzero: bool = False) -> None:
        if len(value) != 3:
            raise self.error(path, f"expected a list of 3 numbers but got {value!r}")
        if nonzero and numpy.linalg.norm(value) == 0:
            raise self.error(path, "must not be the zero vector")

    def validate(self, config: ScenarioConfig) -> None:
        """
        check the invariants of the config
        """
        if config.duration <= 0:
            raise self.error("duration", f"must be > 0 but is {config.duration}")
        for key in ("dt_phys", "dt_ctrl"):
            if getattr(config, key) <= 0:
                raise self.error(key, f"must be > 0 but is {getattr(config, key)}")
        ratio = config.dt_ctrl / config.dt_phys
        if abs(ratio - round(ratio)) > 1e-9 * ratio or round(ratio) < 1:
            raise self.error(
                "dt_ctrl",
                f"must be an integer multiple of dt_phys={config.dt_phys}",
            )
        if not 0 < config.epsilon_axis_deg < 45:
            raise self.error("epsilon_axis_deg", "must be in (0, 45)")
        if not 0 < config.realign_tolerance_deg <= 180:
            raise self.error("realign_tolerance_deg", "must be in (0, 180]")
        for path, msg in config.params.problems("params"):
            raise self.error(path, msg)
        for path, msg in config.gains.problems("gains"):
            raise self.error(path, msg)
        disturbance = config.disturbance
        for key in ("force_std", "torque_std"):
            if getattr(disturbance, key) < 0:
                raise self.error(f"disturbance.{key}", "must be >= 0")
        for key in ("force_bias", "torque_bias"):
            self.check_vector(f"disturbance.{key}", getattr(disturbance, key))
        self.check_vector("initial_position", config.initial_position)
        self.check_vector("initial_axis", config.initial_axis, nonzero=True)
        t_end = 0.0
        for index, segment in enumerate(config.trajectory):
            path = f"trajectory[{index}]"
            if segment.kind not in SEGMENT_KINDS:
                raise self.error(f"{path}.kind", f"must be one of {SEGMENT_KINDS}")
            if abs(segment.t0 - t_end) > 1e-9:
                raise self.error(
                    f"{path}.t0",
                    f"segments must be contiguous: t0={segment.t0} but previous segment ends at {t_end}",
                )
            if segment.t1 <= segment.t0:
                raise self.error(f"{path}.t1", f"must be > t0={segment.t0}")
            self.check_vector(f"{path}.position", segment.position)
            self.check_vector(f"{path}.axis", segment.axis, nonzero=True)
            t_end = segment.t1


def parse_config(text: str) -> ScenarioConfig:
    """
    parse the YAML scenario text into a validated ScenarioConfig
    """
    config = ConfigParser().parse(text)
    return config


def load_config(path: str) -> ScenarioConfig:
    """
    read and parse a scenario file - errors carry the file name
    """
    with open(path, encoding="utf-8") as yaml_file:
        text = yaml_file.read()
    try:
        config = parse_config(text)
    except ConfigError as ex:
        raise ConfigError(f"{path}:{ex.path}", ex.msg, ex.line)
    return config
