"""JSON run configuration: strict schema, units in key names."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .controllers import BodyrateGains
from .riccati import DEFAULT_EPSILON, LqrWeights
from .simulation import SimConfig
from .trajectory import LemniscateParams, Sampler, hover_trajectory, lemniscate_trajectory
from .vehicle import TrueState, VehicleParams


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is the dotted key that failed."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}


def _array(n, item=_num):
    return {"type": "array", "items": item, "minItems": n, "maxItems": n}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_vec3_or_null = {"oneOf": [_array(3), {"type": "null"}]}

SCHEMA = _obj({
    "vehicle": _obj({
        "mass_kg": _pos,
        "inertia_kgm2": {"oneOf": [_array(3, _pos), _array(3, _array(3))]},
        "gravity_mps2": _array(3),
        "thrust_min_n": _nonneg,
        "thrust_max_n": _pos,
    }),
    "lqr": _obj({
        "q_diag": _array(9, _pos),
        "r_diag": _array(4, _pos),
        "regularization_per_s": _nonneg,
    }),
    "bodyrate": _obj({"kp_diag_per_s": _array(3, _pos)}),
    "trajectory": {"oneOf": [
        _obj({
            "type": {"const": "hover"},
            "position_m": _array(3),
            "yaw_rad": _num,
        }, required=["type"]),
        _obj({
            "type": {"const": "lemniscate"},
            "amplitude_x_m": _nonneg,
            "amplitude_y_m": _nonneg,
            "omega_traj_radps": _pos,
            "altitude_m": _num,
            "yaw_mode": {"enum": ["fixed", "tangent", "spinning"]},
            "yaw_rad": _num,
            "yaw_rate_radps": _num,
        }, required=["type"]),
    ]},
    "sim": _obj({
        "dt_inner_s": _pos,
        "outer_divisor": {"type": "integer", "minimum": 1},
        "duration_s": _pos,
        "initial": _obj({
            "position_m": _vec3_or_null,
            "position_offset_m": _array(3),
            "quaternion_wxyz": {"oneOf": [_array(4), {"type": "null"}]},
            "velocity_mps": _vec3_or_null,
            "omega_radps": _array(3),
        }),
    }, required=["duration_s"]),
    "metrics": _obj({
        "settle_threshold_m": _pos,
        "window_start_s": _nonneg,
    }),
    "output": _obj({
        "dir": {"type": "string"},
        "csv": {"type": "boolean"},
        "svg": {"type": "boolean"},
        "summary": {"type": "boolean"},
    }),
}, required=["trajectory", "sim"])


@dataclass
class RunConfig:
    vehicle: VehicleParams
    weights: LqrWeights
    epsilon: float
    gains: BodyrateGains
    trajectory: Sampler
    trajectory_desc: str
    sim: SimConfig
    settle_threshold: float
    window_start: float
    out_dir: Path
    emit_csv: bool
    emit_svg: bool
    emit_summary: bool


def _dotted(path):
    return ".".join(str(p) for p in path)


def _validate_schema(raw):
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if not errors:
        return
    err = jsonschema.exceptions.best_match(errors)
    # unknown keys are reported against the parent; name the key itself
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema["properties"]))
        raise ConfigError(_dotted([*err.absolute_path, extra[0]]), "unknown key")
    raise ConfigError(_dotted(err.absolute_path), err.message)


def _build(path, fn):
    try:
        return fn()
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_config(raw: dict, base_dir=Path(".")) -> RunConfig:
    """Validate a decoded JSON document and build the run objects.

    Raises
    ------
    ConfigError
        With the dotted path of the offending key.
    """
    _validate_schema(raw)

    v = raw.get("vehicle", {})
    vehicle = _build("vehicle", lambda: VehicleParams(
        mass=v.get("mass_kg", 1.0),
        inertia=np.asarray(v.get("inertia_kgm2", [0.01, 0.01, 0.02]), float),
        gravity=np.asarray(v.get("gravity_mps2", [0.0, 0.0, -9.81]), float),
        thrust_min=v.get("thrust_min_n", 0.0),
        thrust_max=v.get("thrust_max_n"),
    ))

    lq = raw.get("lqr", {})
    default_w = LqrWeights.default()
    weights = _build("lqr", lambda: LqrWeights.from_diagonals(
        lq.get("q_diag", np.diag(default_w.Q)), lq.get("r_diag", np.diag(default_w.Rw))))
    epsilon = lq.get("regularization_per_s", DEFAULT_EPSILON)

    br = raw.get("bodyrate", {})
    gains = BodyrateGains(np.asarray(br.get("kp_diag_per_s", [20.0, 20.0, 8.0]), float))

    tr = raw["trajectory"]
    if tr["type"] == "hover":
        p0 = np.asarray(tr.get("position_m", [0.0, 0.0, 1.5]), float)
        traj = _build("trajectory", lambda: hover_trajectory(p0, tr.get("yaw_rad", 0.0), vehicle))
        desc = f"hover at {p0.tolist()}"
    else:
        lp = _build("trajectory", lambda: LemniscateParams(
            amplitude_x=tr.get("amplitude_x_m", 2.0),
            amplitude_y=tr.get("amplitude_y_m", 1.0),
            omega_traj=tr.get("omega_traj_radps", 0.8),
            altitude=tr.get("altitude_m", 1.5),
            yaw_mode=tr.get("yaw_mode", "tangent"),
            yaw0=tr.get("yaw_rad", 0.0),
            yaw_rate=tr.get("yaw_rate_radps", 0.0),
        ))
        traj = lemniscate_trajectory(lp, vehicle)
        desc = f"lemniscate {lp}"
    start = _build("trajectory", lambda: traj(0.0))

    s = raw["sim"]
    init = s.get("initial", {})
    p = init.get("position_m")
    p = start.nominal.p.copy() if p is None else np.asarray(p, float)
    p = p + np.asarray(init.get("position_offset_m", [0.0, 0.0, 0.0]), float)
    q = init.get("quaternion_wxyz", [1.0, 0.0, 0.0, 0.0])
    q = start.nominal.q.copy() if q is None else np.asarray(q, float)
    if not np.linalg.norm(q) > 0:
        raise ConfigError("sim.initial.quaternion_wxyz", "quaternion must be non-zero")
    vel = init.get("velocity_mps", [0.0, 0.0, 0.0])
    vel = start.nominal.v.copy() if vel is None else np.asarray(vel, float)
    initial = TrueState(p, q / np.linalg.norm(q), vel,
                        np.asarray(init.get("omega_radps", [0.0, 0.0, 0.0]), float))
    sim = _build("sim", lambda: SimConfig(
        duration=s["duration_s"], initial=initial, dt_inner=s.get("dt_inner_s", 1e-3),
        outer_divisor=s.get("outer_divisor", 10), epsilon=epsilon))

    m = raw.get("metrics", {})
    o = raw.get("output", {})
    window = m.get("window_start_s", 0.0)
    if window > sim.duration:
        raise ConfigError("metrics.window_start_s", "window starts after the end of the run")
    return RunConfig(
        vehicle=vehicle, weights=weights, epsilon=epsilon, gains=gains,
        trajectory=traj, trajectory_desc=desc, sim=sim,
        settle_threshold=m.get("settle_threshold_m", 0.01), window_start=window,
        out_dir=base_dir / o.get("dir", "out"),
        emit_csv=o.get("csv", True), emit_svg=o.get("svg", True),
        emit_summary=o.get("summary", True),
    )


def bundled_configs():
    return sorted(p.name for p in resources.files("eslqr.configs").iterdir()
                  if p.name.endswith(".json"))


def resolve_config_path(name):
    """A filesystem path, or the name of a bundled config such as ``hover.json``."""
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("eslqr.configs") / path.name
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError("", f"config file not found: {name}")


def load_config(path) -> RunConfig:
    path = resolve_config_path(path)
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a JSON object")
    return parse_config(raw)
