"""Scenario files: schema, loading and the objects they describe."""
import copy
import json
import os
from dataclasses import dataclass
from importlib import resources

import jsonschema
import numpy as np

from . import lie
from .errordyn import ControlConfig
from .errors import ScenarioError
from .flowpipe import Obstacle
from .invariant import polytope_from_box
from .lqr import lqr_gain
from .signals import KINDS, DisturbanceSignal, random_bank
from .trajectory import PolynomialReference, check_input_box, load_waypoints, plan_polynomial

DEFAULT_SEED = 42

_VEC3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_RANGE = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_XY = {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}]}
_WAYPOINT = {
    "type": "object",
    "required": ["x", "y", "t"],
    "properties": {"x": {"type": "number"}, "y": {"type": "number"}, "t": {"type": "number"}},
}
_OBSTACLE = {
    "type": "object",
    "oneOf": [
        {"required": ["xmin", "xmax", "ymin", "ymax"]},
        {"required": ["polygon"]},
    ],
    "properties": {
        "name": {"type": "string"},
        "xmin": {"type": "number"}, "xmax": {"type": "number"},
        "ymin": {"type": "number"}, "ymax": {"type": "number"},
        "polygon": {"type": "array", "minItems": 3, "items": {"type": "array", "minItems": 2, "maxItems": 2}},
    },
}

SCHEMA = {
    "type": "object",
    "required": ["name", "waypoints", "disturbance"],
    "properties": {
        "name": {"type": "string"},
        "seed": {"type": "integer"},
        "waypoints": {"oneOf": [
            {"type": "array", "minItems": 2, "items": _WAYPOINT},
            {"type": "string"},
        ]},
        "boundary": {
            "type": "object",
            "properties": {
                "start": {"type": "array", "maxItems": 3, "items": _XY},
                "end": {"type": "array", "maxItems": 3, "items": _XY},
            },
        },
        "disturbance": {
            "type": "object",
            "required": ["amplitude"],
            "properties": {
                "kind": {"enum": ["sinusoid", "square", "mixed"]},
                "amplitude": _VEC3,
                "frequency": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "lqr": {"type": "object", "properties": {"Q": _VEC3, "R": _VEC3}},
        "polytope": {"type": "object", "properties": {"vx": _RANGE, "vy": _RANGE, "omega": _RANGE}},
        "obstacles": {"oneOf": [{"type": "array", "items": _OBSTACLE}, {"type": "string"}]},
        "simulation": {
            "type": "object",
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "initial_error": _VEC3,
            },
        },
        "invariant": {
            "type": "object",
            "properties": {
                "sigma0": {"type": "number", "minimum": 1},
                "eps": {"type": "number", "exclusiveMinimum": 0},
                "n_samp": {"type": "integer", "minimum": 1},
            },
        },
        "flowpipe": {
            "type": "object",
            "properties": {
                "window": {"type": "number", "exclusiveMinimum": 0},
                "n_dirs": {"type": "integer", "minimum": 8},
                "sweep_steps": {"type": "integer", "minimum": 1},
            },
        },
        "monte_carlo": {
            "type": "object",
            "properties": {
                "runs": {"type": "integer", "minimum": 1},
                "dt": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output_dir": {"type": "string"},
    },
}

DEFAULTS = {
    "seed": DEFAULT_SEED,
    "boundary": {"start": [None, [0.0, 0.0], [0.0, 0.0]], "end": [None, [0.0, 0.0], [0.0, 0.0]]},
    "lqr": {"Q": [1.0, 1.0, 1.0], "R": [1.0, 1.0, 1.0]},
    "polytope": {"vx": [18.0, 20.0], "vy": [0.0, 0.0], "omega": [-np.pi / 2, np.pi / 2]},
    "obstacles": [],
    "simulation": {"dt": 1e-3, "t_end": None, "initial_error": [0.1, 0.1, np.pi / 100]},
    "invariant": {"sigma0": 1.02, "eps": 1e-3, "n_samp": 2000},
    "flowpipe": {"window": 0.5, "n_dirs": 256, "sweep_steps": 32},
    "monte_carlo": {"runs": 50, "dt": 5e-3},
    "output_dir": "out",
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class Scenario:
    data: dict
    base_dir: str = "."

    @property
    def name(self):
        return self.data["name"]

    @property
    def seed(self):
        return int(self.data["seed"])

    @property
    def w_bounds(self):
        return np.asarray(self.data["disturbance"]["amplitude"], dtype=float)

    def _path(self, p):
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    def waypoints(self):
        wp = self.data["waypoints"]
        if isinstance(wp, str):
            return load_waypoints(self._path(wp))
        return [(w["x"], w["y"], w["t"]) for w in wp]

    def trajectory(self):
        b = self.data["boundary"]
        traj = plan_polynomial(self.waypoints(), start=b.get("start"), end=b.get("end"))
        p = self.data["polytope"]
        check_input_box(traj, p["vx"], p["omega"])
        return traj

    def reference(self, traj=None):
        return PolynomialReference(self.trajectory() if traj is None else traj)

    def nominal_input(self):
        p = self.data["polytope"]
        return np.array([np.mean(p["vx"]), np.mean(p["vy"]), np.mean(p["omega"])])

    def controller(self):
        """LQR gain designed on the box-centre linearisation with B = I."""
        A = -lie.adjoint_algebra(self.nominal_input())
        B = np.eye(3)
        Q = np.diag(self.data["lqr"]["Q"])
        R = np.diag(self.data["lqr"]["R"])
        return ControlConfig(B, lqr_gain(A, B, Q, R))

    def polytope(self, cfg):
        p = self.data["polytope"]
        return polytope_from_box(cfg, p["vx"], p["vy"], p["omega"], self.w_bounds)

    def disturbance(self):
        d = self.data["disturbance"]
        kind = d.get("kind", "sinusoid")
        return DisturbanceSignal("sinusoid" if kind == "mixed" else kind, tuple(d["amplitude"]),
                                 d.get("frequency", 0.5))

    def disturbance_bank(self, n, rng):
        d = self.data["disturbance"]
        kind = d.get("kind", "mixed")
        kinds = KINDS if kind == "mixed" else (kind,)
        return random_bank(n, self.w_bounds, rng, kinds=kinds)

    def obstacles(self):
        obs = self.data["obstacles"]
        if isinstance(obs, str):
            with open(self._path(obs)) as f:
                obs = json.load(f)
        return [Obstacle.from_dict(o) for o in obs]


def validate(data, base_dir="."):
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as e:
        raise ScenarioError(f"invalid scenario: {e.message}") from e
    for key in ("waypoints", "obstacles"):
        ref = data.get(key)
        if isinstance(ref, str):
            path = ref if os.path.isabs(ref) else os.path.join(base_dir, ref)
            if not os.path.exists(path):
                raise ScenarioError(f"{key} file not found: {ref}")


def from_dict(data, base_dir="."):
    validate(data, base_dir)
    return Scenario(_merge(DEFAULTS, data), base_dir)


def load(path):
    """Load a scenario from a file path or the name of a bundled scenario."""
    if not os.path.exists(path):
        bundled = resources.files("loglinear.scenarios").joinpath(
            path if path.endswith(".json") else path + ".json")
        if not bundled.is_file():
            raise ScenarioError(f"scenario not found: {path}")
        return from_dict(json.loads(bundled.read_text()), ".")
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"scenario is not valid JSON: {e}") from e
    return from_dict(data, os.path.dirname(os.path.abspath(path)))


def bundled(name):
    return load(name)
