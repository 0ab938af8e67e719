"""JSON config documents for the command-line front end.

A document has the sections ``platform`` with ``preset`` or ``rotors`` (and
optionally ``tilt_mode``), ``gains``, ``trajectory`` and ``simulation``.
Only ``platform`` is mandatory; the others fall back to the use-case
defaults.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .control import ControllerGains
from .dynamics import RigidBodyState
from .platform import (
    _matrix,
    component_from_dict,
    composite_inertia,
    platform_from_dict,
    validate,
)
from .simulation import Scenario
from .so3 import is_rotation
from .trajectory import ManeuverPlan

LAYERS = ("analytical", "physics", "both")
TRAJECTORY_PRESETS = {"figure8_usecase": ManeuverPlan()}
SECTIONS = {"platform", "preset", "rotors", "tilt_mode", "gains", "trajectory", "simulation"}


class ConfigError(ValueError):
    """Raised for unreadable or invalid config documents."""


def _vector(value, name: str, size: int = 3) -> np.ndarray:
    a = np.asarray(value, dtype=float)
    if a.shape != (size,) or not np.all(np.isfinite(a)):
        raise ConfigError(f"{name}: expected {size} finite numbers")
    return a


def _plan(sec) -> ManeuverPlan:
    if sec is None:
        return ManeuverPlan()
    sec = dict(sec)
    base = ManeuverPlan()
    preset = sec.pop("preset", None)
    if preset is not None:
        if preset not in TRAJECTORY_PRESETS:
            raise ConfigError(
                f"unknown trajectory preset {preset!r}; known: {sorted(TRAJECTORY_PRESETS)}"
            )
        base = TRAJECTORY_PRESETS[preset]
    allowed = set(ManeuverPlan.__dataclass_fields__)
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown trajectory keys: {sorted(unknown)}")
    params = {k: getattr(base, k) for k in allowed}
    params.update(sec)
    return ManeuverPlan(**params)


def _initial_state(sec) -> RigidBodyState:
    if sec is None:
        return RigidBodyState()
    unknown = set(sec) - {"p", "R", "v", "omega"}
    if unknown:
        raise ConfigError(f"unknown initial_state keys: {sorted(unknown)}")
    R = np.eye(3)
    if "R" in sec:
        R = _matrix(sec["R"], "initial_state.R")
        if not is_rotation(R, 1e-9):
            raise ConfigError("initial_state.R is not a rotation matrix")
    return RigidBodyState(
        p=_vector(sec.get("p", [0, 0, 0]), "initial_state.p"),
        R=R,
        v=_vector(sec.get("v", [0, 0, 0]), "initial_state.v"),
        omega=_vector(sec.get("omega", [0, 0, 0]), "initial_state.omega"),
    )


def _physics_inertia(sec: dict, default: np.ndarray) -> np.ndarray:
    if "physics_inertia" in sec and "components" in sec:
        raise ConfigError("give either simulation.physics_inertia or simulation.components")
    if "physics_inertia" in sec:
        J = _matrix(sec["physics_inertia"], "simulation.physics_inertia")
    elif "components" in sec:
        _, _, J = composite_inertia([component_from_dict(c) for c in sec["components"]])
    else:
        return default.copy()
    if not np.allclose(J, J.T) or np.linalg.eigvalsh(J).min() <= 0:
        raise ConfigError("physics inertia must be symmetric positive definite")
    return J


def scenario_from_dict(doc: dict) -> tuple[Scenario, str]:
    """Build a :class:`Scenario` and the default layer from a document."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(doc) - SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    try:
        model = platform_from_dict(doc)
        report = validate(model)
        if not report.ok:
            raise ConfigError(f"invalid platform:\n{report}")
        gains = ControllerGains.from_dict(doc.get("gains") or {})
        plan = _plan(doc.get("trajectory"))
        sim = dict(doc.get("simulation") or {})
        allowed = {
            "dt", "duration", "layer", "tau_m", "initial_state",
            "initial_rotor_rates", "physics_inertia", "components",
        }
        extra = set(sim) - allowed
        if extra:
            raise ConfigError(f"unknown simulation keys: {sorted(extra)}")
        layer = sim.get("layer", "both")
        if layer not in LAYERS:
            raise ConfigError(f"simulation.layer must be one of {LAYERS}")
        rates = sim.get("initial_rotor_rates")
        if rates is not None:
            rates = _vector(rates, "simulation.initial_rotor_rates", model.n)
        scenario = Scenario(
            model=model,
            physics_inertia=_physics_inertia(sim, model.inertia),
            gains=gains,
            plan=plan,
            dt=float(sim.get("dt", 1e-3)),
            duration=None if sim.get("duration") is None else float(sim["duration"]),
            tau_m=float(sim.get("tau_m", 0.05)),
            initial_state=_initial_state(sim.get("initial_state")),
            initial_rotor_rates=rates,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from None
    return scenario, layer


def load_document(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


def load_scenario(path) -> tuple[Scenario, str]:
    return scenario_from_dict(load_document(path))


def bundled_config(name: str) -> Path:
    """Path of a config shipped with the package (``usecase``, ``cs_4r``)."""
    p = Path(__file__).with_name("configs") / f"{name}.json"
    if not p.is_file():
        raise ConfigError(f"no bundled config named {name!r}")
    return p
