"""Parametric n-rotor platform description.

A rotor is placed at ``l * Rz(gamma) Ry(delta) e1`` and spins about
``Rz(gamma) Ry(beta) Rx(alpha) e3`` (body frame). Positive ``delta`` puts the
rotor below the body (x, y) plane under the active-rotation convention used
throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .so3 import E1, E3, is_rotation, rot_x, rot_y, rot_z

N_MIN, N_MAX = 3, 8


@dataclass(frozen=True)
class RotorSpec:
    gamma: float = 0.0  # azimuth [rad], [0, 2pi)
    delta: float = 0.0  # elevation [rad], [0, pi/2)
    alpha: float = 0.0  # cant [rad], (-pi/2, pi/2)
    beta: float = 0.0  # dihedral [rad], [0, pi/2)
    kappa: int = 1  # -1 CCW, +1 CW
    c_f: float = 0.0  # [N s^2 / rad^2]
    c_tau: float = 0.0  # [N m s^2 / rad^2]


@dataclass(frozen=True)
class TiltMode:
    """Which rotor angles may be driven at run time.

    Empty tuples mean a fixed (tilted or zero-tilt) platform.
    """

    tiltable_cant: tuple[bool, ...] = ()
    tiltable_dihedral: tuple[bool, ...] = ()

    def __post_init__(self):
        if (self.tiltable_cant or self.tiltable_dihedral) and not (
            any(self.tiltable_cant) or any(self.tiltable_dihedral)
        ):
            raise ValueError("a tilting mode needs at least one tiltable angle")

    @property
    def is_tilting(self) -> bool:
        return any(self.tiltable_cant) or any(self.tiltable_dihedral)

    def can_tilt(self, i: int) -> tuple[bool, bool]:
        cant = bool(self.tiltable_cant[i]) if i < len(self.tiltable_cant) else False
        dih = bool(self.tiltable_dihedral[i]) if i < len(self.tiltable_dihedral) else False
        return cant, dih


FIXED = TiltMode()


@dataclass(frozen=True, eq=False)
class PlatformModel:
    mass: float
    inertia: np.ndarray
    arm_length: float
    rotors: tuple[RotorSpec, ...]
    gravity: float = 9.81
    tilt_mode: TiltMode = FIXED
    name: str = ""

    def __post_init__(self):
        J = np.array(self.inertia, dtype=float).reshape(3, 3)
        J.setflags(write=False)
        object.__setattr__(self, "inertia", J)
        object.__setattr__(self, "rotors", tuple(self.rotors))

    @property
    def n(self) -> int:
        return len(self.rotors)

    @cached_property
    def inertia_inv(self) -> np.ndarray:
        return np.linalg.inv(self.inertia)

    def with_inertia(self, J) -> "PlatformModel":
        return replace(self, inertia=np.array(J, dtype=float))


def rotor_position(spec: RotorSpec, arm_length: float) -> np.ndarray:
    """Rotor spinning center in the body frame [m]."""
    if arm_length <= 0:
        raise ValueError("arm length must be positive")
    return arm_length * (rot_z(spec.gamma) @ rot_y(spec.delta) @ E1)


def rotor_axis(
    spec: RotorSpec,
    cant_override: float | None = None,
    dihedral_override: float | None = None,
    *,
    tiltable: tuple[bool, bool] = (False, False),
) -> np.ndarray:
    """Unit spin axis in the body frame.

    Overrides replace the stored cant/dihedral angle and are only accepted
    for angles flagged as tiltable.
    """
    alpha, beta = spec.alpha, spec.beta
    if cant_override is not None:
        if not tiltable[0]:
            raise ValueError("cant override on a rotor whose cant angle is fixed")
        alpha = cant_override
    if dihedral_override is not None:
        if not tiltable[1]:
            raise ValueError("dihedral override on a rotor whose dihedral angle is fixed")
        beta = dihedral_override
    return rot_z(spec.gamma) @ rot_y(beta) @ rot_x(alpha) @ E3


def rotor_positions(model: PlatformModel) -> np.ndarray:
    return np.array([rotor_position(r, model.arm_length) for r in model.rotors])


# ---------------------------------------------------------------------------
# presets

PRESETS = {
    "CS_4R": {
        "description": "coplanar star-shaped zero-tilt quadrotor",
        "n": 4,
        "params": ["mass", "inertia", "arm_length", "c_f", "c_tau", "gravity"],
    },
    "CS_a0_Ted_6R": {
        "description": "coplanar star-shaped hexarotor, alternating cant +-alpha0",
        "n": 6,
        "params": ["mass", "inertia", "arm_length", "c_f", "c_tau", "alpha0", "gravity"],
    },
    "CS_a0b0_Ted_6R": {
        "description": "coplanar star-shaped hexarotor, alternating cant +-alpha0, dihedral beta0",
        "n": 6,
        "params": [
            "mass", "inertia", "arm_length", "c_f", "c_tau", "alpha0", "beta0", "gravity",
        ],
    },
}

# Use-case hexarotor (CS_a0b0_Ted_6R).
USECASE = {
    "mass": 3.5,
    "gravity": 9.81,
    "arm_length": 0.385,
    "c_f": 3.799e-05,
    "c_tau": 1.163e-06,
    "alpha0": 5 * math.pi / 36,
    "beta0": math.pi / 18,
    "inertia": np.diag([0.155, 0.147, 0.251]),
}
USECASE_INERTIA_PHYSICS = np.diag([0.081, 0.081, 0.162])


def build_preset(
    name: str,
    *,
    mass: float,
    inertia,
    arm_length: float,
    c_f: float,
    c_tau: float,
    alpha0: float = 0.0,
    beta0: float = 0.0,
    gravity: float = 9.81,
) -> PlatformModel:
    """Construct one of the named taxonomy presets.

    Rotor ``i`` (1-based) gets ``kappa = (-1)**i`` and, for the tilted
    hexarotors, ``alpha = (-1)**i * alpha0``.
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    if mass <= 0 or arm_length <= 0 or gravity <= 0:
        raise ValueError("mass, arm_length and gravity must be positive")
    if c_f < 0 or c_tau < 0:
        raise ValueError("c_f and c_tau must be nonnegative")
    if not -math.pi / 2 < alpha0 < math.pi / 2:
        raise ValueError("alpha0 must lie in (-pi/2, pi/2)")
    if not 0 <= beta0 < math.pi / 2:
        raise ValueError("beta0 must lie in [0, pi/2)")
    if name == "CS_4R" and (alpha0 or beta0):
        raise ValueError("CS_4R is zero-tilt; alpha0/beta0 not accepted")
    if name == "CS_a0_Ted_6R" and beta0:
        raise ValueError("CS_a0_Ted_6R has zero dihedral; beta0 not accepted")

    n = PRESETS[name]["n"]
    rotors = []
    for i in range(1, n + 1):
        sign = -1 if i % 2 else 1
        rotors.append(
            RotorSpec(
                gamma=(i - 1) * 2 * math.pi / n,
                delta=0.0,
                alpha=sign * alpha0,
                beta=beta0,
                kappa=sign,
                c_f=c_f,
                c_tau=c_tau,
            )
        )
    return PlatformModel(
        mass=mass,
        inertia=np.array(inertia, dtype=float),
        arm_length=arm_length,
        rotors=tuple(rotors),
        gravity=gravity,
        name=name,
    )


def usecase_hexarotor(inertia=None) -> PlatformModel:
    """The tilted hexarotor of the figure-eight use case (lumped inertia by default)."""
    params = dict(USECASE)
    if inertia is not None:
        params["inertia"] = inertia
    return build_preset("CS_a0b0_Ted_6R", **params)


# ---------------------------------------------------------------------------
# composite inertia

SHAPES = ("point", "cylinder", "cuboid", "rod")


@dataclass(frozen=True, eq=False)
class ComponentMass:
    """A rigid primitive in the body frame.

    ``dims``: point ``()``, cylinder ``(radius, height)`` about local z,
    cuboid ``(lx, ly, lz)``, rod ``(length,)`` along local x.
    """

    shape: str
    mass: float
    dims: tuple = ()
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.mass <= 0:
            raise ValueError("component mass must be positive")
        expected = {"point": 0, "cylinder": 2, "cuboid": 3, "rod": 1}[self.shape]
        if len(self.dims) != expected:
            raise ValueError(f"{self.shape} needs {expected} dimensions")
        if any(d <= 0 for d in self.dims):
            raise ValueError("component dimensions must be positive")
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        if not is_rotation(self.rotation):
            raise ValueError("component rotation is not a proper rotation")

    def local_inertia(self) -> np.ndarray:
        m = self.mass
        if self.shape == "point":
            return np.zeros((3, 3))
        if self.shape == "cylinder":
            r, h = self.dims
            ixx = m * (3 * r * r + h * h) / 12
            return np.diag([ixx, ixx, m * r * r / 2])
        if self.shape == "cuboid":
            a, b, c = self.dims
            return np.diag([b * b + c * c, a * a + c * c, a * a + b * b]) * m / 12
        (L,) = self.dims
        return np.diag([0.0, m * L * L / 12, m * L * L / 12])


def composite_inertia(components) -> tuple[float, np.ndarray, np.ndarray]:
    """Total mass, center of mass and inertia about the center of mass."""
    components = list(components)
    if not components:
        raise ValueError("need at least one component")
    mass = sum(c.mass for c in components)
    com = sum(c.mass * c.position for c in components) / mass
    J = np.zeros((3, 3))
    for c in components:
        d = c.position - com
        J += c.rotation @ c.local_inertia() @ c.rotation.T
        J += c.mass * (d @ d * np.eye(3) - np.outer(d, d))
    return mass, com, 0.5 * (J + J.T)


def hexarotor_mockup(
    mass: float = 3.5,
    arm_length: float = 0.385,
    izz: float = 0.162,
    motor_mass: float = 0.12,
    arm_mass: float = 0.08,
    hub_height: float = 0.03,
) -> list[ComponentMass]:
    """Flat hexarotor: central disc, six arm rods and six point motors.

    The hub radius is solved so the yaw inertia equals ``izz``; a flat body
    then has roll/pitch inertia close to ``izz / 2``.
    """
    hub_mass = mass - 6 * (motor_mass + arm_mass)
    if hub_mass <= 0:
        raise ValueError("motor and arm masses exceed the total mass")

    def build(r_hub):
        parts = [
            ComponentMass("cylinder", hub_mass, (r_hub, hub_height)),
        ]
        length = arm_length - r_hub
        for i in range(6):
            R = rot_z(i * math.pi / 3)
            parts.append(
                ComponentMass(
                    "rod", arm_mass, (length,),
                    position=R @ E1 * (r_hub + length / 2), rotation=R,
                )
            )
            parts.append(ComponentMass("point", motor_mass, position=R @ E1 * arm_length))
        return parts

    r_hub = brentq(
        lambda r: composite_inertia(build(r))[2][2, 2] - izz, 1e-3, 0.999 * arm_length
    )
    return build(r_hub)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    issues: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, path: str, message: str):
        self.issues.append((path, message))

    def __str__(self):
        if self.ok:
            return "ok"
        return "\n".join(f"{p}: {m}" for p, m in self.issues)


def validate(model: PlatformModel) -> ValidationReport:
    """Collect every violated platform invariant; empty report means usable."""
    rep = ValidationReport()
    if not N_MIN <= model.n <= N_MAX:
        rep.add("rotors", f"rotor count {model.n} outside n >= {N_MIN}, n <= {N_MAX}")
    if not (np.isfinite(model.mass) and model.mass > 0):
        rep.add("platform.mass", "mass must be positive")
    if not (np.isfinite(model.gravity) and model.gravity > 0):
        rep.add("platform.gravity", "gravity must be positive")
    if not (np.isfinite(model.arm_length) and model.arm_length > 0):
        rep.add("platform.arm_length", "arm length must be positive")
    J = model.inertia
    if not np.all(np.isfinite(J)):
        rep.add("platform.inertia", "inertia has non-finite entries")
    else:
        if np.max(np.abs(J - J.T)) > 1e-12:
            rep.add("platform.inertia", "inertia not symmetric")
        if np.min(np.linalg.eigvalsh(0.5 * (J + J.T))) <= 0:
            rep.add("platform.inertia", "inertia not positive definite")

    tm = model.tilt_mode
    for flags, label in ((tm.tiltable_cant, "tiltable_cant"), (tm.tiltable_dihedral, "tiltable_dihedral")):
        if flags and len(flags) != model.n:
            rep.add(f"tilt_mode.{label}", f"expected {model.n} flags, got {len(flags)}")

    for i, r in enumerate(model.rotors):
        p = f"rotors[{i}]"
        if not 0 <= r.gamma < 2 * math.pi:
            rep.add(f"{p}.gamma", "azimuth outside [0, 2pi)")
        if not 0 <= r.delta < math.pi / 2:
            rep.add(f"{p}.delta", "elevation outside [0, pi/2)")
        if not -math.pi / 2 < r.alpha < math.pi / 2:
            rep.add(f"{p}.alpha", "cant outside (-pi/2, pi/2)")
        if not 0 <= r.beta < math.pi / 2:
            rep.add(f"{p}.beta", "dihedral outside [0, pi/2)")
        if r.kappa not in (-1, 1):
            rep.add(f"{p}.kappa", "kappa must be -1 or +1")
        if not (np.isfinite(r.c_f) and r.c_f >= 0):
            rep.add(f"{p}.c_f", "c_f must be nonnegative")
        if not (np.isfinite(r.c_tau) and r.c_tau >= 0):
            rep.add(f"{p}.c_tau", "c_tau must be nonnegative")
    return rep


# ---------------------------------------------------------------------------
# platform definition document


def _matrix(value, name: str) -> np.ndarray:
    a = np.array(value, dtype=float)
    if a.shape == (9,):
        a = a.reshape(3, 3)
    elif a.shape == (3,):
        a = np.diag(a)
    if a.shape != (3, 3):
        raise ValueError(f"{name}: expected 3x3, 9 row-major values or a diagonal 3-vector")
    return a


def component_from_dict(d: dict) -> ComponentMass:
    return ComponentMass(
        shape=d["shape"],
        mass=float(d["mass"]),
        dims=tuple(float(x) for x in d.get("dims", ())),
        position=np.array(d.get("position", [0.0, 0.0, 0.0]), dtype=float),
        rotation=_matrix(d["rotation"], "rotation") if "rotation" in d else np.eye(3),
    )


def platform_from_dict(doc: dict) -> PlatformModel:
    """Build a model from the ``platform``/``rotors``/``preset`` sections.

    A ``preset`` section expands into rotors; ``platform`` supplies mass,
    inertia (3x3, row-major 9-list or diagonal), arm_length and gravity.
    """
    plat = doc.get("platform")
    if plat is None:
        raise ValueError("missing 'platform' section")
    try:
        mass = float(plat["mass"])
        inertia = _matrix(plat["inertia"], "platform.inertia")
        arm_length = float(plat["arm_length"])
    except KeyError as exc:
        raise ValueError(f"platform section is missing {exc.args[0]!r}") from None
    gravity = float(plat.get("gravity", 9.81))

    preset = doc.get("preset")
    if preset is not None:
        preset = dict(preset)
        pid = preset.pop("id", None)
        if pid is None:
            raise ValueError("preset section needs an 'id'")
        known = {"alpha0", "beta0", "c_f", "c_tau"}
        extra = set(preset) - known
        if extra:
            raise ValueError(f"unknown preset parameters: {sorted(extra)}")
        if "c_f" not in preset or "c_tau" not in preset:
            raise ValueError("preset section needs 'c_f' and 'c_tau'")
        model = build_preset(
            pid,
            mass=mass,
            inertia=inertia,
            arm_length=arm_length,
            gravity=gravity,
            **{k: float(v) for k, v in preset.items()},
        )
        rotors = model.rotors
        name = pid
    else:
        if "rotors" not in doc:
            raise ValueError("need either a 'preset' or a 'rotors' section")
        rotors = []
        for i, r in enumerate(doc["rotors"]):
            try:
                rotors.append(
                    RotorSpec(
                        gamma=float(r["gamma"]),
                        delta=float(r.get("delta", 0.0)),
                        alpha=float(r.get("alpha", 0.0)),
                        beta=float(r.get("beta", 0.0)),
                        kappa=int(r["kappa"]),
                        c_f=float(r["c_f"]),
                        c_tau=float(r["c_tau"]),
                    )
                )
            except KeyError as exc:
                raise ValueError(f"rotors[{i}] is missing {exc.args[0]!r}") from None
        name = plat.get("name", "custom")

    tm = doc.get("tilt_mode")
    tilt_mode = FIXED
    if tm:
        tilt_mode = TiltMode(
            tuple(bool(x) for x in tm.get("tiltable_cant", ())),
            tuple(bool(x) for x in tm.get("tiltable_dihedral", ())),
        )
    return PlatformModel(
        mass=mass,
        inertia=inertia,
        arm_length=arm_length,
        rotors=tuple(rotors),
        gravity=gravity,
        tilt_mode=tilt_mode,
        name=name,
    )
