"""Geometric SE(3) tracking controller with integral action.

Errors are taken as reference minus actual, so all gains enter with a
positive sign. For platforms whose wrench map has rank 6 the body force is
assigned directly and the reference attitude is tracked; otherwise a
desired attitude is synthesized from the desired force direction (thrust
vectoring) and only the realizable part of the body force is requested.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .allocation import AllocationMatrices, Allocator, build_allocation, matrix_rank
from .dynamics import RigidBodyState, _cross
from .platform import PlatformModel
from .so3 import hat, skew_part, vee
from .trajectory import TrajectorySample

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ControllerGains:
    """Diagonal gain entries (x, y, z)."""

    K_p: np.ndarray = field(default_factory=lambda: np.array([7.0, 7.0, 60.0]))
    K_pi: np.ndarray = field(default_factory=lambda: np.array([3.0, 3.0, 5.0]))
    K_v: np.ndarray = field(default_factory=lambda: np.array([14.0, 14.0, 20.0]))
    K_R: np.ndarray = field(default_factory=lambda: np.array([90.0, 90.0, 90.0]))
    K_Ri: np.ndarray = field(default_factory=lambda: np.array([25.0, 25.0, 10.0]))
    K_omega: np.ndarray = field(default_factory=lambda: np.array([25.0, 25.0, 5.0]))

    def __post_init__(self):
        for f in fields(self):
            g = np.array(getattr(self, f.name), dtype=float)
            if g.shape == (3, 3):
                if np.any(g - np.diag(np.diag(g))):
                    raise ValueError(f"{f.name}: gain matrices must be diagonal")
                g = np.diag(g).copy()
            if g.shape != (3,):
                raise ValueError(f"{f.name}: expected 3 diagonal entries")
            if np.any(g <= 0) or not np.all(np.isfinite(g)):
                raise ValueError(f"{f.name}: gains must be positive")
            object.__setattr__(self, f.name, g)

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerGains":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown gain names: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name).tolist() for f in fields(self)}


@dataclass
class TrackingErrors:
    e_p: np.ndarray
    e_R: np.ndarray
    e_v: np.ndarray
    e_omega: np.ndarray
    integral_p: np.ndarray
    integral_R: np.ndarray


@dataclass
class ControlOutput:
    f_c: np.ndarray
    tau_c: np.ndarray
    u: np.ndarray
    omega_cmd: np.ndarray
    force_residual: np.ndarray
    torque_residual: np.ndarray
    clamp_active: bool = False
    R_cmd: np.ndarray | None = None
    errors: TrackingErrors | None = None
    integral_saturated: bool = False


def compute_metric_errors(state: RigidBodyState, ref: TrajectorySample):
    """Logged position and attitude errors.

    ``e_R`` is the vee of the antisymmetric part of ``R_r - R``; for
    ``R_r = I`` and ``R = rot_z(th)`` it is ``[0, 0, -sin th]``.
    """
    e_p = ref.p_r - state.p
    e_R = vee(skew_part(ref.R_r - state.R))
    return e_p, e_R


def attitude_error(R, R_cmd):
    """Control attitude error ``vee(R^T R_c - R_c^T R) / 2`` (reference minus actual)."""
    E = R.T @ R_cmd
    return 0.5 * np.array([E[2, 1] - E[1, 2], E[0, 2] - E[2, 0], E[1, 0] - E[0, 1]])


def thrust_vector_attitude(f_des, R_ref):
    """Attitude whose z axis is along ``f_des`` with heading taken from ``R_ref``."""
    b3 = f_des / np.linalg.norm(f_des)
    b2 = _cross(b3, R_ref[:, 0])
    nb2 = np.linalg.norm(b2)
    if nb2 < 1e-9:
        # heading axis parallel to thrust: fall back on the reference y axis
        b1 = _cross(R_ref[:, 1], b3)
        b1 /= np.linalg.norm(b1)
        b2 = _cross(b3, b1)
    else:
        b2 = b2 / nb2
        b1 = _cross(b2, b3)
    return np.column_stack([b1, b2, b3])


class GeometricController:
    """Stateful controller; one instance per simulation run.

    ``model`` is the controller's nominal platform (mass, inertia, rotor
    layout); it need not match the simulated plant.
    """

    def __init__(
        self,
        model: PlatformModel,
        gains: ControllerGains | None = None,
        dt: float = 1e-3,
        alloc: AllocationMatrices | None = None,
        position_clamp: float = 2.0,
        attitude_clamp: float = 1.0,
    ):
        self.model = model
        self.gains = gains or ControllerGains()
        self.dt = dt
        self.alloc = alloc if alloc is not None else build_allocation(model)
        self.allocator = Allocator(self.alloc)
        self.fully_actuated = matrix_rank(self.alloc.W) == 6
        F = self.alloc.F
        self._force_proj = F @ np.linalg.pinv(F, rcond=1e-9)
        self.position_clamp = position_clamp
        self.attitude_clamp = attitude_clamp
        self.reset()

    def reset(self):
        self.integral_p = np.zeros(3)
        self.integral_R = np.zeros(3)

    def __call__(self, t: float, state: RigidBodyState, ref: TrajectorySample) -> ControlOutput:
        return self.compute(state, ref)

    def compute(self, state: RigidBodyState, ref: TrajectorySample) -> ControlOutput:
        if not math.isfinite(ref.p_r.sum() + ref.v_r.sum() + ref.a_r.sum() + ref.R_r.sum()):
            raise ValueError(f"non-finite reference at t = {ref.t}")
        k = self.gains
        m, g = self.model.mass, self.model.gravity
        J = self.model.inertia
        dt = self.dt
        R, w = state.R, state.omega

        e_p = ref.p_r - state.p
        e_v = ref.v_r - state.v
        ip = self.integral_p + dt * e_p
        saturated = np.abs(ip).max() > self.position_clamp
        if saturated:
            ip = np.clip(ip, -self.position_clamp, self.position_clamp)
        self.integral_p = ip

        f_des = m * ref.a_r + k.K_p * e_p + k.K_pi * ip + k.K_v * e_v
        f_des[2] += m * g

        if self.fully_actuated:
            R_cmd = ref.R_r
            w_ref = ref.omega_r
            f_c = R.T @ f_des
        else:
            R_cmd = thrust_vector_attitude(f_des, ref.R_r)
            w_ref = np.zeros(3)
            f_c = self._force_proj @ (R.T @ f_des)

        e_R = attitude_error(R, R_cmd)
        RtRc = R.T @ R_cmd
        w_ref_body = RtRc @ w_ref
        e_w = w_ref_body - w
        iR = self.integral_R + dt * e_R
        if np.abs(iR).max() > self.attitude_clamp:
            iR = np.clip(iR, -self.attitude_clamp, self.attitude_clamp)
            saturated = True
        self.integral_R = iR
        if saturated:
            log.debug("integral clamp active at t=%.4f", ref.t)

        tau_c = k.K_R * e_R + k.K_Ri * iR + k.K_omega * e_w + _cross(w, J @ w)
        if w_ref.any():
            tau_c -= J @ (hat(w) @ w_ref_body)

        res = self.allocator(f_c, tau_c)
        return ControlOutput(
            f_c=f_c,
            tau_c=tau_c,
            u=res.u,
            omega_cmd=np.sqrt(res.u),
            force_residual=res.force_residual,
            torque_residual=res.torque_residual,
            clamp_active=res.clamped,
            R_cmd=R_cmd,
            errors=TrackingErrors(e_p, e_R, e_v, e_w, ip, iR),
            integral_saturated=saturated,
        )

