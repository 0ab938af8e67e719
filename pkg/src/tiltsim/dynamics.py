"""Newton-Euler rigid-body dynamics with two actuator fidelity layers.

Attitude is propagated on SO(3) with a Munthe-Kaas Runge-Kutta 4 step: the
stages live in the Lie algebra around the current attitude, the increment is
mapped back with :func:`exp_so3`, and the result is re-projected onto SO(3).
Translational and angular-velocity states use the same classical RK4
weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import AllocationMatrices, build_allocation
from .platform import PlatformModel
from .so3 import exp_so3, project_to_so3


@dataclass(frozen=True, eq=False)
class RigidBodyState:
    p: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world [m]
    R: np.ndarray = field(default_factory=lambda: np.eye(3))  # body -> world
    v: np.ndarray = field(default_factory=lambda: np.zeros(3))  # world [m/s]
    omega: np.ndarray = field(default_factory=lambda: np.zeros(3))  # body [rad/s]

    def is_finite(self) -> bool:
        # any nan/inf entry propagates into the sum
        return math.isfinite(
            self.p.sum() + self.R.sum() + self.v.sum() + self.omega.sum()
        )


@dataclass(frozen=True)
class Analytical:
    """Ideal actuators: commanded inputs act instantaneously."""

    name = "analytical"


@dataclass(frozen=True)
class Physics:
    """First-order spin-rate lag with time constant ``tau_m`` [s]."""

    tau_m: float = 0.05
    name = "physics"

    def __post_init__(self):
        if not self.tau_m > 0:
            raise ValueError("actuator time constant tau_m must be positive")


DynamicsLayer = Analytical | Physics


def _cross(a, b):
    a0, a1, a2 = a.tolist()
    b0, b1, b2 = b.tolist()
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def _accelerations(R, w, u, F, M, J, Jinv, mass, g):
    vdot = (R @ (F @ u)) / mass
    vdot[2] -= g
    wdot = Jinv @ (M @ u - _cross(w, J @ w))
    return vdot, wdot


def state_derivative(
    model: PlatformModel,
    state: RigidBodyState,
    u,
    alloc: AllocationMatrices | None = None,
    tilt_angles=None,
):
    """Return ``(p_dot, omega, v_dot, omega_dot)``.

    ``omega`` (body frame) is the attitude rate in the sense ``R_dot = R hat(omega)``.
    """
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("control inputs must be nonnegative")
    if alloc is None:
        alloc = build_allocation(model, tilt_angles)
    vdot, wdot = _accelerations(
        state.R, state.omega, u, alloc.F, alloc.M,
        model.inertia, model.inertia_inv, model.mass, model.gravity,
    )
    return state.v.copy(), state.omega.copy(), vdot, wdot


def _dexpinv(theta, w):
    # right-trivialized inverse differential of exp, truncated at 2nd order
    tw = _cross(theta, w)
    return w + 0.5 * tw + _cross(theta, tw) / 12.0


def rotor_rates_at(omega0, omega_cmd, tau_m: float, s: float):
    """Closed-form first-order lag response after time ``s``."""
    return omega_cmd + (omega0 - omega_cmd) * math.exp(-s / tau_m)


def step(
    model: PlatformModel,
    state: RigidBodyState,
    actuators,
    command,
    layer: DynamicsLayer,
    dt: float,
    alloc: AllocationMatrices | None = None,
):
    """Advance one fixed step.

    ``command`` is the input vector ``u`` for the analytical layer and the
    per-rotor spin-rate command for the physics layer. Returns the new rigid
    body state and the rotor spin rates in effect at the end of the step.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if alloc is None:
        alloc = build_allocation(model)
    command = np.maximum(np.asarray(command, dtype=float), 0.0)

    if isinstance(layer, Physics):
        w0 = np.maximum(np.asarray(actuators, dtype=float), 0.0)
        tau = layer.tau_m
        u1 = w0 * w0
        w_half = rotor_rates_at(w0, command, tau, 0.5 * dt)
        u2 = w_half * w_half
        w_end = rotor_rates_at(w0, command, tau, dt)
        u4 = w_end * w_end
        inputs = (u1, u2, u2, u4)
        actuators_new = np.maximum(w_end, 0.0)
    else:
        inputs = (command,) * 4
        actuators_new = np.sqrt(command)

    F, M = alloc.F, alloc.M
    J, Jinv = model.inertia, model.inertia_inv
    m, g = model.mass, model.gravity
    p0, R0, v0, w0b = state.p, state.R, state.v, state.omega
    h = dt
    half = 0.5 * h

    # stage 1
    a1, al1 = _accelerations(R0, w0b, inputs[0], F, M, J, Jinv, m, g)
    kp1, kth1 = v0, w0b
    # stage 2
    th2 = half * kth1
    R2 = R0 @ exp_so3(th2)
    v2 = v0 + half * a1
    w2 = w0b + half * al1
    a2, al2 = _accelerations(R2, w2, inputs[1], F, M, J, Jinv, m, g)
    kp2, kth2 = v2, _dexpinv(th2, w2)
    # stage 3
    th3 = half * kth2
    R3 = R0 @ exp_so3(th3)
    v3 = v0 + half * a2
    w3 = w0b + half * al2
    a3, al3 = _accelerations(R3, w3, inputs[2], F, M, J, Jinv, m, g)
    kp3, kth3 = v3, _dexpinv(th3, w3)
    # stage 4
    th4 = h * kth3
    R4 = R0 @ exp_so3(th4)
    v4 = v0 + h * a3
    w4 = w0b + h * al3
    a4, al4 = _accelerations(R4, w4, inputs[3], F, M, J, Jinv, m, g)
    kp4, kth4 = v4, _dexpinv(th4, w4)

    sixth = h / 6.0
    p = p0 + sixth * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4)
    v = v0 + sixth * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    w = w0b + sixth * (al1 + 2.0 * al2 + 2.0 * al3 + al4)
    theta = sixth * (kth1 + 2.0 * kth2 + 2.0 * kth3 + kth4)
    R = R0 @ exp_so3(theta)
    if math.isfinite(R.sum()):
        R = project_to_so3(R)
    # a non-finite attitude is passed through so the caller can report divergence
    return RigidBodyState(p, R, v, w), actuators_new
