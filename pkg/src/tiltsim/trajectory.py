"""Reference maneuver: quintic takeoff, figure-eight track, quintic landing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

XY_TRANSITIONS = ("hold", "blend")


@dataclass(frozen=True, eq=False)
class TrajectorySample:
    t: float
    p_r: np.ndarray
    v_r: np.ndarray
    a_r: np.ndarray
    R_r: np.ndarray = field(default_factory=lambda: np.eye(3))
    omega_r: np.ndarray = field(default_factory=lambda: np.zeros(3))


@dataclass(frozen=True)
class ManeuverPlan:
    """Phase durations [s], altitude and figure-eight amplitude [m].

    ``xy_transition`` chooses how the horizontal reference behaves during
    takeoff and landing. ``"blend"`` holds (x, y) at the figure-eight
    start/end point except for the ``xy_blend_duration`` seconds adjacent to
    the track phase, where quintics match the figure-eight position,
    velocity and acceleration, so the whole reference is C2. ``"hold"``
    never leaves the start/end point, so the horizontal velocity steps at
    the phase switches.
    """

    takeoff_duration: float = 8.0
    track_duration: float = 29.0
    landing_duration: float = 8.0
    altitude: float = 1.0
    amplitude: float = 1.0
    xy_transition: str = "blend"
    xy_blend_duration: float = 8.0

    def __post_init__(self):
        for name in ("takeoff_duration", "track_duration", "landing_duration"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.xy_transition not in XY_TRANSITIONS:
            raise ValueError(f"xy_transition must be one of {XY_TRANSITIONS}")
        if not 0 < self.xy_blend_duration <= min(self.takeoff_duration, self.landing_duration):
            raise ValueError("xy_blend_duration must lie in (0, min(takeoff, landing)]")

    @property
    def total(self) -> float:
        return self.takeoff_duration + self.track_duration + self.landing_duration

    @property
    def phase_switches(self) -> tuple[float, float, float]:
        """Start of takeoff, takeoff -> track, track -> landing."""
        return (0.0, self.takeoff_duration, self.takeoff_duration + self.track_duration)


USECASE_PLAN = ManeuverPlan()


def figure_eight(t_rel: float, plan: ManeuverPlan = USECASE_PLAN) -> TrajectorySample:
    """1:2 Lissajous figure-eight at constant altitude, level attitude."""
    A = plan.amplitude
    w1 = math.pi / 15
    w2 = 2 * math.pi / 15
    s1, c1 = math.sin(w1 * t_rel), math.cos(w1 * t_rel)
    s2, c2 = math.sin(w2 * t_rel), math.cos(w2 * t_rel)
    return TrajectorySample(
        t=t_rel,
        p_r=np.array([A * s1, A * s2, plan.altitude]),
        v_r=np.array([A * w1 * c1, A * w2 * c2, 0.0]),
        a_r=np.array([-A * w1 * w1 * s1, -A * w2 * w2 * s2, 0.0]),
    )


def quintic(start, end, T: float):
    """Coefficients (low order first) matching position, velocity and
    acceleration at both ends of ``[0, T]``."""
    p0, v0, a0 = start
    p1, v1, a1 = end
    A = np.array(
        [
            [T**3, T**4, T**5],
            [3 * T**2, 4 * T**3, 5 * T**4],
            [6 * T, 12 * T**2, 20 * T**3],
        ]
    )
    b = np.array(
        [
            p1 - p0 - v0 * T - 0.5 * a0 * T * T,
            v1 - v0 - a0 * T,
            a1 - a0,
        ]
    )
    c345 = np.linalg.solve(A, b)
    return np.array([p0, v0, 0.5 * a0, *c345])


def eval_quintic(c, s: float) -> tuple[float, float, float]:
    p = c[0] + s * (c[1] + s * (c[2] + s * (c[3] + s * (c[4] + s * c[5]))))
    v = c[1] + s * (2 * c[2] + s * (3 * c[3] + s * (4 * c[4] + s * 5 * c[5])))
    a = 2 * c[2] + s * (6 * c[3] + s * (12 * c[4] + s * 20 * c[5]))
    return p, v, a


def _hold(value: float):
    return np.array([value, 0.0, 0.0, 0.0, 0.0, 0.0])


class Maneuver:
    """Callable reference ``t -> TrajectorySample`` over ``[0, plan.total]``."""

    def __init__(self, plan: ManeuverPlan = USECASE_PLAN):
        self.plan = plan
        T1, T2, T3 = plan.takeoff_duration, plan.track_duration, plan.landing_duration
        Tb = plan.xy_blend_duration
        start = figure_eight(0.0, plan)
        end = figure_eight(T2, plan)
        self._z_up = quintic((0.0, 0.0, 0.0), (plan.altitude, 0.0, 0.0), T1)
        self._z_down = quintic((plan.altitude, 0.0, 0.0), (0.0, 0.0, 0.0), T3)
        self._xy_hold_start = [_hold(start.p_r[k]) for k in range(2)]
        self._xy_hold_end = [_hold(end.p_r[k]) for k in range(2)]
        if plan.xy_transition == "blend":
            self._xy_in = [
                quintic((start.p_r[k], 0.0, 0.0), (start.p_r[k], start.v_r[k], start.a_r[k]), Tb)
                for k in range(2)
            ]
            self._xy_out = [
                quintic((end.p_r[k], end.v_r[k], end.a_r[k]), (end.p_r[k], 0.0, 0.0), Tb)
                for k in range(2)
            ]
        else:
            self._xy_in = self._xy_hold_start
            self._xy_out = self._xy_hold_end

    def __call__(self, t: float) -> TrajectorySample:
        plan = self.plan
        if not 0.0 <= t <= plan.total + 1e-9:
            raise ValueError(f"t = {t} outside maneuver [0, {plan.total}]")
        T1 = plan.takeoff_duration
        T12 = T1 + plan.track_duration
        Tb = plan.xy_blend_duration
        if T1 <= t < T12:
            fe = figure_eight(t - T1, plan)
            return TrajectorySample(t, fe.p_r, fe.v_r, fe.a_r)
        if t < T1:
            z = eval_quintic(self._z_up, t)
            s_xy = t - (T1 - Tb)
            xy = self._xy_in if s_xy >= 0 else self._xy_hold_start
        else:
            s = min(t - T12, plan.landing_duration)
            z = eval_quintic(self._z_down, s)
            s_xy = s
            xy = self._xy_out if s < Tb else self._xy_hold_end
        x = eval_quintic(xy[0], max(s_xy, 0.0))
        y = eval_quintic(xy[1], max(s_xy, 0.0))
        return TrajectorySample(
            t,
            np.array([x[0], y[0], z[0]]),
            np.array([x[1], y[1], z[1]]),
            np.array([x[2], y[2], z[2]]),
        )


def maneuver(t: float, plan: ManeuverPlan = USECASE_PLAN) -> TrajectorySample:
    return Maneuver(plan)(t)


def hover_reference(p) -> "callable":
    """Constant reference at position ``p`` with level attitude."""
    p = np.asarray(p, dtype=float)

    def ref(t):
        return TrajectorySample(t, p.copy(), np.zeros(3), np.zeros(3))

    return ref
