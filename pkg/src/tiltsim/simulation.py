"""Fixed-step closed-loop simulation harness and the dual-layer scenario."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .allocation import AllocationMatrices, build_allocation, solve_hover
from .control import ControllerGains, GeometricController, compute_metric_errors
from .dynamics import Analytical, DynamicsLayer, Physics, RigidBodyState, step
from .platform import PlatformModel
from .simlog import SimLog
from .trajectory import Maneuver, ManeuverPlan

DT_MAX = 0.01


class SimulationDiverged(RuntimeError):
    def __init__(self, t: float, what: str = "state"):
        super().__init__(f"simulation diverged at t = {t:.6g} s (non-finite {what})")
        self.t = t


@dataclass(frozen=True, eq=False)
class SimConfig:
    """Step size, horizon, fidelity layer and initial conditions.

    ``initial_rotor_rates=None`` starts the rotors at the level-hover rates
    of the simulated platform (zero if hover is infeasible).
    """

    dt: float = 1e-3
    duration: float = 45.0
    layer: DynamicsLayer = field(default_factory=Analytical)
    initial_state: RigidBodyState = field(default_factory=RigidBodyState)
    initial_rotor_rates: np.ndarray | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if self.dt > self.duration:
            raise ValueError("dt must not exceed duration")
        if self.dt > DT_MAX:
            raise ValueError(f"dt = {self.dt} exceeds the dt guard of {DT_MAX} s")
        steps = self.duration / self.dt
        if abs(steps - round(steps)) > 1e-6:
            raise ValueError("duration must be an integer multiple of dt")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


def hover_rotor_rates(model: PlatformModel, alloc: AllocationMatrices | None = None) -> np.ndarray:
    alloc = alloc if alloc is not None else build_allocation(model)
    u, res = solve_hover(alloc, model)
    if res > 1e-8:
        return np.zeros(model.n)
    return np.sqrt(u)


def simulate(
    model: PlatformModel,
    config: SimConfig,
    controller,
    reference,
    alloc: AllocationMatrices | None = None,
) -> SimLog:
    """Run the fixed-step loop and return one log row per time step.

    ``reference(t)`` returns a :class:`TrajectorySample`; ``controller(t,
    state, ref)`` returns an object with ``u``, ``omega_cmd`` and
    ``clamp_active``. The analytical layer applies ``u``, the physics layer
    applies ``omega_cmd`` through the actuator lag.
    """
    alloc = alloc if alloc is not None else build_allocation(model)
    n = model.n
    N = config.steps
    dt = config.dt
    layer = config.layer
    physics = isinstance(layer, Physics)

    state = config.initial_state
    if config.initial_rotor_rates is None:
        act = hover_rotor_rates(model, alloc)
    else:
        act = np.asarray(config.initial_rotor_rates, dtype=float).copy()
        if act.shape != (n,):
            raise ValueError(f"expected {n} initial rotor rates")

    log = SimLog.empty(N + 1, n)
    for k in range(N + 1):
        t = k * dt
        ref = reference(t)
        out = controller(t, state, ref)
        e_p, e_R = compute_metric_errors(state, ref)
        log.t[k] = t
        log.p[k] = state.p
        log.R[k] = state.R
        log.v[k] = state.v
        log.omega[k] = state.omega
        log.e_p[k] = e_p
        log.e_R[k] = e_R
        log.u[k] = out.u
        log.omega_rotor[k] = act
        log.omega_cmd[k] = out.omega_cmd
        log.clamp_active[k] = out.clamp_active
        if k == N:
            break
        command = out.omega_cmd if physics else out.u
        if not math.isfinite(command.sum()):
            raise SimulationDiverged(t, "command")
        state, act = step(model, state, act, command, layer, dt, alloc)
        if not state.is_finite():
            raise SimulationDiverged(t + dt)
    return log


# ---------------------------------------------------------------------------
# dual-layer scenario


@dataclass(eq=False)
class Scenario:
    """Everything needed to run one or both fidelity layers.

    ``model`` carries the lumped inertia and is what the controller and the
    analytical plant use; ``physics_inertia`` replaces it for the physics
    plant.
    """

    model: PlatformModel
    physics_inertia: np.ndarray
    gains: ControllerGains = field(default_factory=ControllerGains)
    plan: ManeuverPlan = field(default_factory=ManeuverPlan)
    dt: float = 1e-3
    duration: float | None = None
    tau_m: float = 0.05
    initial_state: RigidBodyState = field(default_factory=RigidBodyState)
    initial_rotor_rates: np.ndarray | None = None

    def __post_init__(self):
        Physics(self.tau_m)  # validates tau_m

    @property
    def horizon(self) -> float:
        return self.plan.total if self.duration is None else self.duration

    def plant(self, layer: str) -> PlatformModel:
        if layer == "physics":
            return self.model.with_inertia(self.physics_inertia)
        return self.model

    def layer(self, layer: str) -> DynamicsLayer:
        if layer == "physics":
            return Physics(self.tau_m)
        if layer == "analytical":
            return Analytical()
        raise ValueError(f"unknown layer {layer!r}")

    def sim_config(self, layer: str) -> SimConfig:
        return SimConfig(
            dt=self.dt,
            duration=self.horizon,
            layer=self.layer(layer),
            initial_state=self.initial_state,
            initial_rotor_rates=self.initial_rotor_rates,
        )

    def describe(self, layer: str) -> dict:
        plant = self.plant(layer)
        return {
            "layer": layer,
            "plant_inertia": plant.inertia.tolist(),
            "controller_inertia": self.model.inertia.tolist(),
            "command": "omega_cmd (per-rotor, first-order lag)" if layer == "physics" else "u (instantaneous)",
            "tau_m": self.tau_m if layer == "physics" else None,
            "dt": self.dt,
            "duration": self.horizon,
            "initial_state": {
                "p": self.initial_state.p.tolist(),
                "R": self.initial_state.R.tolist(),
                "v": self.initial_state.v.tolist(),
                "omega": self.initial_state.omega.tolist(),
            },
            "plan": {
                "takeoff_duration": self.plan.takeoff_duration,
                "track_duration": self.plan.track_duration,
                "landing_duration": self.plan.landing_duration,
                "altitude": self.plan.altitude,
                "amplitude": self.plan.amplitude,
                "xy_transition": self.plan.xy_transition,
            },
        }


def run_layer(scenario: Scenario, layer: str) -> SimLog:
    plant = scenario.plant(layer)
    config = scenario.sim_config(layer)
    controller = GeometricController(scenario.model, scenario.gains, dt=scenario.dt)
    reference = Maneuver(scenario.plan)
    if config.duration > scenario.plan.total + 1e-9:
        raise ValueError("simulation horizon exceeds the maneuver length")
    return simulate(plant, config, controller, reference, alloc=build_allocation(plant))


def usecase_scenario(**overrides) -> Scenario:
    """Tilted hexarotor figure-eight case with table gains."""
    from .platform import USECASE_INERTIA_PHYSICS, usecase_hexarotor

    params = dict(
        model=usecase_hexarotor(),
        physics_inertia=USECASE_INERTIA_PHYSICS.copy(),
    )
    params.update(overrides)
    return Scenario(**params)

