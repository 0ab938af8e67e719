import math

import numpy as np
import pytest

from tiltsim.allocation import build_allocation, solve_hover
from tiltsim.dynamics import (
    Analytical,
    Physics,
    RigidBodyState,
    rotor_rates_at,
    state_derivative,
    step,
)
from tiltsim.platform import PlatformModel, usecase_hexarotor
from tiltsim.so3 import exp_so3, is_rotation


@pytest.fixture(scope="module")
def hexa():
    return usecase_hexarotor()


@pytest.fixture(scope="module")
def alloc(hexa):
    return build_allocation(hexa)


def _run(model, state, act, cmd, layer, dt, steps, alloc=None):
    for _ in range(steps):
        state, act = step(model, state, act, cmd, layer, dt, alloc)
    return state, act


def test_free_fall_derivative(hexa):
    _, _, vdot, wdot = state_derivative(hexa, RigidBodyState(), np.zeros(6))
    np.testing.assert_allclose(vdot, [0, 0, -9.81])
    np.testing.assert_array_equal(wdot, 0)


def test_hover_derivative(hexa, alloc):
    u, _ = solve_hover(alloc, hexa)
    _, _, vdot, wdot = state_derivative(hexa, RigidBodyState(), u, alloc)
    np.testing.assert_allclose(vdot, 0, atol=1e-12)
    np.testing.assert_allclose(wdot, 0, atol=1e-12)


def test_principal_axis_spin_has_no_gyroscopic_term(hexa):
    s = RigidBodyState(omega=np.array([0.0, 0.0, 3.0]))
    _, w, _, wdot = state_derivative(hexa, s, np.zeros(6))
    np.testing.assert_array_equal(w, [0, 0, 3])
    np.testing.assert_array_equal(wdot, 0)


def test_negative_inputs_rejected(hexa):
    with pytest.raises(ValueError):
        state_derivative(hexa, RigidBodyState(), -np.ones(6))


def test_derivative_matches_ballistic_finite_difference(hexa):
    v0 = np.array([1.0, -2.0, 3.0])
    g = hexa.gravity
    t, h = 0.37, 1e-4

    def p(t):
        return v0 * t - 0.5 * g * t * t * np.array([0, 0, 1.0])

    s = RigidBodyState(p=p(t), v=v0 - g * t * np.array([0, 0, 1.0]))
    pdot, _, vdot, _ = state_derivative(hexa, s, np.zeros(6))
    fd_v = (p(t + h) - p(t - h)) / (2 * h)
    fd_a = (p(t + h) - 2 * p(t) + p(t - h)) / (h * h)
    np.testing.assert_allclose(pdot, fd_v, rtol=1e-6)
    np.testing.assert_allclose(vdot, fd_a, rtol=1e-6, atol=1e-6 * g)


@pytest.mark.parametrize("layer", [Analytical(), Physics(0.05)])
def test_ballistic_closed_form(hexa, alloc, layer):
    s0 = RigidBodyState(v=np.array([0.5, 0.0, 2.0]))
    s, _ = _run(hexa, s0, np.zeros(6), np.zeros(6), layer, 1e-3, 1000, alloc)
    np.testing.assert_allclose(s.p, [0.5, 0.0, 2.0 - 0.5 * 9.81], atol=1e-9)
    np.testing.assert_allclose(s.v, [0.5, 0.0, 2.0 - 9.81], atol=1e-9)


def test_hover_equilibrium(hexa, alloc):
    u, _ = solve_hover(alloc, hexa)
    s0 = RigidBodyState(p=np.array([0.0, 0.0, 1.0]))
    s, act = _run(hexa, s0, np.sqrt(u), u, Analytical(), 1e-3, 10_000, alloc)
    assert np.linalg.norm(s.p - s0.p) <= 1e-6
    np.testing.assert_allclose(act, np.sqrt(u))


def test_actuator_lag_closed_form(hexa, alloc):
    w0 = np.full(6, 300.0)
    cmd = np.linspace(350.0, 450.0, 6)
    tau, dt = 0.05, 1e-3
    act = w0
    s = RigidBodyState()
    for k in range(1, 201):
        s, act = step(hexa, s, act, cmd, Physics(tau), dt, alloc)
        expected = cmd + (w0 - cmd) * math.exp(-k * dt / tau)
        np.testing.assert_allclose(act, expected, rtol=0, atol=1e-9)
    np.testing.assert_allclose(rotor_rates_at(w0, cmd, tau, 0.0), w0)


def test_actuators_clamped_nonnegative(hexa, alloc):
    _, act = step(hexa, RigidBodyState(), np.full(6, 10.0), -np.ones(6), Physics(0.05), 1e-3, alloc)
    assert np.all(act >= 0)
    _, act = step(hexa, RigidBodyState(), np.zeros(6), -np.ones(6), Analytical(), 1e-3, alloc)
    np.testing.assert_array_equal(act, 0)


def test_physics_layer_validation():
    with pytest.raises(ValueError):
        Physics(0.0)
    with pytest.raises(ValueError):
        step(usecase_hexarotor(), RigidBodyState(), np.zeros(6), np.zeros(6), Analytical(), 0.0)


def test_torque_free_conservation():
    J = np.array([[0.155, 0.01, -0.005], [0.01, 0.147, 0.002], [-0.005, 0.002, 0.251]])
    base = usecase_hexarotor()
    m = PlatformModel(base.mass, J, base.arm_length, base.rotors, gravity=0.0)
    A = build_allocation(m)
    s = RigidBodyState(R=exp_so3([0.3, -0.2, 0.1]), omega=np.array([1.2, -0.8, 2.5]))
    L0 = s.R @ J @ s.omega
    E0 = 0.5 * s.omega @ J @ s.omega
    for _ in range(10_000):
        s, _ = step(m, s, np.zeros(6), np.zeros(6), Analytical(), 1e-3, A)
        assert is_rotation(s.R, 1e-9)
    L = s.R @ J @ s.omega
    E = 0.5 * s.omega @ J @ s.omega
    assert np.linalg.norm(L - L0) / np.linalg.norm(L0) <= 1e-7
    assert abs(E - E0) / E0 <= 1e-7


def _order_ratio(layer, act0):
    m = usecase_hexarotor()
    A = build_allocation(m)
    rng = np.random.default_rng(0)
    u = 1.7e5 * (1 + 0.3 * rng.uniform(-1, 1, 6))
    cmd = u if isinstance(layer, Analytical) else np.sqrt(u)
    s0 = RigidBodyState(omega=np.array([1.0, -0.7, 2.0]), v=np.array([0.3, 0.0, 0.1]))

    def end_state(dt):
        s, _ = _run(m, s0, act0(u), cmd, layer, dt, int(round(1.0 / dt)), A)
        return np.concatenate([s.p, s.v, s.omega, s.R.ravel()])

    ref = end_state(1e-4)
    e1 = np.linalg.norm(end_state(0.02) - ref)
    e2 = np.linalg.norm(end_state(0.01) - ref)
    return e1 / e2


def test_fourth_order_convergence():
    ratio = _order_ratio(Analytical(), np.sqrt)
    assert 12 <= ratio <= 20


def test_fourth_order_convergence_with_lag():
    ratio = _order_ratio(Physics(0.05), lambda u: 0.8 * np.sqrt(u))
    assert 12 <= ratio <= 20


def test_state_is_finite_check():
    assert RigidBodyState().is_finite()
    assert not RigidBodyState(v=np.array([0.0, np.nan, 0.0])).is_finite()
    assert not RigidBodyState(p=np.array([np.inf, 0.0, 0.0])).is_finite()
