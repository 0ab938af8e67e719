import math

import numpy as np
import pytest

from tiltsim.allocation import analyze_actuation, build_allocation
from tiltsim.control import (
    ControllerGains,
    GeometricController,
    attitude_error,
    compute_metric_errors,
    thrust_vector_attitude,
)
from tiltsim.dynamics import RigidBodyState
from tiltsim.platform import USECASE, build_preset, usecase_hexarotor
from tiltsim.so3 import exp_so3, is_rotation, rot_x, rot_z
from tiltsim.trajectory import TrajectorySample

MG = 3.5 * 9.81


def ref_at(p, v=(0, 0, 0), a=(0, 0, 0), R=None, w=(0, 0, 0)):
    return TrajectorySample(
        0.0,
        np.array(p, dtype=float),
        np.array(v, dtype=float),
        np.array(a, dtype=float),
        np.eye(3) if R is None else R,
        np.array(w, dtype=float),
    )


@pytest.fixture
def hexa():
    return usecase_hexarotor()


@pytest.fixture
def quad():
    return build_preset(
        "CS_4R", mass=3.5, inertia=np.diag([0.155, 0.147, 0.251]),
        arm_length=0.385, c_f=USECASE["c_f"], c_tau=USECASE["c_tau"],
    )


def test_default_gains():
    g = ControllerGains()
    np.testing.assert_array_equal(g.K_p, [7, 7, 60])
    np.testing.assert_array_equal(g.K_pi, [3, 3, 5])
    np.testing.assert_array_equal(g.K_v, [14, 14, 20])
    np.testing.assert_array_equal(g.K_R, [90, 90, 90])
    np.testing.assert_array_equal(g.K_Ri, [25, 25, 10])
    np.testing.assert_array_equal(g.K_omega, [25, 25, 5])


def test_gain_validation():
    with pytest.raises(ValueError):
        ControllerGains(K_p=[1, 0, 1])
    with pytest.raises(ValueError):
        ControllerGains(K_v=[1, 2])
    with pytest.raises(ValueError):
        ControllerGains.from_dict({"K_d": [1, 1, 1]})
    with pytest.raises(ValueError, match="diagonal"):
        ControllerGains(K_R=np.ones((3, 3)))
    g = ControllerGains(K_R=np.diag([1.0, 2.0, 3.0]))
    np.testing.assert_array_equal(g.K_R, [1, 2, 3])
    assert ControllerGains.from_dict(g.to_dict()).to_dict() == g.to_dict()


def test_metric_errors():
    s = RigidBodyState(p=np.array([1.0, 2.0, 3.0]))
    e_p, e_R = compute_metric_errors(s, ref_at([1, 2, 3]))
    np.testing.assert_array_equal(e_p, 0)
    np.testing.assert_array_equal(e_R, 0)
    s = RigidBodyState(R=rot_z(0.1))
    e_p, e_R = compute_metric_errors(s, ref_at([0.2, -0.1, 0.0]))
    np.testing.assert_allclose(e_R, [0, 0, -math.sin(0.1)], atol=1e-16)
    np.testing.assert_allclose(e_p, [0.2, -0.1, 0.0])


def test_attitude_error_sign():
    # reference ahead of the body about z gives a positive error
    np.testing.assert_allclose(attitude_error(np.eye(3), rot_z(0.2)), [0, 0, math.sin(0.2)])
    np.testing.assert_array_equal(attitude_error(rot_x(0.4), rot_x(0.4)), 0)


def test_zero_error_hover_matches_certificate(hexa):
    ctl = GeometricController(hexa)
    out = ctl(0.0, RigidBodyState(p=np.array([0, 0, 1.0])), ref_at([0, 0, 1]))
    np.testing.assert_allclose(out.f_c, [0, 0, MG], atol=1e-12)
    np.testing.assert_allclose(out.tau_c, 0, atol=1e-15)
    hover = analyze_actuation(build_allocation(hexa), hexa).hover_input
    np.testing.assert_allclose(out.u, hover, rtol=1e-10)
    np.testing.assert_allclose(out.omega_cmd, np.sqrt(out.u))
    assert not out.clamp_active and not out.integral_saturated
    np.testing.assert_array_equal(out.R_cmd, np.eye(3))


def test_quad_hover(quad):
    ctl = GeometricController(quad)
    out = ctl(0.0, RigidBodyState(), ref_at([0, 0, 0]))
    np.testing.assert_allclose(out.u, MG / (4 * USECASE["c_f"]), rtol=1e-10)


def test_vertical_gain_action(hexa):
    d, dt = 0.05, 1e-3
    ctl = GeometricController(hexa, dt=dt)
    out = ctl(0.0, RigidBodyState(), ref_at([0, 0, d]))
    np.testing.assert_allclose(out.f_c, [0, 0, MG + (60 + 5 * dt) * d], atol=1e-12)
    np.testing.assert_allclose(out.errors.integral_p, [0, 0, dt * d])


def test_rate_feedforward(hexa):
    w = np.array([0.3, -0.2, 0.5])
    R = exp_so3([0.1, 0.2, -0.3])
    ctl = GeometricController(hexa)
    out = ctl(0.0, RigidBodyState(R=R, omega=w), ref_at([0, 0, 0], R=R, w=w))
    J = hexa.inertia
    np.testing.assert_allclose(out.errors.e_omega, 0, atol=1e-15)
    np.testing.assert_allclose(out.tau_c, np.cross(w, J @ w), atol=1e-14)


def test_anti_windup_bounds(hexa):
    ctl = GeometricController(hexa, dt=1e-2)
    state = RigidBodyState(R=rot_x(1.0))
    for _ in range(2000):
        out = ctl(0.0, state, ref_at([50, -50, 50]))
    assert np.all(np.abs(ctl.integral_p) <= 2.0)
    assert np.all(np.abs(ctl.integral_R) <= 1.0)
    np.testing.assert_allclose(ctl.integral_p, [2, -2, 2])
    assert out.integral_saturated
    ctl.reset()
    np.testing.assert_array_equal(ctl.integral_p, 0)


def test_non_finite_reference(hexa):
    ctl = GeometricController(hexa)
    with pytest.raises(ValueError):
        ctl(0.0, RigidBodyState(), ref_at([np.nan, 0, 0]))


def test_fully_actuated_tracks_reference_attitude(hexa):
    ctl = GeometricController(hexa)
    assert ctl.fully_actuated
    R_r = rot_z(0.3)
    out = ctl(0.0, RigidBodyState(), ref_at([1, 0, 0], a=[2, 0, 0], R=R_r))
    np.testing.assert_array_equal(out.R_cmd, R_r)


def test_underactuated_thrust_vectoring(quad):
    ctl = GeometricController(quad)
    assert not ctl.fully_actuated
    out = ctl(0.0, RigidBodyState(), ref_at([0, 0, 0], a=[2, 0, 0]))
    assert is_rotation(out.R_cmd)
    f_des = np.array([3.5 * 2, 0, MG])
    np.testing.assert_allclose(out.R_cmd[:, 2], f_des / np.linalg.norm(f_des), atol=1e-12)
    # only the body-z component is requested from the rotors
    np.testing.assert_allclose(out.f_c[:2], 0, atol=1e-12)


def test_thrust_vector_attitude_fallback():
    R = thrust_vector_attitude(np.array([5.0, 0, 0]), np.eye(3))
    assert is_rotation(R)
    np.testing.assert_allclose(R[:, 2], [1, 0, 0])


def _relabel_case(rng, Q):
    p = rng.normal(size=3)
    v = rng.normal(size=3)
    R = exp_so3(0.3 * rng.normal(size=3))
    w = rng.normal(size=3)
    p_r, v_r, a_r = rng.normal(size=(3, 3))
    R_r = exp_so3(0.2 * rng.normal(size=3))
    base = (RigidBodyState(p, R, v, w), ref_at(p_r, v_r, a_r, R=R_r))
    # same motion, body axes turned by Q
    turned = (RigidBodyState(p, R @ Q.T, v, Q @ w), ref_at(p_r, v_r, a_r, R=R_r @ Q.T))
    return base, turned


def test_yaw_relabel_equivariance():
    # with alternating cant, a turn of 2 pi / 3 maps rotor i onto rotor i + 2
    model = usecase_hexarotor(inertia=np.diag([0.081, 0.081, 0.162]))
    Q = rot_z(2 * math.pi / 3)
    rng = np.random.default_rng(4)
    c1, c2 = GeometricController(model), GeometricController(model)
    for _ in range(50):
        (s, r), (s2, r2) = _relabel_case(rng, Q)
        u = c1(0.0, s, r).u
        u2 = c2(0.0, s2, r2).u
        np.testing.assert_allclose(u2, np.roll(u, 2), rtol=1e-8, atol=1e-8 * np.abs(u).max())
