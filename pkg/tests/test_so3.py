import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tiltsim.so3 import (
    E1,
    E3,
    exp_so3,
    hat,
    is_rotation,
    project_to_so3,
    rot_x,
    rot_y,
    rot_z,
    skew_part,
    vee,
)

finite = st.floats(-10, 10, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def _expm_series(A, terms=40):
    """Matrix exponential by truncated power series (test oracle)."""
    out = np.eye(3)
    term = np.eye(3)
    for k in range(1, terms):
        term = term @ A / k
        out = out + term
    return out


def test_hat_examples():
    np.testing.assert_array_equal(hat([0, 0, 0]), np.zeros((3, 3)))
    np.testing.assert_array_equal(hat([0, 0, 1]) @ E1, [0, 1, 0])
    S = hat([1, 2, 3])
    np.testing.assert_array_equal(S.T, -S)


def test_vee_examples():
    np.testing.assert_array_equal(vee(hat([1, 2, 3])), [1, 2, 3])
    np.testing.assert_array_equal(vee(np.zeros((3, 3))), np.zeros(3))
    R = rot_z(0.1)
    np.testing.assert_allclose(vee(0.5 * (R - R.T)), [0, 0, math.sin(0.1)], atol=1e-15)


def test_vee_rejects_non_skew():
    with pytest.raises(ValueError):
        vee(np.eye(3))
    with pytest.raises(ValueError):
        vee(np.zeros((2, 2)))


@given(vec3, vec3)
def test_hat_is_cross_product(v, w):
    np.testing.assert_allclose(hat(v) @ w, np.cross(v, w), atol=1e-12)
    np.testing.assert_array_equal(vee(hat(v)), v)


def test_elementary_rotations():
    np.testing.assert_allclose(rot_z(math.pi / 2) @ E1, [0, 1, 0], atol=1e-16)
    np.testing.assert_array_equal(rot_x(0.0), np.eye(3))
    d = 0.4
    np.testing.assert_allclose(rot_y(d) @ E1, [math.cos(d), 0, -math.sin(d)])


@pytest.mark.parametrize("rot, axis", [(rot_x, 0), (rot_y, 1), (rot_z, 2)])
def test_rotation_matches_series_oracle(rot, axis):
    a = math.pi / 18
    gen = hat(np.eye(3)[axis])
    np.testing.assert_allclose(rot(a), _expm_series(a * gen), atol=1e-15)


def test_rot_y_pi_over_18_entries():
    # frozen from the power-series oracle
    c, s = 0.984807753012208, 0.17364817766693033
    np.testing.assert_allclose(rot_y(math.pi / 18), [[c, 0, s], [0, 1, 0], [-s, 0, c]], atol=1e-15)


def test_composition_matches_loop_product():
    g, b, a = 1.1, 0.3, -0.4
    A, B, C = rot_z(g), rot_y(b), rot_x(a)
    oracle = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            oracle[i, j] = sum(A[i, k] * B[k, m] * C[m, j] for k in range(3) for m in range(3))
    np.testing.assert_allclose(A @ B @ C, oracle, atol=1e-15)
    assert is_rotation(oracle)


def test_exp_examples():
    np.testing.assert_array_equal(exp_so3([0, 0, 0]), np.eye(3))
    np.testing.assert_allclose(exp_so3([0, 0, 0.3]), rot_z(0.3), atol=1e-15)


def test_exp_small_angle_branch():
    w = np.array([3e-9, -2e-9, 1e-9])
    np.testing.assert_allclose(exp_so3(w), np.eye(3) + hat(w), atol=1e-17)


@settings(max_examples=200)
@given(st.tuples(*[st.floats(-1, 1)] * 3), st.floats(0, math.pi))
def test_exp_inverse(direction, angle):
    d = np.array(direction)
    nd = np.linalg.norm(d)
    w = angle * d / nd if nd > 1e-6 else np.zeros(3)
    np.testing.assert_allclose(exp_so3(w) @ exp_so3(-w), np.eye(3), atol=1e-12)
    assert is_rotation(exp_so3(w))


@given(vec3.filter(lambda v: np.linalg.norm(v) < 3), st.floats(-2, 2), st.floats(-2, 2))
def test_exp_one_parameter_subgroup(w, a, b):
    np.testing.assert_allclose(
        exp_so3(a * w) @ exp_so3(b * w), exp_so3((a + b) * w), atol=1e-10
    )


def test_exp_matches_series_oracle():
    w = np.array([0.7, -1.2, 0.4])
    np.testing.assert_allclose(exp_so3(w), _expm_series(hat(w)), atol=1e-14)


def test_project_fixed_point_and_scale():
    R = rot_z(0.3) @ rot_x(1.0)
    np.testing.assert_allclose(project_to_so3(R), R, atol=1e-15)
    np.testing.assert_allclose(project_to_so3(1.001 * R), R, atol=1e-9)


def test_project_perturbation_bound():
    rng = np.random.default_rng(3)
    R = exp_so3(rng.normal(size=3))
    E = rng.normal(size=(3, 3))
    E *= 1e-6 / np.linalg.norm(E)
    P = project_to_so3(R + E)
    assert np.linalg.norm(P - R) <= 2e-6
    assert is_rotation(P)


def test_project_rejects_reflection():
    with pytest.raises(ValueError):
        project_to_so3(np.diag([1.0, 1.0, -1.0]))


def test_skew_part():
    A = np.arange(9.0).reshape(3, 3)
    S = skew_part(A)
    np.testing.assert_array_equal(S, -S.T)
    np.testing.assert_array_equal(S + 0.5 * (A + A.T), A)


def test_is_rotation():
    assert is_rotation(rot_x(0.2))
    assert not is_rotation(2 * np.eye(3))
    assert not is_rotation(np.diag([1.0, 1.0, -1.0]))
    assert not is_rotation(np.full((3, 3), np.nan))
    np.testing.assert_array_equal(rot_x(0.0) @ E3, E3)
