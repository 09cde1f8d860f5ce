import numpy as np
import pytest
from hypothesis import given

from eslqr.rotations import quat_from_rotvec, quat_to_rot
from eslqr.vehicle import (Control, NominalState, TrueState, VehicleParams, Wrench,
                           nominal_derivative, true_derivative)

from conftest import rotvecs, vec3


def hover_state():
    return TrueState(np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3), np.zeros(3))


def test_hover_equilibrium(params):
    d = true_derivative(hover_state(), Wrench(params.mass * 9.81, np.zeros(3)), params)
    for part in (d.p, d.q, d.v, d.omega):
        assert np.array_equal(part, np.zeros_like(part))


def test_free_fall(params):
    d = true_derivative(hover_state(), Wrench(0.0, np.zeros(3)), params)
    assert np.array_equal(d.v, [0, 0, -9.81])


def test_tilted_thrust(params):
    # body z rotated 90 deg about x points along -y
    e3_rotated = quat_to_rot(quat_from_rotvec([np.pi / 2, 0, 0])) @ [0, 0, 1]
    s = TrueState(np.zeros(3), quat_from_rotvec([np.pi / 2, 0, 0]), np.zeros(3))
    d = true_derivative(s, Wrench(params.mass * 1.0, np.zeros(3)), params)
    assert np.allclose(e3_rotated, [0, -1, 0], atol=1e-15)
    assert np.allclose(d.v, params.gravity + np.array([0, -1, 0]), atol=1e-15)


def test_thrust_clamped_at_plant(params):
    d = true_derivative(hover_state(), Wrench(1e6, np.zeros(3)), params)
    assert np.isclose(d.v[2], -9.81 + params.thrust_max / params.mass)
    d = true_derivative(hover_state(), Wrench(-5.0, np.zeros(3)), params)
    assert np.isclose(d.v[2], -9.81)


def test_nominal_examples(params):
    s = NominalState(np.ones(3), np.array([1.0, 0, 0, 0]), np.zeros(3))
    d = nominal_derivative(s, Control(params.mass * 9.81, np.zeros(3)), params)
    assert np.array_equal(np.concatenate((d.p, d.q, d.v)), np.zeros(10))
    d = nominal_derivative(s, Control(0.0, np.zeros(3)), params)
    assert np.array_equal(d.v, params.gravity)


@given(vec3(), rotvecs(), vec3(), vec3(), vec3(0.0, 30.0))
def test_true_and_nominal_agree(p, th, v, w, cvec):
    params = VehicleParams()
    c = float(cvec[0])
    q = quat_from_rotvec(th)
    dt = true_derivative(TrueState(p, q, v, w), Wrench(c, np.zeros(3)), params)
    dn = nominal_derivative(NominalState(p, q, v), Control(c, w), params)
    assert np.array_equal(dt.p, dn.p)
    assert np.array_equal(dt.q, dn.q)
    assert np.array_equal(dt.v, dn.v)
    # unit-norm tangency
    assert abs(q @ dt.q) < 1e-12


def test_euler_equation(params):
    w = np.array([1.0, -2.0, 0.5])
    tau = np.array([0.01, 0.02, -0.03])
    d = true_derivative(TrueState(np.zeros(3), np.array([1.0, 0, 0, 0]), np.zeros(3), w),
                        Wrench(0.0, tau), params)
    J = params.inertia
    assert np.allclose(J @ d.omega + np.cross(w, J @ w), tau)


@pytest.mark.parametrize("kwargs", [
    {"mass": -1.0},
    {"mass": 0.0},
    {"inertia": np.diag([0.01, -0.01, 0.02])},
    {"inertia": np.array([[0.01, 0.001, 0], [0, 0.01, 0], [0, 0, 0.02]])},
    {"thrust_min": -1.0},
    {"thrust_min": 5.0, "thrust_max": 4.0},
])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        VehicleParams(**kwargs)


def test_default_params(params):
    assert params.mass == 1.0
    assert np.array_equal(params.inertia, np.diag([0.01, 0.01, 0.02]))
    assert params.thrust_min == 0.0
    assert np.isclose(params.thrust_max, 4 * 9.81)
