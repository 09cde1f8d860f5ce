import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

import eslqr.simulation as simulation
from eslqr.controllers import BodyrateGains
from eslqr.error_state import linearize
from eslqr.riccati import CareError, LqrWeights, lqr_gain
from eslqr.rotations import quat_from_rotvec
from eslqr.simulation import (COL, COLUMNS, SimConfig, SimLog, compute_metrics, rk4_step,
                              run_closed_loop, run_rate_loop)
from eslqr.trajectory import LemniscateParams, hover_trajectory, lemniscate_trajectory
from eslqr.vehicle import TrueState, VehicleParams, Wrench

HOVER_P = np.array([0.0, 0.0, 1.5])
Q0 = np.array([1.0, 0.0, 0.0, 0.0])


def at_rest(p=HOVER_P, q=Q0, v=np.zeros(3), w=np.zeros(3)):
    return TrueState(np.asarray(p, float), np.asarray(q, float), np.asarray(v, float),
                     np.asarray(w, float))


def hover_run(duration, initial, params, weights, gains, **kw):
    traj = hover_trajectory(HOVER_P, 0.0, params)
    return run_closed_loop(SimConfig(duration, initial, **kw), traj, weights, gains, params)


# -- plant integration ---------------------------------------------------------

def test_rk4_hover_fixed_point(params):
    s = at_rest()
    out = rk4_step(s, Wrench(params.hover_thrust, np.zeros(3)), params, 1e-3)
    assert np.allclose(out.as_vector(), s.as_vector(), atol=1e-12, rtol=0)


def test_rk4_free_fall(params):
    s = at_rest(p=np.zeros(3))
    for _ in range(1000):
        s = rk4_step(s, Wrench(0.0, np.zeros(3)), params, 1e-3)
    assert abs(s.v[2] + 9.81) < 1e-9
    assert abs(s.p[2] + 4.905) < 1e-6
    assert np.allclose(s.p[:2], 0) and np.allclose(s.v[:2], 0)


def test_rk4_torque_free_symmetric_spin():
    params = VehicleParams(inertia=[0.02, 0.02, 0.02])
    w0 = np.array([0.3, -1.2, 2.0])
    s = at_rest(w=w0)
    for _ in range(1000):
        s = rk4_step(s, Wrench(params.hover_thrust, np.zeros(3)), params, 1e-3)
    assert np.allclose(s.omega, w0, atol=1e-10, rtol=0)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_rk4_torque_free_energy_and_momentum(w0):
    params = VehicleParams()
    J = params.inertia
    s = at_rest(w=w0)
    e0 = 0.5 * s.omega @ J @ s.omega
    h0 = np.linalg.norm(J @ s.omega)
    for _ in range(200):
        s = rk4_step(s, Wrench(params.hover_thrust, np.zeros(3)), params, 1e-3)
        assert abs(np.linalg.norm(s.q) - 1) < 1e-12
    assert abs(0.5 * s.omega @ J @ s.omega - e0) < 1e-9 * max(1.0, e0)
    assert abs(np.linalg.norm(J @ s.omega) - h0) < 1e-9


def test_rk4_clamps_thrust(params):
    s = at_rest(p=np.zeros(3))
    hi = rk4_step(s, Wrench(1e6, np.zeros(3)), params, 1e-3)
    ref = rk4_step(s, Wrench(params.thrust_max, np.zeros(3)), params, 1e-3)
    assert np.array_equal(hi.as_vector(), ref.as_vector())


def test_rk4_rejects_non_finite(params):
    with pytest.raises(simulation.SimulationError):
        rk4_step(at_rest(w=[np.inf, 0, 0]), Wrench(1.0, np.zeros(3)), params, 1e-3)


# -- closed loop ---------------------------------------------------------------

def test_hover_equilibrium_is_preserved(params, weights, gains):
    log = hover_run(3.0, at_rest(), params, weights, gains)
    assert log.ok
    assert np.max(log.col("dp_norm")) < 1e-6


def test_row_count_and_columns(params, weights, gains):
    log = hover_run(0.5, at_rest(), params, weights, gains)
    assert log.data.shape == (501, len(COLUMNS))
    assert np.allclose(log.t, np.arange(501) * 1e-3)
    assert len(log.care_solutions) == 51
    assert COL["saturated"] == len(COLUMNS) - 1


def test_command_is_held_between_outer_ticks(params, weights, gains):
    init = at_rest(p=HOVER_P + [0.3, 0, 0])
    log = hover_run(0.1, init, params, weights, gains)
    c = log.col("c_cmd")
    for k in range(0, 100, 10):
        assert np.all(c[k:k + 10] == c[k])


def test_quaternion_stays_unit(params, weights, gains):
    init = at_rest(p=HOVER_P + [0.5, -0.3, 0.2], q=quat_from_rotvec([0.2, -0.1, 0.4]))
    log = hover_run(2.0, init, params, weights, gains)
    assert np.max(np.abs(np.linalg.norm(log.cols("q", "wxyz"), axis=1) - 1)) < 1e-12


def test_determinism(params, weights, gains):
    init = at_rest(p=HOVER_P + [0.2, 0.1, -0.1])
    a = hover_run(1.0, init, params, weights, gains)
    b = hover_run(1.0, init, params, weights, gains)
    assert a.data.tobytes() == b.data.tobytes()


def _linear_prediction(params, weights, dx0, t):
    sys = linearize(np.zeros(9), np.zeros(4), np.eye(3), params.hover_thrust, params)
    sol = lqr_gain(sys, weights)
    Acl = sys.A - sys.B @ sol.K
    return np.array([np.linalg.norm(expm(Acl * tk) @ dx0) for tk in t])


def _stacked_error(log):
    return np.linalg.norm(np.hstack((log.cols("dp"), log.cols("dtheta"), log.cols("dv"))), axis=1)


DX0 = [
    np.array([0.05, 0, 0, 0, 0, 0, 0, 0, 0]),
    np.array([0.02, -0.02, 0.02, 0.01, 0.01, 0.01, 0.01, 0.01, -0.01]),
    np.array([0, 0, 0, 0.04, 0, 0, 0, 0.02, 0]),
]


def _initial_from(dx0):
    return at_rest(p=HOVER_P + dx0[:3], q=quat_from_rotvec(dx0[3:6]), v=dx0[6:])


@pytest.mark.parametrize("dx0", DX0)
def test_small_error_follows_linear_prediction(dx0, params, weights, gains):
    # default stack: the rate loop lag is unmodeled, so compare against the envelope
    log = hover_run(2.0, _initial_from(dx0), params, weights, gains)
    sim = _stacked_error(log)
    lin = _linear_prediction(params, weights, dx0, log.t)
    assert np.max(np.abs(sim - lin)) < 0.2 * np.max(lin)


@pytest.mark.parametrize("dx0", DX0)
def test_fast_inner_loop_matches_linear_prediction_pointwise(dx0, params, weights):
    gains = BodyrateGains([400.0, 400.0, 400.0])
    log = hover_run(2.0, _initial_from(dx0), params, weights, gains,
                    dt_inner=5e-4, outer_divisor=1)
    sim = _stacked_error(log)
    lin = _linear_prediction(params, weights, dx0, log.t)
    assert np.max(np.abs(sim - lin) / lin) < 0.2


def test_hover_offset_decays(params, weights, gains):
    log = hover_run(10.0, at_rest(p=HOVER_P + [0.5, 0, 0]), params, weights, gains)
    m = compute_metrics(log, 0.01, 5.0)
    assert m.settling_time is not None and m.settling_time < 5.0
    assert not np.any(log.col("saturated"))
    # monotone envelope: running max from each second onward keeps shrinking
    e = log.col("dp_norm")
    tails = [np.max(e[k * 1000:]) for k in range(10)]
    assert all(a >= b for a, b in zip(tails, tails[1:]))


def test_lemniscate_short_run(params, weights, gains):
    traj = lemniscate_trajectory(LemniscateParams(), params)
    log = run_closed_loop(SimConfig(2.0, at_rest(p=[0, 0, 1.5])), traj, weights, gains, params)
    assert log.ok
    assert np.all(np.isfinite(log.data))


def test_riccati_failure_returns_partial_log(monkeypatch, params, weights, gains):
    real = simulation.lqr_step
    calls = []

    def flaky(*args, **kw):
        calls.append(1)
        if len(calls) > 3:
            raise CareError("forced", residual=np.inf, iterations=0)
        return real(*args, **kw)

    monkeypatch.setattr(simulation, "lqr_step", flaky)
    log = hover_run(1.0, at_rest(), params, weights, gains)
    assert not log.ok
    assert "Riccati" in log.failure and "t=0.03" in log.failure
    assert len(log) == 30
    assert np.all(np.isfinite(log.data))


def test_non_finite_state_returns_partial_log(monkeypatch, params, weights, gains):
    monkeypatch.setattr(simulation, "bodyrate_torque",
                        lambda *a, **k: np.array([np.inf, 0.0, 0.0]))
    log = hover_run(1.0, at_rest(), params, weights, gains)
    assert not log.ok
    assert "non-finite" in log.failure
    assert len(log) == 1


def test_sim_config_validation():
    with pytest.raises(ValueError):
        SimConfig(1.0, at_rest(), dt_inner=0.0)
    with pytest.raises(ValueError):
        SimConfig(1.0, at_rest(), outer_divisor=0)
    with pytest.raises(ValueError):
        SimConfig(1e-4, at_rest())


# -- metrics -------------------------------------------------------------------

def _synthetic(t, dp_norm):
    data = np.zeros((len(t), len(COLUMNS)))
    data[:, COL["t"]] = t
    data[:, COL["dp_x"]] = dp_norm
    data[:, COL["dp_norm"]] = dp_norm
    data[:, COL["q_w"]] = 1.0
    data[:, COL["q_nom_w"]] = 1.0
    return SimLog(data)


def test_metrics_zero_log():
    t = np.arange(0, 1.0001, 1e-3)
    m = compute_metrics(_synthetic(t, np.zeros_like(t)))
    assert m.rmse_position == m.max_position_error == m.final_attitude_error == 0
    assert m.settling_time == 0.0
    assert m.max_yaw_error == 0.0


def test_metrics_exponential_settling():
    dt = 1e-3
    t = np.arange(0, 10 + dt / 2, dt)
    m = compute_metrics(_synthetic(t, np.exp(-t)), 0.01)
    assert abs(m.settling_time - np.log(100)) <= dt


def test_metrics_never_settles():
    t = np.arange(0, 2.0001, 1e-3)
    m = compute_metrics(_synthetic(t, np.full_like(t, 0.1)), 0.01)
    assert m.settling_time is None
    assert np.isclose(m.rmse_position, 0.1)


def test_metrics_window():
    t = np.arange(0, 2.0001, 1e-3)
    e = np.where(t < 1.0, 1.0, 0.5)
    m = compute_metrics(_synthetic(t, e), 0.01, window_start=1.0)
    assert np.isclose(m.rmse_position, 0.5)
    assert m.max_position_error == 1.0
    with pytest.raises(ValueError):
        compute_metrics(_synthetic(t, e), 0.01, window_start=3.0)
    with pytest.raises(ValueError):
        compute_metrics(SimLog(np.zeros((0, len(COLUMNS)))))


# -- inner loop ----------------------------------------------------------------

def test_rate_loop_converges_first_order(params, gains):
    dt = 1e-3
    t, w = run_rate_loop([1.0, 0.0, 0.0], gains, params, 0.5, dt)
    # torque is held over each step, so the exact discrete response is geometric
    k = np.arange(len(t))
    assert np.allclose(w[:, 0], 1 - (1 - 20.0 * dt) ** k, atol=1e-12)
    assert np.allclose(w[:, 0], 1 - np.exp(-20.0 * t), atol=5e-3)
    assert np.allclose(w[:, 1:], 0, atol=1e-12)


def test_rk4_fourth_order_convergence():
    # asymmetric tumbling body under gravity: error shrinks ~16x per halving
    params = VehicleParams(inertia=[0.01, 0.015, 0.02])
    s0 = at_rest(w=[2.0, 0.5, -1.0])

    def final(dt):
        s = s0
        for _ in range(int(round(1.0 / dt))):
            s = rk4_step(s, Wrench(5.0, np.zeros(3)), params, dt)
        return s.as_vector()

    ref = final(1e-4)
    e1 = np.max(np.abs(final(4e-3) - ref))
    e2 = np.max(np.abs(final(2e-3) - ref))
    assert 12.0 < e1 / e2 < 20.0
    assert e2 < 1e-8
