"""Sweep the position weight and the thrust/rate penalty on the hover-offset case.

Prints settling time, peak tilt and peak rate command for each pair, which
shows the usual LQR trade between response speed and control effort.
"""

import argparse
import itertools

import numpy as np

from eslqr.controllers import BodyrateGains
from eslqr.riccati import LqrWeights
from eslqr.simulation import SimConfig, compute_metrics, run_closed_loop
from eslqr.trajectory import hover_trajectory
from eslqr.vehicle import TrueState, VehicleParams


def run(q_pos, r_scale, offset, duration, params):
    weights = LqrWeights.from_diagonals([q_pos] * 3 + [5.0] * 3 + [1.0] * 3,
                                        np.array([0.5, 1.0, 1.0, 1.0]) * r_scale)
    p0 = np.array([0.0, 0.0, 1.5])
    init = TrueState(p0 + offset, np.array([1.0, 0, 0, 0]), np.zeros(3), np.zeros(3))
    log = run_closed_loop(SimConfig(duration, init), hover_trajectory(p0, 0.0, params),
                          weights, BodyrateGains(), params)
    m = compute_metrics(log, 0.01)
    tilt = np.max(np.linalg.norm(log.cols("dtheta")[:, :2], axis=1))
    rate = np.max(np.linalg.norm(log.cols("omega_cmd"), axis=1))
    return m.settling_time, tilt, rate, int(log.col("saturated").sum())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--offset", type=float, nargs=3, default=[0.5, 0.0, 0.0])
    ap.add_argument("--duration", type=float, default=8.0)
    args = ap.parse_args()
    params = VehicleParams()

    print(f"{'q_pos':>6} {'r_scale':>8} {'settle_s':>9} {'tilt_rad':>9} {'rate_cmd':>9} {'sat':>4}")
    for q_pos, r_scale in itertools.product([1.0, 10.0, 100.0], [0.1, 1.0, 10.0]):
        settle, tilt, rate, sat = run(q_pos, r_scale, np.array(args.offset), args.duration, params)
        settle = "  never" if settle is None else f"{settle:9.3f}"
        print(f"{q_pos:6g} {r_scale:8g} {settle:>9} {tilt:9.4f} {rate:9.3f} {sat:4d}")


if __name__ == "__main__":
    main()
