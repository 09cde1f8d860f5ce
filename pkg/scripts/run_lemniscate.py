"""Lemniscate tracking from a flat attitude at rest, with per-phase metrics.

    python scripts/run_lemniscate.py --duration 20 --out out/lemniscate
"""

import argparse
from pathlib import Path

import numpy as np

from eslqr.cli import write_csv
from eslqr.controllers import BodyrateGains
from eslqr.plotting import plot_error_norms, plot_xy
from eslqr.riccati import LqrWeights
from eslqr.simulation import SimConfig, compute_metrics, run_closed_loop
from eslqr.trajectory import LemniscateParams, lemniscate_trajectory
from eslqr.vehicle import TrueState, VehicleParams


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--duration", type=float, default=20.0)
    ap.add_argument("--omega", type=float, default=0.8, help="trajectory rate [rad/s]")
    ap.add_argument("--yaw-mode", default="tangent", choices=["tangent", "fixed", "spinning"])
    ap.add_argument("--out", type=Path, default=Path("out/lemniscate"))
    args = ap.parse_args()

    params = VehicleParams()
    lem = LemniscateParams(omega_traj=args.omega, yaw_mode=args.yaw_mode, yaw_rate=0.5)
    traj = lemniscate_trajectory(lem, params)
    init = TrueState(traj(0.0).nominal.p.copy(), np.array([1.0, 0, 0, 0]), np.zeros(3), np.zeros(3))
    log = run_closed_loop(SimConfig(args.duration, init), traj, LqrWeights.default(),
                          BodyrateGains(), params)
    if not log.ok:
        print("failed:", log.failure)

    t, e = log.t, log.col("dp_norm")
    for lo, hi in [(0, 2), (2, 5), (5, args.duration)]:
        sel = (t >= lo) & (t <= hi)
        if sel.any():
            print(f"t in [{lo:g}, {hi:g}] s: max |dp| {e[sel].max():.4f} m, "
                  f"rms {np.sqrt(np.mean(e[sel] ** 2)):.4f} m")
    m = compute_metrics(log, 0.05, min(5.0, float(t[-1])))
    print(m)

    args.out.mkdir(parents=True, exist_ok=True)
    write_csv(log, args.out / "log.csv")
    plot_xy(log, args.out / "traj_xy.svg")
    plot_error_norms(log, args.out / "error_norm.svg")
    print("wrote", args.out)


if __name__ == "__main__":
    main()
