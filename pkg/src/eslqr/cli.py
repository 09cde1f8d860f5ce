"""Command-line entry point.

    eslqr run <config.json> [--out DIR]
    eslqr verify
    eslqr print-gain <config.json>

Exit codes: 0 success, 1 config error, 2 simulation failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from .config import ConfigError, bundled_configs, load_config
from .controllers import lqr_step
from .error_state import linearize
from .riccati import CareError
from .rotations import quat_to_rot
from .simulation import COLUMNS, compute_metrics, run_closed_loop

EXIT_OK, EXIT_CONFIG, EXIT_SIM, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("eslqr")


def _fmt(x):
    return f"{x:.9g}"


def write_csv(sim_log, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for row in sim_log.data:
            out = [_fmt(v) for v in row[:-1]]
            out.append(str(int(row[-1])))
            w.writerow(out)


def _summary(cfg, sim_log, metrics):
    residuals = [s.residual for s in sim_log.care_solutions]
    cl = [s.closed_loop_abscissa for s in sim_log.care_solutions]
    settle = "not reached" if metrics.settling_time is None else f"{metrics.settling_time:.4f} s"
    lines = [
        f"trajectory: {cfg.trajectory_desc}",
        f"duration_s: {cfg.sim.duration}",
        f"dt_inner_s: {cfg.sim.dt_inner}",
        f"outer_divisor: {cfg.sim.outer_divisor}",
        f"status: {'ok' if sim_log.ok else 'FAILED: ' + sim_log.failure}",
        f"rows: {len(sim_log)}",
        "",
        f"rmse_position_m (t >= {cfg.window_start} s): {metrics.rmse_position:.6g}",
        f"max_position_error_m: {metrics.max_position_error:.6g}",
        f"settling_time (|dp| < {cfg.settle_threshold} m): {settle}",
        f"final_attitude_error_rad: {metrics.final_attitude_error:.6g}",
        f"max_yaw_error_rad (t >= {cfg.window_start} s): {metrics.max_yaw_error:.6g}",
        "",
        f"care_solves: {len(residuals)}",
        f"care_residual_max: {max(residuals):.3e}" if residuals else "care_residual_max: n/a",
        f"closed_loop_abscissa_max: {max(cl):.6g}" if cl else "closed_loop_abscissa_max: n/a",
        f"thrust_saturated_steps: {int(np.sum(sim_log.col('saturated')))}",
    ]
    return "\n".join(lines) + "\n"


def cmd_run(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)

    sim_log = run_closed_loop(cfg.sim, cfg.trajectory, cfg.weights, cfg.gains, cfg.vehicle)
    if len(sim_log) == 0:
        print(f"simulation failed: {sim_log.failure}", file=sys.stderr)
        return EXIT_SIM
    window = min(cfg.window_start, float(sim_log.t[-1]))
    metrics = compute_metrics(sim_log, cfg.settle_threshold, window)

    if cfg.emit_csv:
        write_csv(sim_log, out / "log.csv")
    if cfg.emit_summary:
        (out / "summary.txt").write_text(_summary(cfg, sim_log, metrics))
    if cfg.emit_svg:
        from .plotting import plot_error_norms, plot_xy
        plot_xy(sim_log, out / "traj_xy.svg")
        plot_error_norms(sim_log, out / "error_norm.svg")

    print(f"rmse_position_m={metrics.rmse_position:.6g} "
          f"max_position_error_m={metrics.max_position_error:.6g} -> {out}")
    if not sim_log.ok:
        print(f"simulation failed: {sim_log.failure}", file=sys.stderr)
        return EXIT_SIM
    return EXIT_OK


def cmd_verify(args):
    results = verify_mod.run_all()
    for r in results:
        print(r.line())
    ok = all(r.passed for r in results)
    print("all suites passed" if ok else "VERIFICATION FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_print_gain(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sample = cfg.trajectory(0.0)
    try:
        out = lqr_step(cfg.sim.initial, sample, cfg.weights, cfg.vehicle, None, cfg.epsilon)
    except CareError as exc:
        print(f"Riccati failure: {exc}", file=sys.stderr)
        return EXIT_SIM
    sys_ = linearize(out.error, np.zeros(4), quat_to_rot(sample.nominal.q),
                     sample.u_nominal.c, cfg.vehicle)
    sol = out.gain_used
    with np.printoptions(precision=6, suppress=True, linewidth=140):
        print("dx =", out.error.as_vector())
        print("A =\n", sys_.A)
        print("B =\n", sys_.B)
        print("K =\n", sol.K)
        print("P =\n", sol.P)
    print(f"residual = {sol.residual:.3e}")
    print(f"spectral_abscissa_A = {sol.spectral_abscissa_A:.6g}")
    print(f"closed_loop_abscissa = {sol.closed_loop_abscissa:.6g}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="eslqr", description="Error-state LQR quadrotor simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write log/summary/plots")
    r.add_argument("config", help=f"config path or bundled name ({', '.join(bundled_configs())})")
    r.add_argument("--out", help="output directory (overrides output.dir)")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run the numerical self-check suites")
    v.set_defaults(func=cmd_verify)

    g = sub.add_parser("print-gain", help="dump A, B, K, P at the initial error")
    g.add_argument("config")
    g.set_defaults(func=cmd_print_gain)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
