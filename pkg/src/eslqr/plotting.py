"""Static SVG plots of a simulation log."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# drop the timestamp and fix the id salt so repeated runs produce identical files
_SVG_META = {"Date": None}
matplotlib.rcParams["svg.hashsalt"] = "eslqr"


def plot_xy(log, path):
    p = log.cols("p")
    p_nom = log.cols("p_nom")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.plot(p_nom[:, 0], p_nom[:, 1], "--", color="0.4", label="nominal")
    ax.plot(p[:, 0], p[:, 1], color="C0", label="true")
    ax.plot(p[0, 0], p[0, 1], "o", color="C3", label="start")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend(loc="best")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_error_norms(log, path):
    t = log.t
    fig, ax = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    ax[0].plot(t, log.col("dp_norm"), color="C0")
    ax[0].set_ylabel("|dp| [m]")
    ax[1].plot(t, np.linalg.norm(log.cols("dtheta"), axis=1), color="C1")
    ax[1].set_ylabel("|dtheta| [rad]")
    ax[1].set_xlabel("t [s]")
    for a in ax:
        a.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
