"""Report figures. Rendered off-screen with the Agg backend."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sim import lateral_offset  # noqa: E402

golden = (5 ** 0.5 - 1) / 2
fig_width = 7.0

params = {
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "figure.figsize": (fig_width, fig_width * golden),
    "savefig.dpi": 120,
    "svg.hashsalt": "lanefollow",
}


def setup(**overrides):
    rc = dict(params)
    rc.update(overrides)
    plt.rcParams.update(rc)


def _road_outline(ax, road, xs, ys):
    """Centreline and marking contours of ``road`` over the plotted extent."""
    pad = road.lane_width * 2
    gx = np.linspace(xs.min() - pad, xs.max() + pad, 300)
    gy = np.linspace(ys.min() - pad, ys.max() + pad, 300)
    X, Y = np.meshgrid(gx, gy)
    d = lateral_offset(road, X, Y)
    half = road.lane_width / 2
    ax.contour(X, Y, d, levels=[-half, half], colors="0.4", linewidths=0.8)
    ax.contour(X, Y, d, levels=[0.0], colors="0.6", linewidths=0.6, linestyles="--")


def run_figure(report, road, path):
    """Trajectory over the road, cross-track error and steering per step."""
    setup()
    fig, (ax0, ax1, ax2) = plt.subplots(3, 1, figsize=(fig_width, fig_width * 1.1))
    xs = np.array([report.initial.x] + [s.state.x for s in report.steps])
    ys = np.array([report.initial.y] + [s.state.y for s in report.steps])
    _road_outline(ax0, road, xs, ys)
    ax0.plot(xs, ys, color="C0", label="vehicle")
    ax0.set_aspect("equal", adjustable="datalim")
    ax0.set_xlabel("x [m]")
    ax0.set_ylabel("y [m]")
    ax0.legend(loc="best")

    idx = np.arange(len(report.steps))
    cte = np.array([s.cte for s in report.steps])
    half = report.lane_width / 2
    ax1.plot(idx, cte, color="C1")
    for lvl in (-half, half):
        ax1.axhline(lvl, color="0.3", lw=0.8, ls=":")
    ax1.set_ylabel("cte [m]")

    steer = np.array([s.estimate.steering_angle for s in report.steps])
    ax2.plot(idx, steer, color="C2")
    ax2.set_xlabel("step")
    ax2.set_ylabel("steering [deg]")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def steering_figure(records, path):
    """Steering angle per frame with non-tracked frames marked."""
    setup()
    fig, ax = plt.subplots()
    idx = np.array([r.frame_index for r in records])
    ang = np.array([r.steering_angle for r in records])
    ax.plot(idx, ang, color="C0", marker=".", ms=3)
    bad = np.array([r.status != "Tracked" for r in records], dtype=bool)
    if bad.any():
        ax.plot(idx[bad], ang[bad], "x", color="C3", label="not tracked")
        ax.legend(loc="best")
    ax.set_xlabel("frame")
    ax.set_ylabel("steering [deg]")
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
