"""Figures written next to the CSV/JSON outputs (non-interactive backend)."""
from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .flow import flow_at  # noqa: E402

STYLE = {
    "figure.dpi": 120,
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def path_points(spec, traj, per_segment=40):
    """Dense ``(t, x)`` polyline of a trajectory: flow arcs joined by vertical jumps."""
    ts, xs = [], []
    t0, x0 = 0.0, traj.start
    ends = [(t, u, z) for t, u, z in traj.events]
    term = traj.terminal
    ends.append((term.t, term.value, None))
    for t1, u, z in ends:
        if math.isfinite(t1) and t1 > t0:
            for s in np.linspace(t0, t1, per_segment):
                ts.append(float(s))
                xs.append(flow_at(spec, x0, float(s - t0)) if s > t0 else x0)
        if math.isfinite(u):
            ts.append(t1)
            xs.append(u)
        if z is None:
            break
        ts.append(t1)
        xs.append(z)
        t0, x0 = t1, z
    return np.array(ts), np.array(xs)


def plot_trajectories(spec, trajs, path, title=""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.5))
        top = 0.0
        for i, traj in enumerate(trajs):
            t, x = path_points(spec, traj)
            ax.plot(t, x, color=f"C{i % 10}", alpha=0.8)
            fin = x[np.isfinite(x)]
            top = max(top, fin.max(initial=0.0))
        if top > 100:
            # blow-up paths: keep the early dynamics visible
            ax.set_yscale("symlog", linthresh=1.0)
        ax.set_xlabel("t")
        ax.set_ylabel("X_t")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_curve(curve, path, title=""):
    cols = [("s", curve.s), ("pi", curve.pi), ("u", curve.u)]
    if curve.b is not None:
        cols.append((f"p_exit_b (b={curve.b:g})", curve.p_exit_b))
    cols = [(name, np.asarray(v, dtype=float)) for name, v in cols
            if np.isfinite(np.asarray(v, dtype=float)).any()]
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, max(1, len(cols)), figsize=(3 * max(1, len(cols)), 3),
                                 squeeze=False)
        for ax, (name, vals) in zip(axes[0], cols):
            ax.plot(curve.x, vals)
            ax.set_xlabel("x")
            ax.set_title(name)
        if title:
            fig.suptitle(title)
        return _save(fig, path)


def plot_verification(records, path, title=""):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 0.3 * len(records) + 1.2))
        z = [r["z"] if math.isfinite(r["z"]) else math.copysign(10, r["z"]) for r in records]
        y = np.arange(len(records))
        ax.barh(y, z, color=["C0" if r["pass"] else "C3" for r in records])
        ax.set_yticks(y, [r["check"] for r in records])
        ax.axvline(0, color="k", lw=0.6)
        for lim in (-3, 3):
            ax.axvline(lim, color="0.6", ls="--", lw=0.6)
        ax.invert_yaxis()
        ax.set_xlabel("z")
        if title:
            ax.set_title(title)
        return _save(fig, path)
