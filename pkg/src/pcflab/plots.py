"""Figure rendering for experiment reports.

Every run writes its delimited diagnostics first; these helpers then render
matplotlib figures next to the CSV files.  All figures go through the Agg
backend so runs work headless.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _save(fig, outdir, name):
    path = os.path.join(outdir, name)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path


def plot_series(outdir, times, series, labels, name, ylabel, logy=False,
                title=None):
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    for s, lab in zip(series, labels):
        s = np.asarray(s, dtype=float)
        if logy:
            s = np.maximum(np.abs(s), 1e-300)
        ax.plot(times, s, label=lab, lw=1.4)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    if len(labels) > 1:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, outdir, name)


def plot_chart_flow(outdir, res):
    made = []
    made.append(plot_series(
        outdir, res.times,
        [res.flat_distances, res.pluriclosed_residuals + 1e-300],
        ["sup distance to flat mean", "pluriclosed residual"],
        "flow_decay.png", "sup norm", logy=True,
        title="flow diagnostics"))
    made.append(plot_series(
        outdir, res.times, [res.min_eigs], ["min metric eigenvalue"],
        "flow_positivity.png", "eigenvalue"))
    return made


def plot_potential_flow(outdir, res):
    made = [plot_series(outdir, res.times,
                        [res.flat_distances, res.torsion_l2],
                        ["flat distance", "torsion L2"],
                        "potential_decay.png", "norm", logy=True,
                        title="potential flow")]
    made.append(plot_series(outdir, res.times, [res.det_w_defects],
                            ["|det W - 1|"], "detw.png", "defect", logy=True))
    return made


def plot_homogeneous(outdir, traj, stat=None):
    made = []
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    for k in range(4):
        ax.plot(traj.times, traj.eigenvalues[:, k], lw=1.2,
                label=f"eigenvalue {k + 1}")
    ax.set_xscale("symlog", linthresh=1.0)
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("metric eigenvalues")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    made.append(_save(fig, outdir, "metric_eigenvalues.png"))

    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    mask = traj.times > 0
    ax.plot(traj.times[mask], (traj.rm_norms * traj.times)[mask], lw=1.4)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("|Rm| t")
    ax.grid(alpha=0.3)
    made.append(_save(fig, outdir, "curvature_statistic.png"))
    return made


def plot_grf(outdir, rep):
    made = [plot_series(outdir, rep["times"], [rep["F"]], ["energy"],
                        "energy.png", "F", title="energy functional")]
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    ax.plot(rep["times"], rep["dF_dt"], label="measured dF/dt", lw=1.4)
    ax.plot(rep["times"], rep["integrand"], "--",
            label="residual-square integrand", lw=1.4)
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    made.append(_save(fig, outdir, "monotonicity.png"))
    return made


def plot_twisted(outdir, res):
    return [plot_series(outdir, res.times, [res.sup_f, res.consistency],
                        ["sup |f - mean|", "tensor consistency"],
                        "twisted_flow.png", "value", logy=True)]


def plot_cone(outdir, problem, tau, t_max=None):
    from . import cone as cone_mod
    fig, ax = plt.subplots(figsize=(6.0, 3.8))
    horizon = t_max or (2.0 * tau if np.isfinite(tau) else 10.0)
    ts = np.linspace(0, horizon, 200)
    for c in problem.curves:
        ax.plot(ts, c.area + ts * c.canonical_pairing, lw=1.3, label=c.name)
    ax.axhline(0.0, color="k", lw=0.8)
    if np.isfinite(tau):
        ax.axvline(tau, color="r", ls=":", lw=1.2, label="tau*")
    ax.set_xlabel("t")
    ax.set_ylabel("curve pairing")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return [_save(fig, outdir, "cone_trajectory.png")]
