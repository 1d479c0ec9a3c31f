"""Static figures rendered from the CSV tables written by the CLI."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

IDEAL = "tab:blue"
FEASIBLE = "tab:red"
REFERENCE = "0.6"
HETERODYNE = "tab:green"


def _read(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return np.genfromtxt(lines, delimiter=",", names=True)


def _bars(ax, m, series, width=0.38):
    offsets = np.linspace(-width / 2, width / 2, len(series)) if len(series) > 1 else [0.0]
    step = width / max(len(series) - 1, 1) if len(series) > 1 else width
    for off, (vals, color, label) in zip(offsets, series):
        ax.bar(np.atleast_1d(m) + off, np.atleast_1d(vals), width=step * 0.9, color=color, label=label)
    ax.set_xticks(np.atleast_1d(m))
    ax.set_xlabel("M")


def plot_fig2(out_dir, wigner_orders=()) -> str:
    a = _read(os.path.join(out_dir, "fig2a.csv"))
    b = _read(os.path.join(out_dir, "fig2b.csv"))
    c = _read(os.path.join(out_dir, "fig2c.csv"))
    d = _read(os.path.join(out_dir, "fig2d.csv"))
    m = a["M"]

    fig, axes = plt.subplots(3, 2, figsize=(8, 10))
    ax = axes[0, 0]
    _bars(ax, m, [(a["v_c_noiseless_gain"], REFERENCE, "noiseless, gain <N>/N"),
                  (a["v_c_ideal"], IDEAL, "ideal"), (a["v_c_feasible"], FEASIBLE, "feasible")], width=0.6)
    ax.set_yscale("log")
    ax.set_ylabel("$V_C$")
    ax.legend(fontsize=7)
    ax.set_title("(a)", loc="left")

    ax = axes[0, 1]
    _bars(ax, m, [(b["mean_pre_ideal"], "white", "before subtraction"), (b["mean_out_ideal"], IDEAL, "ideal"),
                  (b["mean_out_feasible"], FEASIBLE, "feasible")], width=0.6)
    for patch in ax.patches[: len(np.atleast_1d(m))]:
        patch.set_edgecolor("k")
    ax.set_ylabel(r"$\langle N\rangle$")
    ax.legend(fontsize=7)
    ax.set_title("(b)", loc="left")

    ax = axes[1, 0]
    _bars(ax, m, [(c["nth_ideal"], IDEAL, "ideal"), (c["nth_feasible"], FEASIBLE, "feasible")])
    ax.set_ylabel("$N_{TH}$")
    ax.set_title("(c)", loc="left")

    ax = axes[1, 1]
    _bars(ax, m, [(d["success_feasible"], FEASIBLE, "feasible")])
    ax.set_yscale("log")
    ax.set_ylabel("$P_S$")
    ax.set_title("(d)", loc="left")

    ax = axes[2, 0]
    box = [np.inf, -np.inf, np.inf, -np.inf]
    for k in wigner_orders:
        path = os.path.join(out_dir, f"fig2e_M{k}.csv")
        if not os.path.exists(path):
            continue
        w = _read(path)
        xs = np.unique(w["x"])
        ps = np.unique(w["p"])
        vals = w["W"].reshape(ps.size, xs.size)
        ax.contour(xs, ps, vals, levels=[0.5 * vals.max()], colors=[plt.cm.viridis(k / max(max(wigner_orders), 1))])
        inside = vals >= 0.5 * vals.max()
        cols, rows = np.nonzero(inside.any(axis=0))[0], np.nonzero(inside.any(axis=1))[0]
        box = [min(box[0], xs[cols[0]]), max(box[1], xs[cols[-1]]), min(box[2], ps[rows[0]]), max(box[3], ps[rows[-1]])]
    if np.isfinite(box).all():
        pad = 0.3
        ax.set_xlim(box[0] - pad, box[1] + pad)
        ax.set_ylim(box[2] - pad, box[3] + pad)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_title("(e)", loc="left")
    axes[2, 1].axis("off")

    fig.tight_layout()
    path = os.path.join(out_dir, "fig2.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_fig3(out_dir) -> str:
    t = _read(os.path.join(out_dir, "fig3.csv"))
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    _bars(ax, t["M"], [(t["v_canonical"], IDEAL, "canonical"), (t["v_heterodyne"], HETERODYNE, "heterodyne")])
    ax.set_yscale("log")
    ax.set_ylabel("V")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path = os.path.join(out_dir, "fig3.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
