"""Figure rendering for the CLI report paths.

Every plot is drawn from the same rows that go into the CSV next to it, so
the figure is a view of the delimited output, never extra computation.
Uses the Agg backend; files are PNG.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "figure.figsize": (5.2, 3.6),
    "figure.dpi": 130,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.markersize": 4.5,
    "savefig.bbox": "tight",
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path)
    plt.close(fig)
    return path


def sweep_figure(rows, path, metric: str):
    """NRMSE against sampling period, one line per noise level.

    rows: mean records as dicts with ts, sigma_meas/sigma_proc, and the
    metric columns (nrmse, or nrmse_f_lift/nrmse_f_fd for metric='field').
    """
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        noise_key = "sigma_proc" if any(r.get("sigma_proc") for r in rows) else "sigma_meas"
        levels = sorted({r[noise_key] for r in rows})
        for lv in levels:
            sub = sorted((r for r in rows if r[noise_key] == lv), key=lambda r: r["ts"])
            ts = [r["ts"] for r in sub]
            if metric == "field":
                ax.plot(ts, [r["nrmse_f_lift"] for r in sub], "o-",
                        label=f"lifting, {noise_key}={lv:g}")
                ax.plot(ts, [r["nrmse_f_fd"] for r in sub], "s--",
                        label=f"finite diff., {noise_key}={lv:g}")
            else:
                ax.plot(ts, [r["nrmse"] for r in sub], "o-", label=f"{noise_key}={lv:g}")
        ax.set_xlabel("sampling period")
        ax.set_ylabel("NRMSE_F" if metric == "field" else "NRMSE")
        ax.set_yscale("log")
        if len({r["ts"] for r in rows}) > 1:
            ax.set_xscale("log")
        ax.legend()
        return _save(fig, path)


def roc_figure(curve, path, label: str = ""):
    """Single ROC curve with its AUROC in the legend."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(3.8, 3.6))
        ax.plot(curve.fpr, curve.tpr, "-", lw=1.5,
                label=f"{label + ' ' if label else ''}AUROC = {curve.auroc:.3f}")
        ax.plot([0, 1], [0, 1], ":", color="gray", lw=1)
        ax.set_xlabel("false positive rate")
        ax.set_ylabel("true positive rate")
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-0.02, 1.02)
        ax.legend(loc="lower right")
        return _save(fig, path)


def prediction_figure(t, reference, predicted, path):
    """Reference vs model-predicted trajectories, one panel per state."""
    n = reference.shape[1]
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(n, 1, sharex=True,
                                 figsize=(5.2, max(1.3 * n, 2.6)))
        if n == 1:
            axes = [axes]
        for j, ax in enumerate(axes):
            ax.plot(t, reference[:, j], "-", lw=1.4, label="reference")
            ax.plot(t[:len(predicted)], predicted[:, j], "--", lw=1.4, label="identified")
            ax.set_ylabel(f"x{j + 1}")
        axes[-1].set_xlabel("time")
        axes[0].legend(loc="best")
        return _save(fig, path)


def coefficient_figure(est_W, truth_W, path):
    """Estimated coefficients over the true ones, flattened slot index."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        idx = range(est_W.size)
        ax.plot(idx, truth_W.T.ravel(), "o", label="true", alpha=0.7)
        ax.plot(idx, est_W.T.ravel(), "x", label="estimated")
        ax.set_xlabel("coefficient slot (state-major)")
        ax.set_ylabel("value")
        ax.legend()
        return _save(fig, path)
