"""Plots for gallery-size sweeps."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def _draw(ax, sizes, values, label):
    ax.plot(sizes, values, marker="o", label=label)
    ax.set_xlabel("gallery size")
    ax.set_xscale("log")
    ax.grid(True, alpha=0.3)
    ax.legend()


def plot_gallery_sweep(reports, out_path) -> None:
    """Line plot of mAP and top-1 against gallery size."""
    reports = sorted(reports, key=lambda r: r.gallery_size or 0)
    sizes = [r.gallery_size for r in reports]
    fig, ax = plt.subplots(figsize=(6, 4))
    _draw(ax, sizes, [r.mean_ap for r in reports], "mAP")
    _draw(ax, sizes, [r.top1 for r in reports], "top-1")
    ax.set_ylabel("score")
    ax.set_title(reports[0].dataset if reports else "")
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def plot_report_rows(rows: list[dict], out_path) -> None:
    """Same plot from serialized report dictionaries."""
    rows = sorted(rows, key=lambda r: r.get("gallery_size") or 0)
    sizes = [r.get("gallery_size") for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    _draw(ax, sizes, [r["mean_ap"] for r in rows], "mAP")
    _draw(ax, sizes, [r["top1"] for r in rows], "top-1")
    ax.set_ylabel("score")
    if rows:
        ax.set_title(rows[0].get("dataset", ""))
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
