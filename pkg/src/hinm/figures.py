"""Report rendering: retention curves and gap summaries as PNG + CSV.

Every CLI command that writes a JSON report also drops a delimited copy
of the iteration data and a matplotlib figure next to it.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def sibling_paths(report_path) -> tuple[Path, Path]:
    base = Path(report_path)
    return base.with_suffix(".csv"), base.with_suffix(".png")


def write_prune_csv(report: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["stage", "tile", "iteration", "retained"])
        for it, value in enumerate(report["ocp_log"]):
            writer.writerow(["ocp", "", it, _fmt(value)])
        for tile, log in enumerate(report["icp_logs"]):
            for it, value in enumerate(log):
                writer.writerow(["icp", tile, it, _fmt(value)])


def render_prune_figure(report: dict, path) -> None:
    fig, (ax_ocp, ax_icp) = plt.subplots(1, 2, figsize=(9, 3.4))
    ocp = report["ocp_log"]
    ax_ocp.step(range(len(ocp)), ocp, where="post", color="tab:blue")
    ax_ocp.axhline(report["no_perm_vector_retained"], color="tab:gray", ls="--", lw=1,
                   label="no permutation")
    ax_ocp.set_xlabel("iteration")
    ax_ocp.set_ylabel("retained saliency")
    ax_ocp.set_title("output channel permutation")
    ax_ocp.legend(loc="lower right", fontsize=8)

    for tile, log in enumerate(report["icp_logs"]):
        ax_icp.step(range(len(log)), log, where="post", lw=1, alpha=0.8,
                    label=f"tile {tile}" if len(report["icp_logs"]) <= 8 else None)
    ax_icp.set_xlabel("iteration")
    ax_icp.set_title("input channel permutation (per tile)")
    if len(report["icp_logs"]) <= 8:
        ax_icp.legend(fontsize=7)
    fig.suptitle(
        f"retained {report['retained_saliency']:.6g} / total {report['total_saliency']:.6g}"
        + ("  [fallback to identity]" if report.get("fallback_used") else "")
    )
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_gap_csv(report: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "retained"])
        for key in ("no_perm", "gyro", "oracle"):
            writer.writerow([key, _fmt(report[key])])
        writer.writerow(["gap", _fmt(report["gap"])])


def render_gap_figure(report: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    labels = ["no perm", "permuted", "oracle"]
    values = [report["no_perm"], report["gyro"], report["oracle"]]
    bars = ax.bar(labels, values, color=["tab:gray", "tab:blue", "tab:green"])
    ax.bar_label(bars, fmt="%.5g", fontsize=8)
    ax.set_ylabel("vector-stage retained saliency")
    ax.set_title(f"gap = {report['gap']:.4g}")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_shuffle_csv(report: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trial", "relative_error"])
        for i, err in enumerate(report["errors"]):
            writer.writerow([i, _fmt(err)])


def render_shuffle_figure(report: dict, path) -> None:
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    errs = report["errors"] or [0.0]
    floor = report["tolerance"] * 1e-9
    ax.semilogy(range(len(errs)), [max(e, floor) for e in errs], ".", color="tab:blue")
    ax.axhline(report["tolerance"], color="tab:red", ls="--", lw=1, label="tolerance")
    ax.set_xlabel("shuffle trial")
    ax.set_ylabel("relative error")
    ax.set_title(
        "kept sets equal: %s" % ("yes" if report["kept_sets_equal"] else "NO")
    )
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
