"""Figures for the corpus report.

Two figures: AD tangents plotted against finite-difference estimates (every
checked leaf should sit on the diagonal), and the worst per-program error
beside the acceptance tolerance.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .oracle import TangentReport  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def ad_vs_fd(reports: Mapping[str, Sequence[TangentReport]], path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.5, 5.0))
        lo, hi = 0.0, 0.0
        for name, reps in reports.items():
            xs, ys = [], []
            for r in reps:
                if r.ad_tangent is not None and r.fd_tangent is not None:
                    xs += r.fd_tangent
                    ys += r.ad_tangent
            if xs:
                ax.scatter(xs, ys, s=8, alpha=0.7, label=name)
                lo, hi = min(lo, *xs, *ys), max(hi, *xs, *ys)
        ax.plot([lo, hi], [lo, hi], color="0.4", lw=0.8, ls="--", zorder=0)
        ax.set_xscale("symlog", linthresh=1e-2)
        ax.set_yscale("symlog", linthresh=1e-2)
        ax.set_xlabel("finite-difference tangent")
        ax.set_ylabel("AD tangent")
        ax.set_title("AD against finite differences")
        ax.legend(ncol=2, frameon=False, loc="upper left", bbox_to_anchor=(1.02, 1.0))
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
    return path


def error_bars(reports: Mapping[str, Sequence[TangentReport]], path: Path, tol_abs: float = 1e-5) -> Path:
    names, worst = [], []
    for name, reps in reports.items():
        errs = [r.max_abs_err for r in reps if r.fd_tangent is not None]
        if errs:
            names.append(name)
            worst.append(max(max(errs), 1e-17))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, max(2.5, 0.22 * len(names) + 1)))
        ax.barh(names, worst, color="tab:blue")
        ax.axvline(tol_abs, color="tab:red", lw=0.8, ls="--", label=f"absolute tolerance {tol_abs:g}")
        ax.set_xscale("log")
        ax.invert_yaxis()
        ax.set_xlabel("largest |AD - FD| over sampled points")
        ax.legend(frameon=False, loc="lower right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render(reports: Mapping[str, Sequence[TangentReport]], out_dir: str | Path, tol_abs: float = 1e-5) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [ad_vs_fd(reports, out / "ad_vs_fd.png"), error_bars(reports, out / "errors.png", tol_abs)]
