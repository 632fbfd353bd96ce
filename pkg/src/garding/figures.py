"""Optional figure rendering for the CSV artifacts.

Not part of any report path (the CSV is plot-ready); this renders the
delimited outputs of the experiment commands to PNG files on request via
``garding figures``. Excluded from the byte-determinism guarantee.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_garding_csv", "render_all"]


def render_garding_csv(csv_path, out_path):
    """lambda_min against cutoff from a garding report CSV."""
    rows = list(csv.DictReader(open(csv_path)))
    if not rows or "lambda_min" not in rows[0]:
        return None
    cut = [float(r["cutoff"]) for r in rows]
    lam = [float(r["lambda_min"]) for r in rows]
    s = rows[0].get("s", "?")
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    ax.plot(cut, lam, "o-", color="tab:blue")
    ax.axhline(0.0, color="0.6", lw=0.8)
    ax.set_xlabel("cutoff degree")
    ax.set_ylabel(r"$\lambda_{\min}$ of weighted Hermitian form")
    ax.set_title(f"lower-bound sweep (s = {s})", fontsize=10)
    ax.spines["right"].set_visible(False)
    ax.spines["top"].set_visible(False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_friedrichs_csv(csv_path, out_path):
    rows = list(csv.DictReader(open(csv_path)))
    if not rows or "lambda_min" not in rows[0]:
        return None
    names = [r["symbol"] for r in rows]
    lam = [float(r["lambda_min"]) for r in rows]
    fig, ax = plt.subplots(figsize=(4.6, 3.0))
    ax.bar(range(len(names)), lam, color="tab:green")
    ax.axhline(0.0, color="0.4", lw=0.8)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=7)
    ax.set_ylabel(r"$\lambda_{\min}$(Herm $P$)")
    ax.set_title("Friedrichs smoothing positivity", fontsize=10)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_all(src_dir, dest_dir):
    src = Path(src_dir)
    dest = Path(dest_dir)
    dest.mkdir(parents=True, exist_ok=True)
    made = []
    for name, renderer in (("garding", render_garding_csv),
                           ("friedrichs", render_friedrichs_csv)):
        p = src / f"{name}.csv"
        if p.exists():
            out = renderer(p, dest / f"{name}.png")
            if out:
                made.append(out)
    return made
