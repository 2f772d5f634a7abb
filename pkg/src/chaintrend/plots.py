"""Report figures rendered to SVG files.

Every figure routes through save_figure, which pins the SVG hash salt and
strips the creation date so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .slicing import pearson  # noqa: E402

FAMILY_COLORS = {"np": "#d62728", "ta": "#1f77b4", "sm": "#2ca02c",
                 "other": "#7f7f7f"}

_RC = {
    "svg.hashsalt": "chaintrend",
    "figure.dpi": 100,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
}


def save_figure(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def metric_bars(reports: dict, path, title: str = "classification metrics"):
    """Grouped bar chart of accuracy plus per-class and macro P/R/F1.

    reports maps a model name (e.g. BM, FM) to a ClassReport.
    """
    groups = ["accuracy"]
    for cls in ("down", "flat", "up"):
        groups += [f"{cls}\nprecision", f"{cls}\nrecall", f"{cls}\nf1"]
    groups += ["macro\nprecision", "macro\nrecall", "macro\nf1"]

    def values(rep):
        out = [rep.accuracy]
        for cls in ("down", "flat", "up"):
            m = rep.per_class[cls]
            out += [m["precision"], m["recall"], m["f1"]]
        out += [rep.macro_precision, rep.macro_recall, rep.macro_f1]
        return out

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(10, 4))
        n_models = len(reports)
        width = 0.8 / max(n_models, 1)
        for i, (name, rep) in enumerate(reports.items()):
            xs = [g + i * width for g in range(len(groups))]
            ax.bar(xs, values(rep), width=width, label=name)
        ax.set_xticks([g + width * (n_models - 1) / 2
                       for g in range(len(groups))])
        ax.set_xticklabels(groups)
        ax.set_ylim(0, 1)
        ax.set_ylabel("score")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        save_figure(fig, path)


def correlation_network_figure(net, path,
                               title: str = "feature correlation network"):
    """Circular layout grouped by feature family; edge width tracks |r|."""
    ordered = sorted(net.nodes, key=lambda nf: (nf[1], nf[0]))
    n = len(ordered)
    pos = {}
    for i, (name, _fam) in enumerate(ordered):
        theta = 2.0 * math.pi * i / max(n, 1)
        pos[name] = (math.cos(theta), math.sin(theta))

    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(7, 7))
        ax.set_aspect("equal")
        ax.axis("off")
        ax.set_title(f"{title} (p < {net.alpha:g})")
        for a, b, r, _p in net.edges:
            (xa, ya), (xb, yb) = pos[a], pos[b]
            ax.plot([xa, xb], [ya, yb],
                    color="#c44e52" if r >= 0 else "#4c72b0",
                    linewidth=0.4 + 2.2 * abs(r), alpha=0.5, zorder=1)
        seen = set()
        for name, fam in ordered:
            x, y = pos[name]
            label = fam.upper() if fam not in seen else None
            seen.add(fam)
            ax.scatter([x], [y], s=90, zorder=2, label=label,
                       color=FAMILY_COLORS.get(fam, FAMILY_COLORS["other"]),
                       edgecolors="white", linewidths=0.8)
            if n <= 45:
                ax.annotate(name, (1.08 * x, 1.08 * y), fontsize=6,
                            ha="center", va="center",
                            rotation=0, zorder=3)
        ax.set_xlim(-1.35, 1.35)
        ax.set_ylim(-1.35, 1.35)
        ax.legend(loc="lower left", fontsize=7)
        save_figure(fig, path)


def similarity_price_figure(scores, mean_prices, path,
                            title: str = "interval similarity vs price"):
    """Similarity of consecutive activity intervals against mean close."""
    if len(scores) != len(mean_prices):
        raise ValueError("scores and prices must align")
    xs = list(range(1, len(scores) + 1))
    sub = ""
    if len(scores) >= 3:
        try:
            r, p = pearson(scores, mean_prices)
            sub = f"  (pearson r = {r:.2f}, p = {p:.2g})"
        except ValueError:
            pass
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(9, 4))
        ax.plot(xs, scores, marker="o", color="#4c72b0",
                label="interval similarity")
        ax.set_xlabel("interval index")
        ax.set_ylabel("similarity", color="#4c72b0")
        ax.set_ylim(0, 1)
        ax2 = ax.twinx()
        ax2.plot(xs, mean_prices, marker="s", color="#c44e52",
                 label="mean close")
        ax2.set_ylabel("mean close", color="#c44e52")
        ax2.grid(False)
        ax.set_title(title + sub)
        fig.tight_layout()
        save_figure(fig, path)
