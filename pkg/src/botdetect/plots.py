"""Static SVG figures. Output is deterministic (fixed hash salt, no date stamp)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

plt.rcParams["svg.hashsalt"] = "botdetect"
plt.rcParams["svg.fonttype"] = "none"

COLORS = {"bot": "#d62728", "human": "#1f77b4"}
SENTIMENT_COLORS = {"positive": "#2ca02c", "neutral": "#7f7f7f", "negative": "#d62728", "inconclusive": "#ff7f0e"}


def _save(fig, path) -> Path:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, format="svg", metadata={"Date": None})
    plt.close(fig)
    tmp.replace(path)
    return path


def scatter(rows, x: str, y: str, path, title: str = "") -> Path:
    """``rows``: dicts with a ``label`` key plus numeric columns ``x`` and ``y``."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for label in ("human", "bot"):
        pts = [(float(r[x]), float(r[y])) for r in rows if r["label"] == label]
        if pts:
            xs, ys = zip(*pts)
            ax.scatter(xs, ys, s=6, alpha=0.6, color=COLORS[label], label=label)
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def score_histogram(samples: dict, edges, path, title: str = "", threshold=None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, values in samples.items():
        if len(values):
            ax.hist(values, bins=edges, alpha=0.6, color=COLORS.get(label), label=label)
    if threshold is not None:
        ax.axvline(threshold, color="black", linestyle="--", linewidth=1, label="threshold")
    ax.set_xlabel("bot score")
    ax.set_ylabel("accounts")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def proportion_bars(groups: dict, path, title: str = "", ylabel: str = "proportion") -> Path:
    """Stacked bars: ``groups`` maps bar name -> {category: proportion}."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    names = list(groups)
    cats = []
    for g in groups.values():
        for c in g or {}:
            if c not in cats:
                cats.append(c)
    bottoms = [0.0] * len(names)
    for c in cats:
        vals = [(groups[n] or {}).get(c, 0.0) for n in names]
        ax.bar(names, vals, bottom=bottoms, label=c, color=SENTIMENT_COLORS.get(c, COLORS.get(c)))
        bottoms = [b + v for b, v in zip(bottoms, vals)]
    ax.set_ylim(0, 1)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def hashtag_bars(ranked, path, title: str = "", color: str = "#1f77b4") -> Path:
    fig, ax = plt.subplots(figsize=(5, max(2.5, 0.25 * len(ranked) + 1)))
    tags = [h for h, _ in ranked][::-1]
    counts = [c for _, c in ranked][::-1]
    ax.barh(tags, counts, color=color)
    ax.set_xlabel("tweets")
    ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
