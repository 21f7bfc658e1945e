"""Figure rendering for benchmark results.

Renders accuracy curves from the results CSV next to the delimited output.
All figures are written with the Agg backend, so no display is needed.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _load_rows(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        return list(csv.DictReader(fh))


def render_accuracy_figures(csv_path, out_dir=None) -> list[Path]:
    """One PNG per (stream, learner): running and windowed accuracy vs t.

    Seeds are drawn as separate light traces with the running accuracy
    emphasised. Returns the written paths.
    """
    csv_path = Path(csv_path)
    out_dir = Path(out_dir) if out_dir else csv_path.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = [r for r in _load_rows(csv_path) if r.get("row") == "snapshot"]
    groups: dict[tuple[str, str], dict[str, list]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        groups[(r["stream"], r["learner"])][r["seed"]].append(
            (int(r["t"]), float(r["accuracy"]), float(r["windowed_accuracy"]))
        )
    written = []
    for (stream, learner), by_seed in sorted(groups.items()):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for seed, points in sorted(by_seed.items()):
            points.sort()
            ts = [p[0] for p in points]
            ax.plot(ts, [p[2] for p in points], lw=0.6, alpha=0.35, color="tab:orange")
            ax.plot(ts, [p[1] for p in points], lw=1.2, color="tab:blue", alpha=0.9)
        ax.set_xlabel("samples")
        ax.set_ylabel("accuracy")
        ax.set_ylim(0.0, 1.0)
        ax.set_title(f"{stream} / {learner} (blue: running, orange: last-{200} window)")
        ax.grid(alpha=0.3)
        path = out_dir / f"{_slug(stream)}__{_slug(learner)}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written


def render_detector_figures(confusion_csv, out_dir=None) -> list[Path]:
    """Bar chart of the detector confusion cells per stream."""
    confusion_csv = Path(confusion_csv)
    out_dir = Path(out_dir) if out_dir else confusion_csv.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _load_rows(confusion_csv)
    if not rows:
        return []
    streams = [r["stream"] for r in rows]
    fig, ax = plt.subplots(figsize=(max(6, 1.5 * len(rows)), 4.5))
    x = range(len(rows))
    width = 0.2
    for i, cell in enumerate(("tn", "fp", "fn", "tp")):
        vals = [int(r[cell]) for r in rows]
        ax.bar([xi + (i - 1.5) * width for xi in x], vals, width, label=cell.upper())
    ax.set_xticks(list(x))
    ax.set_xticklabels(streams, rotation=20, ha="right")
    ax.set_yscale("symlog")
    ax.set_ylabel("steps")
    ax.legend()
    ax.grid(alpha=0.3, axis="y")
    path = out_dir / f"{confusion_csv.stem}_confusion.png"
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def _slug(s: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in s)
