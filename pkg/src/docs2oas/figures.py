"""Bar charts for evaluation and validation reports, written as PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluate import MetricsReport  # noqa: E402
from .validate import SyntaxSummary  # noqa: E402

# fixed metadata keeps the PNG bytes stable between runs
_PNG_META = {"Software": None}


def _bars(ax, labels: list[str], series: dict[str, list[float | None]], title: str) -> None:
    width = 0.8 / max(1, len(series))
    for i, (name, values) in enumerate(series.items()):
        xs = [x + i * width for x in range(len(labels))]
        ax.bar(xs, [v if v is not None else 0.0 for v in values], width, label=name)
    ax.set_xticks([x + width * (len(series) - 1) / 2 for x in range(len(labels))])
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.05)
    ax.set_title(title)
    ax.legend(fontsize="small")


def plot_e2e(reports: dict[str, MetricsReport], out: str | Path) -> Path:
    """P/R/F1/Sim per variant, request and response side by side."""
    cols = ("precision", "recall", "f1", "desc_similarity")
    labels = ["P", "R", "F1", "Sim"]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, side in zip(axes, ("request", "response")):
        series = {name: [getattr(r, side)[c] for c in cols] for name, r in reports.items()}
        _bars(ax, labels, series, side)
    fig.tight_layout()
    out = Path(out)
    fig.savefig(out, format="png", metadata=_PNG_META)
    plt.close(fig)
    return out


def plot_fields(reports: dict[str, MetricsReport], out: str | Path) -> Path:
    """Field precisions (required, type, location) per variant."""
    cols = ("required_precision", "type_precision", "location_precision")
    labels = ["Req", "Type", "Loc"]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
    for ax, side in zip(axes, ("request", "response")):
        series = {name: [getattr(r, side).get(c) for c in cols] for name, r in reports.items()}
        _bars(ax, labels, series, side)
    fig.tight_layout()
    out = Path(out)
    fig.savefig(out, format="png", metadata=_PNG_META)
    plt.close(fig)
    return out


def plot_syntax(summary: SyntaxSummary, out: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.bar(["valid JSON", "valid OAS"], [summary.valid_json_ratio, summary.valid_oas_ratio])
    ax.set_ylim(0, 1.05)
    ax.set_title(f"{summary.n_docs} documents, {summary.avg_warnings:.2f} warnings avg")
    fig.tight_layout()
    out = Path(out)
    fig.savefig(out, format="png", metadata=_PNG_META)
    plt.close(fig)
    return out
