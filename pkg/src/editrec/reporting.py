"""Rendering evaluation reports: canonical JSON, CSV, and figures.

Figures use the Agg backend so the CLI works headless; every writer is
deterministic for a fixed report.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import MetricReport  # noqa: E402
from .model import EditType  # noqa: E402

logger = logging.getLogger(__name__)

_CLASS_NAMES = {
    EditType.KEEP.tag: "keep",
    EditType.INSERT.tag: "insert",
    EditType.REPLACE.tag: "replace",
}


def _as_dict(report: MetricReport | dict) -> dict:
    return report.to_dict() if isinstance(report, MetricReport) else report


def write_report_json(report: MetricReport | dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_as_dict(report), fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def flatten_metrics(report: MetricReport | dict) -> list[tuple[str, Any]]:
    """(name, value) rows for CSV output, sorted by name."""
    data = _as_dict(report)
    rows: list[tuple[str, Any]] = []

    def walk(prefix: str, value: Any):
        if isinstance(value, dict):
            for key, sub in value.items():
                name = _CLASS_NAMES.get(str(key), str(key))
                walk(f"{prefix}.{name}" if prefix else name, sub)
        else:
            rows.append((prefix, value))

    if "metrics" in data:
        walk("", data["metrics"])
    else:
        # Ablation payload: nested reports keyed by policy.
        for policy in ("selective", "random"):
            if policy in data:
                walk(policy, data[policy].get("metrics", {}))
        if "directional_ok" in data:
            rows.append(("directional_ok", data["directional_ok"]))
    rows.sort(key=lambda r: r[0])
    return rows


def write_report_csv(report: MetricReport | dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric", "value"])
        for name, value in flatten_metrics(report):
            writer.writerow([name, value])
    return path


# ===== Figures =====


def _per_k_series(metrics: dict, key: str) -> tuple[list[int], list[float]]:
    table = metrics.get(key, {})
    ks = sorted(int(k) for k in table)
    return ks, [table[k] if k in table else table[str(k)] for k in ks]


def render_generation_figure(report: MetricReport | dict,
                             out_dir: str | Path) -> Path:
    """EM rate and BLEU against candidate count, one panel each."""
    data = _as_dict(report)
    ks_em, em = _per_k_series(data["metrics"], "em")
    ks_bleu, bleu = _per_k_series(data["metrics"], "bleu")
    fig, (ax_em, ax_bleu) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_em.plot(ks_em, em, marker="o")
    ax_em.set_xlabel("candidates (k)")
    ax_em.set_ylabel("exact-match rate")
    ax_em.set_ylim(0.0, 1.05)
    ax_em.set_title("Exact match vs k")
    ax_bleu.plot(ks_bleu, bleu, marker="o", color="tab:orange")
    ax_bleu.set_xlabel("candidates (k)")
    ax_bleu.set_ylabel("BLEU-4")
    ax_bleu.set_ylim(0.0, 105.0)
    ax_bleu.set_title("BLEU-4 vs k")
    fig.tight_layout()
    out = Path(out_dir) / "generation_metrics.png"
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def render_ablation_figure(ablation: dict, out_dir: str | Path) -> Path:
    """Grouped bars: selective vs random prior choice at each k."""
    ks, selective = _per_k_series(ablation["selective"]["metrics"], "em")
    _, randomized = _per_k_series(ablation["random"]["metrics"], "em")
    width = 0.38
    xs = range(len(ks))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar([x - width / 2 for x in xs], selective, width, label="selective")
    ax.bar([x + width / 2 for x in xs], randomized, width, label="random")
    ax.set_xticks(list(xs))
    ax.set_xticklabels([str(k) for k in ks])
    ax.set_xlabel("candidates (k)")
    ax.set_ylabel("exact-match rate")
    ax.set_ylim(0.0, 1.05)
    ax.set_title("Prior selection ablation")
    ax.legend()
    fig.tight_layout()
    out = Path(out_dir) / "ablation.png"
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def render_scalar_figure(report: MetricReport | dict, out_dir: str | Path,
                         name: str) -> Path:
    """Bar chart of a report's scalar metrics (file or line location)."""
    data = _as_dict(report)
    rows = [
        (key, value)
        for key, value in flatten_metrics(data)
        if isinstance(value, (int, float)) and not isinstance(value, bool)
        and "failures" not in key and "skipped" not in key
    ]
    labels = [r[0] for r in rows]
    values = [float(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(rows)), 3.5))
    ax.bar(range(len(rows)), values, color="tab:blue")
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylim(0.0, 1.05 * max(values + [1.0]))
    ax.set_title(f"{data.get('task', name)} metrics")
    fig.tight_layout()
    out = Path(out_dir) / f"{name}.png"
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def render_figures(report: MetricReport | dict, out_dir: str | Path
                   ) -> list[Path]:
    """Render the figures appropriate to a report's shape."""
    data = _as_dict(report)
    if "selective" in data and "random" in data:
        return [render_ablation_figure(data, out_dir)]
    task = data.get("task", "")
    if task == "gen":
        return [render_generation_figure(data, out_dir)]
    if task in ("file_loc", "line_loc"):
        return [render_scalar_figure(data, out_dir, f"{task}_metrics")]
    logger.warning("no figure renderer for report shape, task=%r", task)
    return []
