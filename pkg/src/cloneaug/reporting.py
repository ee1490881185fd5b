"""Render experiment and rating reports: text tables, CSVs, and figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .rating import CombinationScore, DurationClass, RatingCategory

_PNG_META = {"Software": "cloneaug"}

_CATEGORY_COLORS = {"poor": "#c0392b", "reasonable": "#e67e22", "good": "#27ae60"}


def render_wer_table(rows: Sequence[dict]) -> str:
    """Fixed-width table of (scenario, dropout, scorer, WER) rows."""
    header = ("Scenario", "Dropout", "Scorer", "WER")
    cells = [header] + [
        (
            str(row["scenario"]),
            str(row["dropout"]),
            str(row["scorer"]),
            f"{row['wer']:.3f}",
        )
        for row in rows
    ]
    widths = [max(len(c[i]) for c in cells) for i in range(4)]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)))
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def write_wer_csv(rows: Sequence[dict], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["scenario", "dropout", "scorer", "wer"])
        for row in rows:
            writer.writerow(
                [row["scenario"], row["dropout"], row["scorer"], f"{row['wer']:.3f}"]
            )


def plot_wer_by_scenario(rows: Sequence[dict], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [row["scenario"] for row in rows]
    values = [row["wer"] for row in rows]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    bars = ax.bar(names, values, color="#34495e")
    ax.bar_label(bars, fmt="%.3f", fontsize=8)
    ax.set_ylabel("WER")
    ax.set_title("Transcriber WER by training scenario")
    ax.set_ylim(0, max(values) * 1.2 if values else 1)
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def plot_filter_decisions(decisions: Sequence[dict], path: Path) -> None:
    """Generated vs original durations, colored by keep/discard verdict."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(5, 5))
    for verdict, color in (("keep", "#27ae60"), ("discard", "#c0392b")):
        xs = [d["original_duration"] for d in decisions if d["verdict"] == verdict]
        ys = [d["generated_duration"] for d in decisions if d["verdict"] == verdict]
        ax.scatter(xs, ys, s=12, alpha=0.6, color=color, label=verdict)
    limit = max(
        [d["original_duration"] for d in decisions]
        + [d["generated_duration"] for d in decisions]
        + [1.0]
    )
    ax.plot([0, limit], [0, limit], ls="--", lw=0.8, color="gray", label="equal")
    ax.set_xlabel("original duration (s)")
    ax.set_ylabel("generated duration (s)")
    ax.set_title("Duration-gap filter decisions")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def write_scores_csv(scores: Sequence[CombinationScore], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["combination", "num_rated", "score"]
            + [
                f"{dc.value}_{cat.value}"
                for dc in DurationClass
                for cat in RatingCategory
            ]
        )
        for score in scores:
            writer.writerow(
                [score.combination_name, score.num_rated, score.score]
                + [
                    score.by_duration_class[dc.value][cat.value]
                    for dc in DurationClass
                    for cat in RatingCategory
                ]
            )


def plot_scores(scores: Sequence[CombinationScore], path: Path) -> None:
    """Stacked category counts per combination, split standard vs long."""
    path.parent.mkdir(parents=True, exist_ok=True)
    names = [s.combination_name for s in scores]
    x = range(len(names))
    width = 0.38
    fig, ax = plt.subplots(figsize=(max(6, 1.4 * len(names)), 4))
    for offset, dc in ((-width / 2, "standard"), (width / 2, "long")):
        bottoms = [0] * len(names)
        for cat in ("poor", "reasonable", "good"):
            counts = [s.by_duration_class[dc][cat] for s in scores]
            ax.bar(
                [xi + offset for xi in x],
                counts,
                width,
                bottom=bottoms,
                color=_CATEGORY_COLORS[cat],
                label=f"{cat}" if dc == "standard" else None,
                hatch="//" if dc == "long" else None,
                edgecolor="white",
                linewidth=0.4,
            )
            bottoms = [b + c for b, c in zip(bottoms, counts)]
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("ratings (hatched = long duration)")
    ax.set_title("Rating categories by combination and duration class")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def render_run_report(run_dir: Path, out_dir: Path) -> list[Path]:
    """Render table/CSV/figures for a completed experiment run directory."""
    run_dir = Path(run_dir)
    report_path = run_dir / "report" / "report.json"
    if not report_path.is_file():
        raise FileNotFoundError(f"no report.json under {run_dir}; run the experiment")
    report = json.loads(report_path.read_text(encoding="utf-8"))
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    table = render_wer_table(report["rows"])
    (out_dir / "report.txt").write_text(table, encoding="utf-8")
    written.append(out_dir / "report.txt")
    write_wer_csv(report["rows"], out_dir / "report.csv")
    written.append(out_dir / "report.csv")
    plot_wer_by_scenario(report["rows"], out_dir / "figures" / "wer_by_scenario.png")
    written.append(out_dir / "figures" / "wer_by_scenario.png")
    decisions_path = run_dir / "filter" / "decisions.json"
    if decisions_path.is_file():
        decisions = json.loads(decisions_path.read_text(encoding="utf-8"))
        plot_filter_decisions(
            decisions, out_dir / "figures" / "filter_decisions.png"
        )
        written.append(out_dir / "figures" / "filter_decisions.png")
    return written


def render_session_report(scores: Sequence[CombinationScore], out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_scores_csv(scores, out_dir / "scores.csv")
    plot_scores(scores, out_dir / "figures" / "scores.png")
    return [out_dir / "scores.csv", out_dir / "figures" / "scores.png"]
