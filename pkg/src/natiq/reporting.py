"""Render evaluation results to files: JSON for machines, TSV for
spreadsheets, PNG charts for humans, and aligned diffs for error reading.

matplotlib loads lazily with the Agg backend so importing this module
stays cheap and headless boxes never try to open a display.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Mapping

from .evaluation import AlignmentTrace, EvalReport, is_real_time
from .mos import MosCell, MosStudy, aggregate_mos

OP_SYMBOLS = {"match": "=", "substitute": "~", "delete": "-", "insert": "+"}


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _cell_labels(keys: Iterable[tuple[str, str]]) -> list[str]:
    return [f"{model}\n{voice}" for model, voice in keys]


def write_eval_json(path: str | Path, report: EvalReport) -> Path:
    path = Path(path)
    path.write_text(
        json.dumps(report.to_dict(), ensure_ascii=False, indent=1), encoding="utf-8"
    )
    return path


def write_eval_tsv(path: str | Path, report: EvalReport) -> Path:
    path = Path(path)
    lines = ["model\tvoice\twer\tcer\trtf\treal_time\tn_utterances"]
    for r in report.rows:
        fmt = lambda v: "" if v is None else f"{v:.4f}"
        flag = "" if r.rtf is None else str(is_real_time(r.rtf)).lower()
        lines.append(
            f"{r.model}\t{r.voice}\t{fmt(r.wer)}\t{fmt(r.cer)}\t{fmt(r.rtf)}"
            f"\t{flag}\t{r.n_utterances}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_aligned_diff(
    path: str | Path,
    entries: Iterable[tuple[str, AlignmentTrace]],
) -> Path:
    """One block per utterance: a header line, then op rows as
    symbol<TAB>ref<TAB>hyp. Tokens keep their own columns so RTL text
    stays readable in any pager."""
    path = Path(path)
    blocks = []
    for utt_id, trace in entries:
        rows = [
            f"# {utt_id}  S={trace.substitutions} D={trace.deletions} "
            f"I={trace.insertions} N={trace.reference_length}"
        ]
        for op in trace.ops:
            rows.append(
                f"{OP_SYMBOLS[op.op]}\t{op.reference or ''}\t{op.hypothesis or ''}"
            )
        blocks.append("\n".join(rows))
    path.write_text("\n\n".join(blocks) + "\n", encoding="utf-8")
    return path


def error_rate_figure(path: str | Path, report: EvalReport) -> Path:
    plt = _plt()
    rows = [r for r in report.rows if r.wer is not None or r.cer is not None]
    labels = _cell_labels((r.model, r.voice) for r in rows)
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(rows)), 3.5))
    width = 0.38
    ax.bar([i - width / 2 for i in x], [r.wer or 0 for r in rows], width, label="WER")
    ax.bar([i + width / 2 for i in x], [r.cer or 0 for r in rows], width, label="CER")
    ax.set_xticks(list(x), labels)
    ax.set_ylabel("percent")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def rtf_figure(path: str | Path, report: EvalReport) -> Path:
    plt = _plt()
    rows = [r for r in report.rows if r.rtf is not None]
    labels = _cell_labels((r.model, r.voice) for r in rows)
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(rows)), 3.5))
    ax.bar(range(len(rows)), [r.rtf for r in rows], color="#4878a8")
    ax.axhline(1.0, color="#b0413e", linestyle="--", linewidth=1, label="real time")
    ax.set_xticks(range(len(rows)), labels)
    ax.set_ylabel("RTF")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def mos_figure(path: str | Path, cells: Mapping[tuple[str, str], MosCell]) -> Path:
    plt = _plt()
    keys = sorted(cells)
    labels = _cell_labels(keys)
    means = [cells[k].mean for k in keys]
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(keys)), 3.5))
    bars = ax.bar(range(len(keys)), means, color="#5d8a5e")
    for bar, key in zip(bars, keys):
        ax.annotate(
            f"n={cells[key].count}",
            (bar.get_x() + bar.get_width() / 2, bar.get_height()),
            ha="center", va="bottom", fontsize=8,
        )
    ax.set_xticks(range(len(keys)), labels)
    ax.set_ylim(1, 5.3)
    ax.set_ylabel("MOS")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def duration_histogram(
    path: str | Path, durations_s: Iterable[float], target_s: float | None = None
) -> Path:
    plt = _plt()
    durations = list(durations_s)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.hist(durations, bins=min(20, max(5, len(durations) // 5)), color="#4878a8")
    if target_s is not None:
        ax.axvline(target_s, color="#b0413e", linestyle="--", label=f"target {target_s:g}s")
        ax.legend()
    ax.set_xlabel("segment duration (s)")
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return Path(path)


def write_eval_outputs(
    out_dir: str | Path,
    report: EvalReport,
    diffs: Iterable[tuple[str, AlignmentTrace]] | None = None,
) -> list[Path]:
    """The standard bundle: eval.json + eval.tsv + charts, and the
    aligned diff when traces are supplied."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_eval_json(out / "eval.json", report),
        write_eval_tsv(out / "eval.tsv", report),
    ]
    if any(r.wer is not None or r.cer is not None for r in report.rows):
        written.append(error_rate_figure(out / "error_rates.png", report))
    if any(r.rtf is not None for r in report.rows):
        written.append(rtf_figure(out / "rtf.png", report))
    if diffs is not None:
        written.append(write_aligned_diff(out / "aligned_diff.txt", diffs))
    return written


def write_mos_outputs(out_dir: str | Path, study: MosStudy) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cells = aggregate_mos(study)
    payload = {
        "cells": [
            {"model": m, "voice": v, "mean": c.mean, "count": c.count}
            for (m, v), c in cells.items()
        ],
        "n_ratings": len(study.ratings),
        "n_pool": len(study.pool),
    }
    json_path = out / "mos.json"
    json_path.write_text(
        json.dumps(payload, ensure_ascii=False, indent=1), encoding="utf-8"
    )
    tsv_path = out / "mos.tsv"
    lines = ["model\tvoice\tmean\tcount"]
    for (m, v), c in cells.items():
        lines.append(f"{m}\t{v}\t{c.mean:.4f}\t{c.count}")
    tsv_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    written = [json_path, tsv_path]
    if cells:
        written.append(mos_figure(out / "mos.png", cells))
    return written
