"""Report emission: JSON + CSV alongside rendered SVG figures.

Every writer here is deterministic: given the same inputs it produces
byte-identical files. JSON objects are built in fixed key order and
serialised with ``allow_nan=False`` (unscorable cells become ``null``),
CSV floats use the shortest round-trip representation, and figures are
rendered with a pinned ``svg.hashsalt`` and no timestamp metadata.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import __version__
from .diff import DiffReport, HistogramPair, SelectionResult
from .evaluate import P_GRID, BenchmarkResult

__all__ = [
    "render_benchmark",
    "render_distance_overview",
    "render_histogram",
    "save_figure",
    "write_benchmark",
    "write_diff_report",
    "write_histogram",
    "write_selection",
]

_SVG_SALT = "attrdiff"

_REAL_COLOR = "#1455b4"
_DEV_COLOR = "#d45500"


def _tool_block(seed: int | None = None) -> dict[str, Any]:
    block: dict[str, Any] = {"name": "attrdiff", "version": __version__}
    if seed is not None:
        block["seed"] = seed
    return block


def _fmt(value: float) -> str:
    return repr(float(value))


def _finite_or_none(value: float) -> float | None:
    value = float(value)
    return value if np.isfinite(value) else None


def _write_json(payload: dict[str, Any], path: Path) -> None:
    path.write_text(
        json.dumps(payload, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )


def _write_csv(lines: Iterable[str], path: Path, seed: int | None = None) -> None:
    stamp = f"# attrdiff {__version__}"
    if seed is not None:
        stamp += f" seed={seed}"
    path.write_text("\n".join([stamp, *lines]) + "\n", encoding="utf-8")


def save_figure(fig: plt.Figure, path: str | Path) -> None:
    """Write a figure as SVG with reproducible ids and no timestamp."""
    with plt.rc_context({"svg.hashsalt": _SVG_SALT}):
        fig.savefig(
            Path(path),
            format="svg",
            metadata={"Date": None, "Creator": f"attrdiff {__version__}"},
        )
    plt.close(fig)


def render_histogram(
    hist: HistogramPair, title: str | None = None
) -> plt.Figure:
    """Paired step histograms of one dimension over shared bins."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.stairs(
        hist.counts_real, hist.edges, fill=True, alpha=0.45,
        color=_REAL_COLOR, label="real",
    )
    ax.stairs(
        hist.counts_dev, hist.edges, fill=True, alpha=0.45,
        color=_DEV_COLOR, label="dev",
    )
    ax.set_xlabel(f"dimension {hist.dim} value")
    ax.set_ylabel("samples per bin")
    ax.set_title(title or f"dimension {hist.dim}")
    ax.legend(frameon=False)
    fig.tight_layout()
    return fig


def render_distance_overview(report: DiffReport, top: int = 32) -> plt.Figure:
    """Bar chart of the highest-ranked dimensions' scores."""
    shown = report.ranked[: min(top, len(report.ranked))]
    scores = [d.score for d in shown]
    names = [str(d.dim) for d in shown]
    fig, ax = plt.subplots(figsize=(max(4.0, 0.28 * len(shown) + 1.5), 3.6))
    ax.bar(range(len(shown)), scores, color=_REAL_COLOR)
    ax.set_xticks(range(len(shown)), names, rotation=90, fontsize=7)
    ax.set_xlabel("dimension (ranked)")
    kind = "normalized" if report.normalize else "raw"
    ax.set_ylabel(f"{kind} distance")
    ax.set_title(f"top {len(shown)} of {report.n_dims} dimensions")
    fig.tight_layout()
    return fig


def render_benchmark(result: BenchmarkResult) -> plt.Figure:
    """Mean aggregate score per method with per-trial points."""
    fig, ax = plt.subplots(figsize=(max(4.0, 1.1 * len(result.methods)), 3.6))
    means = result.mean_scores()
    for i, name in enumerate(result.methods):
        trials = result.aggregates[i]
        finite = trials[np.isfinite(trials)]
        ax.scatter(
            np.full(finite.size, i), finite, s=12, color=_DEV_COLOR, zorder=3
        )
        mean = means[name]
        if np.isfinite(mean):
            ax.bar(i, mean, width=0.6, color=_REAL_COLOR, alpha=0.7, zorder=2)
    ax.axhline(0.75, color="0.4", linewidth=1.0, linestyle="--")
    ax.set_xticks(range(len(result.methods)), result.methods, rotation=20)
    ax.set_ylim(0.0, 1.0)
    ax.set_ylabel("aggregate score")
    ax.set_title(f"{result.trials} trials (dashed: random expectation)")
    fig.tight_layout()
    return fig


def _selection_payload(sel: SelectionResult) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "source": sel.source,
        "mode": sel.mode,
        "dim": sel.dim,
        "direction": sel.direction,
        "requested": sel.requested,
        "short_count": sel.short_count,
        "indices": [int(i) for i in sel.indices],
    }
    payload["values"] = (
        [float(v) for v in sel.values] if sel.values is not None else None
    )
    payload["scores"] = (
        [float(s) for s in sel.scores] if sel.scores is not None else None
    )
    payload["sample_ids"] = list(sel.sample_ids) if sel.sample_ids else None
    return payload


def _selection_csv_lines(sel: SelectionResult) -> list[str]:
    lines = ["position,index,sample_id,value,score"]
    for pos, idx in enumerate(sel.indices):
        sid = sel.sample_ids[pos] if sel.sample_ids else ""
        value = _fmt(sel.values[pos]) if sel.values is not None else ""
        score = _fmt(sel.scores[pos]) if sel.scores is not None else ""
        lines.append(f"{pos},{int(idx)},{sid},{value},{score}")
    return lines


def _histogram_csv_lines(hist: HistogramPair) -> list[str]:
    lines = ["bin_lo,bin_hi,count_real,count_dev"]
    for b in range(hist.counts_real.size):
        lines.append(
            f"{_fmt(hist.edges[b])},{_fmt(hist.edges[b + 1])},"
            f"{int(hist.counts_real[b])},{int(hist.counts_dev[b])}"
        )
    return lines


def write_diff_report(
    report: DiffReport,
    out_dir: str | Path,
    real_path: str | None = None,
    dev_path: str | None = None,
) -> list[Path]:
    """Write the full diff report bundle into ``out_dir``.

    Emits ``report.json`` (everything), ``dimensions.csv`` (the ranking),
    ``directions.csv`` (raw-space direction vectors of detailed
    dimensions), plus per-detail histogram CSV/SVG files and a ranking
    overview figure. Returns the written paths in emission order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    pca_block = None
    if report.pca is not None:
        pca_block = {
            "threshold": report.pca.threshold,
            "n_components": report.pca.n_components,
            "n_input_dims": report.pca.n_input_dims,
            "explained_ratios": [float(r) for r in report.pca.explained_ratios],
        }
    payload: dict[str, Any] = {
        "tool": _tool_block(),
        "kind": "diff_report",
        "config": {
            "normalize": report.normalize,
            "order": report.order,
            "k": report.k,
            "bins": report.bins,
            "select_k": report.select_k,
            "select_source": report.select_source,
            "seed": report.seed,
            "pca": pca_block,
            "inputs": {"real": real_path, "dev": dev_path},
        },
        "n_real": report.n_real,
        "n_dev": report.n_dev,
        "n_dims": report.n_dims,
        "n_input_dims": report.n_input_dims,
        "ranking": [d.dim for d in report.ranked],
        "dimensions": [
            {
                "rank": rank,
                "dim": d.dim,
                "raw_distance": d.raw_distance,
                "normalized_distance": d.normalized_distance,
                "score": d.score,
                "sigma": d.sigma,
                "mean_real": d.mean_real,
                "mean_dev": d.mean_dev,
            }
            for rank, d in enumerate(report.ranked)
        ],
        "details": [
            {
                "dim": det.diff.dim,
                "direction": det.direction,
                "histogram": {
                    "edges": [float(e) for e in det.histogram.edges],
                    "counts_real": [int(c) for c in det.histogram.counts_real],
                    "counts_dev": [int(c) for c in det.histogram.counts_dev],
                },
                "selection": _selection_payload(det.selection),
                "direction_vector": [float(v) for v in det.direction_vector],
            }
            for det in report.details
        ],
    }
    path = out / "report.json"
    _write_json(payload, path)
    written.append(path)

    dim_lines = [
        "rank,dim,raw_distance,normalized_distance,score,sigma,mean_real,mean_dev"
    ]
    for rank, d in enumerate(report.ranked):
        dim_lines.append(
            f"{rank},{d.dim},{_fmt(d.raw_distance)},{_fmt(d.normalized_distance)},"
            f"{_fmt(d.score)},{_fmt(d.sigma)},{_fmt(d.mean_real)},{_fmt(d.mean_dev)}"
        )
    path = out / "dimensions.csv"
    _write_csv(dim_lines, path, seed=report.seed)
    written.append(path)

    dir_lines = ["dim,component,coefficient"]
    for det in report.details:
        for comp, coef in enumerate(det.direction_vector):
            dir_lines.append(f"{det.diff.dim},{comp},{_fmt(coef)}")
    path = out / "directions.csv"
    _write_csv(dir_lines, path, seed=report.seed)
    written.append(path)

    for det in report.details:
        path = out / f"hist_dim{det.diff.dim}.csv"
        _write_csv(_histogram_csv_lines(det.histogram), path, seed=report.seed)
        written.append(path)
        path = out / f"hist_dim{det.diff.dim}.svg"
        rank = payload["ranking"].index(det.diff.dim)
        save_figure(
            render_histogram(
                det.histogram,
                title=f"rank {rank}: dimension {det.diff.dim} "
                f"(score {det.diff.score:.4g})",
            ),
            path,
        )
        written.append(path)

    path = out / "distances.svg"
    save_figure(render_distance_overview(report), path)
    written.append(path)
    return written


def write_histogram(
    hist: HistogramPair,
    out_dir: str | Path,
    title: str | None = None,
    seed: int | None = None,
) -> list[Path]:
    """Write one histogram pair as ``hist_dim{dim}.csv`` + ``.svg``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"hist_dim{hist.dim}.csv"
    _write_csv(_histogram_csv_lines(hist), csv_path, seed=seed)
    svg_path = out / f"hist_dim{hist.dim}.svg"
    save_figure(render_histogram(hist, title=title), svg_path)
    return [csv_path, svg_path]


def write_selection(
    sel: SelectionResult, out_dir: str | Path, seed: int | None = None
) -> list[Path]:
    """Write one selection as ``selection.json`` + ``selection.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "tool": _tool_block(seed),
        "kind": "selection",
        "selection": _selection_payload(sel),
    }
    json_path = out / "selection.json"
    _write_json(payload, json_path)
    csv_path = out / "selection.csv"
    _write_csv(_selection_csv_lines(sel), csv_path, seed=seed)
    return [json_path, csv_path]


def write_benchmark(result: BenchmarkResult, out_dir: str | Path) -> list[Path]:
    """Write a benchmark bundle: JSON, summary/trial/cell CSVs, figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    means = result.mean_scores()
    stds = result.std_scores()
    payload: dict[str, Any] = {
        "tool": _tool_block(result.base_seed),
        "kind": "benchmark",
        "config": dict(result.config),
        "methods": list(result.methods),
        "p_grid": list(P_GRID),
        "aggregates": {
            m: [_finite_or_none(v) for v in result.aggregates[i]]
            for i, m in enumerate(result.methods)
        },
        "mean": {m: _finite_or_none(means[m]) for m in result.methods},
        "std": {m: _finite_or_none(stds[m]) for m in result.methods},
        "per_cell": {
            m: [
                [[_finite_or_none(v) for v in row] for row in trial]
                for trial in result.per_cell[i]
            ]
            for i, m in enumerate(result.methods)
        },
        "skipped": [list(cell) for cell in result.skipped],
    }
    path = out / "benchmark.json"
    _write_json(payload, path)
    written.append(path)

    lines = ["method,mean,std"]
    for m in result.methods:
        mean = _fmt(means[m]) if np.isfinite(means[m]) else ""
        std = _fmt(stds[m]) if np.isfinite(stds[m]) else ""
        lines.append(f"{m},{mean},{std}")
    path = out / "benchmark.csv"
    _write_csv(lines, path, seed=result.base_seed)
    written.append(path)

    lines = ["method,trial,aggregate"]
    for i, m in enumerate(result.methods):
        for t in range(result.trials):
            v = result.aggregates[i, t]
            lines.append(f"{m},{t},{_fmt(v) if np.isfinite(v) else ''}")
    path = out / "benchmark_trials.csv"
    _write_csv(lines, path, seed=result.base_seed)
    written.append(path)

    lines = ["method,trial,label,p,fraction"]
    for i, m in enumerate(result.methods):
        for t in range(result.trials):
            for label in (0, 1):
                for p_index, p in enumerate(P_GRID):
                    v = result.per_cell[i, t, label, p_index]
                    lines.append(
                        f"{m},{t},{label},{_fmt(p)},"
                        f"{_fmt(v) if np.isfinite(v) else ''}"
                    )
    path = out / "benchmark_cells.csv"
    _write_csv(lines, path, seed=result.base_seed)
    written.append(path)

    path = out / "benchmark.svg"
    save_figure(render_benchmark(result), path)
    written.append(path)
    return written
