"""The diff engine: rank attribute dimensions by distribution shift.

Given a reference dataset (``real``) and a dataset under inspection
(``dev``), :func:`compare` computes the exact 1-D Wasserstein distance
between the two value distributions of every attribute dimension, divides
each by the pooled per-dimension scale (unless disabled), and ranks
dimensions by the resulting score. For the top-ranked dimensions it builds
paired histograms, an automatic endpoint selection of exemplar samples,
and the raw-space direction vector of the dimension, ready for rendering.

Scale normalisation matters because latent attribute dimensions routinely
differ in scale by orders of magnitude; an unnormalised ranking is
dominated by whichever dimensions happen to be widest, not by whichever
actually shifted. Optionally the comparison runs in a pooled PCA basis
(see :mod:`attrdiff.pca`) to undo rotations of the latent space.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import InsufficientSamplesError, ValidationError
from .matrix import AttributeMatrix, pooled_stats
from .ot import wasserstein_1d
from .pca import PcaModel, fit_pca, inverse_direction, transform

__all__ = [
    "DiffReport",
    "DimensionDetail",
    "DimensionDiff",
    "HistogramPair",
    "SelectionResult",
    "compare",
    "endpoint_direction",
    "histogram",
    "select_endpoint",
    "select_window",
]


@dataclass(frozen=True, eq=False)
class DimensionDiff:
    """Distance summary for one attribute dimension.

    ``score`` is the value the ranking sorted by: ``normalized_distance``
    when normalisation is on, ``raw_distance`` otherwise.
    """

    dim: int
    raw_distance: float
    normalized_distance: float
    score: float
    sigma: float
    mean_real: float
    mean_dev: float


@dataclass(frozen=True, eq=False)
class HistogramPair:
    """Shared-bin histograms of one dimension in both datasets."""

    dim: int
    edges: NDArray[np.float64]
    counts_real: NDArray[np.int64]
    counts_dev: NDArray[np.int64]


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Ordered sample indices chosen from one dataset.

    ``indices`` index rows of the source matrix, most relevant first.
    ``values`` holds the selected rows' value in the selection dimension
    (endpoint/window modes), ``scores`` the per-index score for strategies
    that have one (baselines). ``short_count`` is set when a window had
    fewer qualifying samples than requested.
    """

    source: str
    mode: str
    indices: NDArray[np.intp]
    requested: int
    dim: int | None = None
    direction: str | None = None
    values: NDArray[np.float64] | None = None
    scores: NDArray[np.float64] | None = None
    sample_ids: tuple[str, ...] | None = None
    short_count: bool = False


@dataclass(frozen=True, eq=False)
class DimensionDetail:
    """Everything the report renders for one top-ranked dimension."""

    diff: DimensionDiff
    direction: str
    histogram: HistogramPair
    selection: SelectionResult
    direction_vector: NDArray[np.float64]


@dataclass(frozen=True, eq=False)
class DiffReport:
    """Complete output of :func:`compare`.

    ``ranked`` is the full permutation of compared dimensions in ranking
    order (ties broken by lower dimension index); ``details`` covers the
    first ``k`` of them. When a PCA basis was used, dimension indices refer
    to components of ``pca`` and ``n_input_dims`` records the raw width.
    """

    ranked: tuple[DimensionDiff, ...]
    details: tuple[DimensionDetail, ...]
    normalize: bool
    order: float
    k: int
    bins: int
    select_k: int
    select_source: str
    seed: int
    pca: PcaModel | None
    n_real: int
    n_dev: int
    n_dims: int
    n_input_dims: int


def endpoint_direction(diff: DimensionDiff) -> str:
    """Which end of the dimension to sample exemplars from.

    The end nearer the reference dataset's mean: ``"max"`` when the real
    mean is at least the dev mean, else ``"min"``.
    """
    return "max" if diff.mean_real >= diff.mean_dev else "min"


def histogram(
    real: AttributeMatrix, dev: AttributeMatrix, dim: int, bins: int = 60
) -> HistogramPair:
    """Histogram one dimension of both datasets over shared bin edges.

    Bins span the pooled min/max so the two count arrays are directly
    comparable. A dimension that is constant across the union degenerates
    to a single bin of width 1 centred on the value.
    """
    if bins < 1:
        raise ValidationError(f"bins must be >= 1, got {bins}")
    x = real.column(dim)
    y = dev.column(dim)
    lo = min(x.min(), y.min())
    hi = max(x.max(), y.max())
    if lo == hi:
        edges = np.array([lo - 0.5, hi + 0.5])
    else:
        edges = np.linspace(lo, hi, bins + 1)
    counts_real, _ = np.histogram(x, bins=edges)
    counts_dev, _ = np.histogram(y, bins=edges)
    return HistogramPair(
        dim=dim,
        edges=edges,
        counts_real=counts_real.astype(np.int64),
        counts_dev=counts_dev.astype(np.int64),
    )


def select_endpoint(
    matrix: AttributeMatrix,
    dim: int,
    direction: str,
    k: int,
    source: str = "real",
) -> SelectionResult:
    """The ``k`` samples with the most extreme values in one dimension.

    ``direction="max"`` returns the largest values in non-increasing order,
    ``"min"`` the smallest in non-decreasing order; equal values are
    ordered by lower row index.
    """
    if direction not in ("min", "max"):
        raise ValidationError(f"direction must be 'min' or 'max', got {direction!r}")
    if k < 1:
        raise ValidationError(f"selection size must be >= 1, got {k}")
    if k > matrix.n_samples:
        raise InsufficientSamplesError(
            f"cannot select {k} samples from {matrix.n_samples}"
        )
    values = matrix.column(dim)
    key = -values if direction == "max" else values
    order = np.lexsort((np.arange(matrix.n_samples), key))
    indices = order[:k].astype(np.intp)
    ids = None
    if matrix.sample_ids is not None:
        ids = tuple(matrix.sample_ids[i] for i in indices)
    return SelectionResult(
        source=source,
        mode="endpoint",
        indices=indices,
        requested=k,
        dim=dim,
        direction=direction,
        values=values[indices].copy(),
        sample_ids=ids,
    )


def select_window(
    matrix: AttributeMatrix,
    dim: int,
    center: float,
    half_width: float,
    k: int,
    seed: int = 0,
    source: str = "real",
) -> SelectionResult:
    """Sample ``k`` rows whose value in ``dim`` lies within a closed window.

    Qualifying rows satisfy ``|value - center| <= half_width``. When more
    than ``k`` qualify, ``k`` are drawn without replacement with the given
    seed (result in draw order); when at most ``k`` qualify, all of them
    are returned in row order and ``short_count`` flags an under-filled
    window.
    """
    if not np.isfinite(center):
        raise ValidationError("window center must be finite")
    if not half_width > 0:
        raise ValidationError(f"half_width must be > 0, got {half_width!r}")
    if k < 1:
        raise ValidationError(f"selection size must be >= 1, got {k}")
    values = matrix.column(dim)
    candidates = np.flatnonzero(np.abs(values - center) <= half_width)
    if candidates.size <= k:
        indices = candidates.astype(np.intp)
        short = candidates.size < k
    else:
        rng = np.random.default_rng(seed)
        indices = rng.choice(candidates, size=k, replace=False).astype(np.intp)
        short = False
    ids = None
    if matrix.sample_ids is not None:
        ids = tuple(matrix.sample_ids[i] for i in indices)
    return SelectionResult(
        source=source,
        mode="window",
        indices=indices,
        requested=k,
        dim=dim,
        values=values[indices].copy(),
        sample_ids=ids,
        short_count=short,
    )


def _column_distances(
    real: NDArray[np.float64],
    dev: NDArray[np.float64],
    order: float,
    threads: int,
) -> NDArray[np.float64]:
    """Per-column :func:`wasserstein_1d`, optionally over a thread pool.

    Each column is computed independently into a preallocated slot, so the
    result is identical for every thread count.
    """
    d = real.shape[1]
    out = np.empty(d)

    def run(block: range) -> None:
        for c in block:
            out[c] = wasserstein_1d(real[:, c], dev[:, c], order)

    if threads <= 1 or d == 1:
        run(range(d))
        return out
    step = -(-d // threads)
    blocks = [range(lo, min(lo + step, d)) for lo in range(0, d, step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for future in [pool.submit(run, b) for b in blocks]:
            future.result()
    return out


def compare(
    real: AttributeMatrix,
    dev: AttributeMatrix,
    *,
    normalize: bool = True,
    order: float = 2,
    k: int = 3,
    bins: int = 60,
    select_k: int = 10,
    select_source: str = "real",
    pca_threshold: float | None = None,
    seed: int = 0,
    threads: int = 1,
) -> DiffReport:
    """Rank every attribute dimension by distribution shift between datasets.

    Args:
        real: reference dataset.
        dev: dataset under inspection.
        normalize: rank by sigma-normalised distance (default) instead of
            raw distance. Dimensions with zero pooled scale score 0.
        order: Wasserstein order (p >= 1, default 2).
        k: number of top dimensions to detail (histograms, selections);
            clamped to the number of compared dimensions.
        bins: histogram bin count.
        select_k: exemplar count per detailed dimension; clamped to the
            source dataset's row count.
        select_source: which dataset exemplars are drawn from
            (``"real"`` or ``"dev"``).
        pca_threshold: if set, fit a pooled PCA at this explained-variance
            threshold and diff component scores instead of raw dimensions.
        seed: recorded in the report; reserved for seeded selection modes.
        threads: worker threads for the per-dimension distance sweep.
            Never changes results, only wall time.

    Returns:
        A :class:`DiffReport` with the full ranking and per-dimension
        detail for the top ``k``.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if select_k < 1:
        raise ValidationError(f"select_k must be >= 1, got {select_k}")
    if threads < 1:
        raise ValidationError(f"threads must be >= 1, got {threads}")
    if select_source not in ("real", "dev"):
        raise ValidationError(
            f"select_source must be 'real' or 'dev', got {select_source!r}"
        )

    model: PcaModel | None = None
    work_real, work_dev = real, dev
    if pca_threshold is not None:
        model = fit_pca(real, dev, pca_threshold)
        work_real = transform(model, real)
        work_dev = transform(model, dev)

    stats = pooled_stats(work_real, work_dev)
    d = work_real.n_dims
    raw = _column_distances(work_real.values, work_dev.values, order, threads)
    normalized = np.divide(
        raw, stats.pooled_std, out=np.zeros(d), where=stats.pooled_std > 0
    )
    scores = normalized if normalize else raw
    ranking = np.lexsort((np.arange(d), -scores))

    ranked = tuple(
        DimensionDiff(
            dim=int(c),
            raw_distance=float(raw[c]),
            normalized_distance=float(normalized[c]),
            score=float(scores[c]),
            sigma=float(stats.pooled_std[c]),
            mean_real=float(stats.mean_x[c]),
            mean_dev=float(stats.mean_y[c]),
        )
        for c in ranking
    )

    source = work_real if select_source == "real" else work_dev
    effective_k = min(k, d)
    effective_select = min(select_k, source.n_samples)
    details = []
    for dd in ranked[:effective_k]:
        direction = endpoint_direction(dd)
        hist = histogram(work_real, work_dev, dd.dim, bins)
        selection = select_endpoint(
            source, dd.dim, direction, effective_select, select_source
        )
        if model is not None:
            vector = inverse_direction(model, dd.dim)
        else:
            vector = np.zeros(d)
            vector[dd.dim] = 1.0
        details.append(
            DimensionDetail(
                diff=dd,
                direction=direction,
                histogram=hist,
                selection=selection,
                direction_vector=vector,
            )
        )

    return DiffReport(
        ranked=ranked,
        details=tuple(details),
        normalize=normalize,
        order=float(order),
        k=effective_k,
        bins=bins,
        select_k=effective_select,
        select_source=select_source,
        seed=seed,
        pca=model,
        n_real=real.n_samples,
        n_dev=dev.n_samples,
        n_dims=d,
        n_input_dims=real.n_dims,
    )
