"""Baseline sample-selection strategies for dataset comparison.

Each baseline answers the same question as the endpoint selection of the
diff engine — "which samples of the reference dataset are most
characteristic of how it differs from the dataset under inspection?" —
but from classic building blocks:

* :func:`lof_select` — Local Outlier Factor of each reference sample
  relative to the inspected dataset (density-ratio outlierness).
* :func:`kcenter_select` — greedy k-center coverage: repeatedly take the
  reference sample farthest from the inspected dataset and everything
  selected so far.
* :func:`fid_greedy_select` — greedily append reference samples to the
  inspected dataset so the Fréchet (Gaussian) distance to the reference
  dataset drops fastest.

All three are deterministic: every tie is broken towards the lower row
index, and scores are computed with plain dense linear algebra.
"""

from __future__ import annotations

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.distance import cdist

from .diff import SelectionResult
from .errors import DimensionMismatchError, InsufficientSamplesError, ValidationError
from .matrix import AttributeMatrix
from .ot import _sqrt_psd, gaussian_summary

__all__ = ["fid_greedy_select", "kcenter_select", "lof_select"]

# Candidate blocks for the batched covariance eigensolves are sized to keep
# the (block, d, d) scratch tensor near this many elements.
_BATCH_ELEMENTS = 2**24


def _check_pair(real: AttributeMatrix, dev: AttributeMatrix, k: int) -> None:
    if real.n_dims != dev.n_dims:
        raise DimensionMismatchError(
            f"column count mismatch: {real.n_dims} vs {dev.n_dims}"
        )
    if k < 1:
        raise ValidationError(f"selection size must be >= 1, got {k}")
    if k > real.n_samples:
        raise InsufficientSamplesError(
            f"cannot select {k} samples from {real.n_samples}"
        )


def _result(
    real: AttributeMatrix,
    mode: str,
    indices: NDArray[np.intp],
    scores: NDArray[np.float64],
    requested: int,
) -> SelectionResult:
    ids = None
    if real.sample_ids is not None:
        ids = tuple(real.sample_ids[i] for i in indices)
    return SelectionResult(
        source="real",
        mode=mode,
        indices=indices,
        requested=requested,
        scores=scores,
        sample_ids=ids,
    )


def _knn_rows(dist: NDArray[np.float64], k: int) -> NDArray[np.intp]:
    """Indices of each row's k smallest entries, distance then index order."""
    order = np.argsort(dist, axis=1, kind="stable")
    return order[:, :k].astype(np.intp)


def lof_select(
    real: AttributeMatrix,
    dev: AttributeMatrix,
    k: int,
    k_neighbors: int = 20,
) -> SelectionResult:
    """Select the ``k`` reference samples with the highest Local Outlier
    Factor with respect to the inspected dataset.

    The factor follows the textbook construction: k-distances and local
    reachability densities are estimated on ``dev`` (each point's own row
    excluded), then every ``real`` sample is scored as the ratio of its
    neighbours' mean density to its own. Densities over duplicate points
    yield inf/inf ratios, which score as exactly 1.0 (locally typical).
    Neighbour sets are the exactly-k nearest, ties to the lower index.
    """
    _check_pair(real, dev, k)
    if k_neighbors < 1:
        raise ValidationError(f"k_neighbors must be >= 1, got {k_neighbors}")
    if k_neighbors >= dev.n_samples:
        raise InsufficientSamplesError(
            f"k_neighbors={k_neighbors} needs at least {k_neighbors + 1} "
            f"inspected samples, got {dev.n_samples}"
        )

    dist_dd = cdist(dev.values, dev.values)
    np.fill_diagonal(dist_dd, np.inf)
    nn_dd = _knn_rows(dist_dd, k_neighbors)
    rows = np.arange(dev.n_samples)[:, None]
    k_dist = dist_dd[rows, nn_dd][:, -1]
    with np.errstate(divide="ignore"):
        reach_dd = np.maximum(k_dist[nn_dd], dist_dd[rows, nn_dd])
        lrd_dev = 1.0 / reach_dd.mean(axis=1)

    dist_rd = cdist(real.values, dev.values)
    nn_rd = _knn_rows(dist_rd, k_neighbors)
    qrows = np.arange(real.n_samples)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        reach_rd = np.maximum(k_dist[nn_rd], dist_rd[qrows, nn_rd])
        lrd_real = 1.0 / reach_rd.mean(axis=1)
        factors = lrd_dev[nn_rd].mean(axis=1) / lrd_real
    factors = np.where(np.isnan(factors), 1.0, factors)

    order = np.lexsort((np.arange(real.n_samples), -factors))
    indices = order[:k].astype(np.intp)
    return _result(real, "lof", indices, factors[indices].copy(), k)


def kcenter_select(
    real: AttributeMatrix,
    dev: AttributeMatrix,
    k: int,
) -> SelectionResult:
    """Greedy k-center selection of reference samples.

    The inspected dataset seeds the centre set; each step takes the
    reference sample with the largest distance to its nearest centre and
    promotes it to a centre. Scores are that covering distance at pick
    time. With all distances equal (e.g. identical datasets) the greedy
    argmax degenerates to ascending row order.
    """
    _check_pair(real, dev, k)
    min_dist = cdist(real.values, dev.values).min(axis=1)
    indices = np.empty(k, dtype=np.intp)
    scores = np.empty(k)
    for step in range(k):
        pick = int(np.argmax(min_dist))
        indices[step] = pick
        scores[step] = min_dist[pick]
        min_dist[pick] = -np.inf
        new_center = cdist(real.values, real.values[pick : pick + 1]).ravel()
        np.minimum(min_dist, new_center, out=min_dist, where=np.isfinite(min_dist))
    return _result(real, "kcenter", indices, scores, k)


def fid_greedy_select(
    real: AttributeMatrix,
    dev: AttributeMatrix,
    k: int,
) -> SelectionResult:
    """Greedily pick reference samples that pull the inspected dataset's
    Gaussian summary towards the reference dataset's.

    Each step evaluates, for every unselected reference sample, the Fréchet
    distance between Gauss(dev + picked so far + candidate) and
    Gauss(real), and keeps the argmin (ties to the lower index). Scores are
    the objective value after each pick. Sums and outer-product sums are
    maintained incrementally; candidate covariances are eigensolved in
    batches.
    """
    _check_pair(real, dev, k)
    if dev.n_samples < 2:
        raise InsufficientSamplesError(
            "need at least 2 inspected samples for a covariance"
        )
    target = gaussian_summary(real)
    root_t = _sqrt_psd(target.cov)
    trace_t = float(np.trace(target.cov))

    d = real.n_dims
    count = dev.n_samples
    sum_vec = dev.values.sum(axis=0)
    sum_outer = dev.values.T @ dev.values

    available = np.ones(real.n_samples, dtype=bool)
    indices = np.empty(k, dtype=np.intp)
    scores = np.empty(k)
    block = max(1, _BATCH_ELEMENTS // (d * d))

    for step in range(k):
        cand = np.flatnonzero(available)
        best_val = np.inf
        best_idx = -1
        for lo in range(0, cand.size, block):
            rows = cand[lo : lo + block]
            pts = real.values[rows]
            n_new = count + 1
            mean = (sum_vec + pts) / n_new
            cov = (
                sum_outer + pts[:, :, None] * pts[:, None, :]
            ) / n_new - mean[:, :, None] * mean[:, None, :]
            cross = root_t[None] @ cov @ root_t[None]
            eigvals = np.clip(np.linalg.eigvalsh(cross), 0.0, None)
            delta = mean - target.mean
            vals = (
                (delta * delta).sum(axis=1)
                + trace_t
                + np.trace(cov, axis1=1, axis2=2)
                - 2.0 * np.sqrt(eigvals).sum(axis=1)
            )
            local = int(np.argmin(vals))
            if vals[local] < best_val:
                best_val = float(vals[local])
                best_idx = int(rows[local])
        indices[step] = best_idx
        scores[step] = max(best_val, 0.0)
        available[best_idx] = False
        picked = real.values[best_idx]
        sum_vec = sum_vec + picked
        sum_outer = sum_outer + np.outer(picked, picked)
        count += 1
    return _result(real, "fid_greedy", indices, scores, k)
