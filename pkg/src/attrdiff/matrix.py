"""Core data model: attribute matrices, label vectors, pooled statistics.

An :class:`AttributeMatrix` is an ``(N, d)`` float64 array — one row per
sample, one column per latent attribute dimension — with optional per-row
string identifiers. All downstream computation (distances, diffing,
baselines, evaluation) consumes this type.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DimensionMismatchError, ValidationError

__all__ = ["AttributeMatrix", "LabelVector", "PooledStats", "pooled_stats"]


def _first_nonfinite(values: NDArray[np.float64]) -> tuple[int, int]:
    """Row/column of the first non-finite entry, in row-major order."""
    flat = np.flatnonzero(~np.isfinite(values))
    idx = int(flat[0])
    return idx // values.shape[1], idx % values.shape[1]


@dataclass(frozen=True, eq=False)
class AttributeMatrix:
    """Immutable ``(N, d)`` matrix of per-sample attribute values.

    Args:
        values: array-like of shape ``(N, d)``; coerced to a read-only,
            C-contiguous float64 copy. Every entry must be finite.
        sample_ids: optional sequence of ``N`` unique, non-empty row ids.

    Raises:
        ValidationError: on empty/misshaped input, non-finite entries
            (the message names the offending row and column), or bad ids.
    """

    values: NDArray[np.float64]
    sample_ids: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64, order="C", copy=True)
        if values.ndim != 2:
            raise ValidationError(
                f"attribute matrix must be 2-D, got {values.ndim}-D input"
            )
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValidationError(
                f"attribute matrix must have at least one row and one column, "
                f"got shape {values.shape}"
            )
        if not np.isfinite(values).all():
            row, col = _first_nonfinite(values)
            raise ValidationError(
                f"non-finite value at row {row}, column {col}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

        if self.sample_ids is not None:
            ids = tuple(str(s) for s in self.sample_ids)
            if len(ids) != values.shape[0]:
                raise ValidationError(
                    f"got {len(ids)} sample ids for {values.shape[0]} rows"
                )
            if any(not s for s in ids):
                raise ValidationError("sample ids must be non-empty strings")
            if len(set(ids)) != len(ids):
                seen: set[str] = set()
                dup = next(s for s in ids if s in seen or seen.add(s))  # type: ignore[func-returns-value]
                raise ValidationError(f"duplicate sample id {dup!r}")
            object.__setattr__(self, "sample_ids", ids)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    def column(self, dim: int) -> NDArray[np.float64]:
        """Read-only view of one attribute dimension across all samples."""
        if not 0 <= dim < self.n_dims:
            raise ValidationError(
                f"dimension {dim} out of range for matrix with {self.n_dims} columns"
            )
        return self.values[:, dim]

    def take_rows(self, indices: ArrayLike) -> "AttributeMatrix":
        """New matrix containing the given rows (ids carried along)."""
        idx = np.asarray(indices, dtype=np.intp)
        ids = None
        if self.sample_ids is not None:
            ids = tuple(self.sample_ids[i] for i in idx)
        return AttributeMatrix(self.values[idx], ids)


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Binary per-sample labels for one named attribute.

    ``labels`` pairs positionally with the rows of an
    :class:`AttributeMatrix` of the same length.
    """

    labels: NDArray[np.int64]
    attribute_name: str = field(default="attribute")

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] < 1:
            raise ValidationError("labels must be a non-empty 1-D sequence")
        if not np.isin(labels, (0, 1)).all():
            bad = labels[~np.isin(labels, (0, 1))][0]
            raise ValidationError(f"labels must be 0 or 1, got {bad!r}")
        labels = labels.astype(np.int64, copy=True)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if not self.attribute_name:
            raise ValidationError("attribute_name must be non-empty")

    def __len__(self) -> int:
        return int(self.labels.shape[0])


@dataclass(frozen=True, eq=False)
class PooledStats:
    """Per-dimension first/second moments of two matrices and their union.

    ``pooled_std`` is the population standard deviation (1/N normalisation)
    of the union multiset of both datasets' values in each dimension; it is
    exactly ``0.0`` wherever the union is constant.
    """

    mean_x: NDArray[np.float64]
    mean_y: NDArray[np.float64]
    pooled_mean: NDArray[np.float64]
    pooled_std: NDArray[np.float64]


def pooled_stats(a: AttributeMatrix, b: AttributeMatrix) -> PooledStats:
    """Compute :class:`PooledStats` for two matrices over shared dimensions.

    The pooled quantities are computed from per-matrix sums so that the
    result is exactly symmetric in ``a`` and ``b``.

    Raises:
        DimensionMismatchError: if the column counts differ.
    """
    if a.n_dims != b.n_dims:
        raise DimensionMismatchError(
            f"column count mismatch: {a.n_dims} vs {b.n_dims}"
        )
    nx, ny = a.n_samples, b.n_samples
    n = nx + ny
    mean_x = a.values.sum(axis=0) / nx
    mean_y = b.values.sum(axis=0) / ny
    pooled_mean = (a.values.sum(axis=0) + b.values.sum(axis=0)) / n
    ssq = ((a.values - pooled_mean) ** 2).sum(axis=0) + (
        (b.values - pooled_mean) ** 2
    ).sum(axis=0)
    pooled_std = np.sqrt(ssq / n)
    # A dimension that is constant across the union must report exactly 0,
    # immune to accumulated rounding in the sums above.
    lo = np.minimum(a.values.min(axis=0), b.values.min(axis=0))
    hi = np.maximum(a.values.max(axis=0), b.values.max(axis=0))
    pooled_std[lo == hi] = 0.0
    return PooledStats(
        mean_x=mean_x, mean_y=mean_y, pooled_mean=pooled_mean, pooled_std=pooled_std
    )
