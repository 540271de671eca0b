"""Pooled principal-component projection for attribute matrices.

Heterogeneous per-dimension scales let high-variance nuisance dimensions
drown out genuine distribution shifts, and rotations of the latent basis
smear a one-dimensional shift across many raw dimensions. Fitting a single
PCA on the union of both datasets and diffing in the rotated basis undoes
both effects: the comparison happens along the directions that actually
carry the pooled variance.

The component count is not fixed a priori: the model keeps the smallest
number of leading components whose cumulative explained-variance ratio
reaches the threshold (default 0.99999 — effectively "everything but noise
floor").
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatchError, MatrixFormatError, ValidationError
from .matrix import AttributeMatrix

__all__ = [
    "PcaModel",
    "fit_pca",
    "inverse_direction",
    "load_pca",
    "save_pca",
    "transform",
]

DEFAULT_THRESHOLD = 0.99999

_MAGIC = b"ADPC"
_VERSION = 1
_HEADER = struct.Struct("<4sIBQQd")  # magic, version, flags, k, d, threshold


@dataclass(frozen=True, eq=False)
class PcaModel:
    """A fitted pooled-PCA basis.

    ``components`` has orthonormal rows (checked to 1e-8), ordered by
    decreasing explained variance; ``explained_ratios`` are each
    component's share of the total pooled variance. Every row is
    sign-fixed so its largest-magnitude entry is positive (ties broken by
    lowest index), making fits reproducible across runs.
    """

    mean: NDArray[np.float64]
    components: NDArray[np.float64]
    explained_ratios: NDArray[np.float64]
    threshold: float

    def __post_init__(self) -> None:
        mean = np.asarray(self.mean, dtype=np.float64)
        comps = np.asarray(self.components, dtype=np.float64)
        ratios = np.asarray(self.explained_ratios, dtype=np.float64)
        if mean.ndim != 1 or comps.ndim != 2 or ratios.ndim != 1:
            raise ValidationError("malformed PCA model arrays")
        k, d = comps.shape
        if mean.size != d or ratios.size != k or k < 1:
            raise ValidationError(
                f"inconsistent PCA model shapes: mean {mean.size}, "
                f"components {comps.shape}, ratios {ratios.size}"
            )
        if not (
            np.isfinite(mean).all()
            and np.isfinite(comps).all()
            and np.isfinite(ratios).all()
        ):
            raise ValidationError("PCA model contains non-finite values")
        gram = comps @ comps.T
        if np.abs(gram - np.eye(k)).max() > 1e-8:
            raise ValidationError("PCA components are not orthonormal")
        if ratios.min() < -1e-12 or np.any(np.diff(ratios) > 1e-12):
            raise ValidationError("explained ratios must be non-increasing and >= 0")
        if not 0.0 < self.threshold <= 1.0:
            raise ValidationError(
                f"threshold must be in (0, 1], got {self.threshold!r}"
            )
        for arr in (mean, comps, ratios):
            arr.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "explained_ratios", ratios)

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])

    @property
    def n_input_dims(self) -> int:
        return int(self.components.shape[1])


def _fix_signs(components: NDArray[np.float64]) -> NDArray[np.float64]:
    # argmax over |row| returns the first maximum, giving the lowest-index
    # tie-break the determinism contract requires.
    lead = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(components.shape[0]), lead])
    signs[signs == 0] = 1.0
    return components * signs[:, None]


def fit_pca(
    a: AttributeMatrix,
    b: AttributeMatrix,
    threshold: float = DEFAULT_THRESHOLD,
) -> PcaModel:
    """Fit a PCA basis on the pooled rows of both matrices.

    Keeps the smallest ``k`` with cumulative explained ratio >= threshold
    (a 1e-12 slack absorbs rounding at exact thresholds). When the pooled
    row count is smaller than the dimension the eigenproblem is solved in
    sample space (Gram matrix) instead of feature space; the two routes
    agree on the retained components.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValidationError(f"threshold must be in (0, 1], got {threshold!r}")
    if a.n_dims != b.n_dims:
        raise DimensionMismatchError(
            f"column count mismatch: {a.n_dims} vs {b.n_dims}"
        )
    pooled = np.vstack([a.values, b.values])
    n, d = pooled.shape
    if n < 2:
        raise ValidationError("need at least 2 pooled samples to fit a PCA")
    mean = pooled.mean(axis=0)
    centered = pooled - mean
    total_variance = float((centered * centered).sum() / n)
    if total_variance == 0.0:
        raise ValidationError("pooled data has zero variance; nothing to fit")

    if d <= n:
        cov = centered.T @ centered / n
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals, kind="stable")[::-1]
        eigvals = eigvals[order]
        components = eigvecs[:, order].T
    else:
        gram = centered @ centered.T / n
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals, kind="stable")[::-1]
        eigvals = eigvals[order]
        eigvecs = eigvecs[:, order]
        keep = eigvals > 1e-12 * max(eigvals.max(), 1.0)
        eigvals = eigvals[keep]
        eigvecs = eigvecs[:, keep]
        # Map sample-space eigenvectors back to feature space; rows come out
        # orthonormal because the Gram eigenvectors are.
        components = (centered.T @ eigvecs / np.sqrt(n * eigvals)).T

    eigvals = np.clip(eigvals, 0.0, None)
    ratios = eigvals / total_variance
    cumulative = np.cumsum(ratios)
    k = int(np.searchsorted(cumulative, threshold - 1e-12) + 1)
    k = min(k, ratios.size)
    components = _fix_signs(np.ascontiguousarray(components[:k]))
    return PcaModel(
        mean=mean,
        components=components,
        explained_ratios=ratios[:k],
        threshold=float(threshold),
    )


def transform(model: PcaModel, matrix: AttributeMatrix) -> AttributeMatrix:
    """Project a matrix into the model's component space (ids preserved)."""
    if matrix.n_dims != model.n_input_dims:
        raise DimensionMismatchError(
            f"matrix has {matrix.n_dims} columns but model expects "
            f"{model.n_input_dims}"
        )
    projected = (matrix.values - model.mean) @ model.components.T
    return AttributeMatrix(projected, matrix.sample_ids)


def inverse_direction(model: PcaModel, component: int) -> NDArray[np.float64]:
    """Unit vector in raw attribute space for one retained component."""
    if not 0 <= component < model.n_components:
        raise ValidationError(
            f"component {component} out of range for model with "
            f"{model.n_components} components"
        )
    return model.components[component].copy()


def save_pca(model: PcaModel, path: str | Path) -> None:
    """Serialise a model to the binary ADPC container (little-endian f64)."""
    path = Path(path)
    k, d = model.components.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, 1, k, d, model.threshold))
        fh.write(model.mean.astype("<f8").tobytes())
        fh.write(np.ascontiguousarray(model.components.astype("<f8")).tobytes())
        fh.write(model.explained_ratios.astype("<f8").tobytes())


def load_pca(path: str | Path) -> PcaModel:
    """Load a model written by :func:`save_pca`."""
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise MatrixFormatError(f"{path.name}: file too short for header")
    magic, version, flags, k, d, threshold = _HEADER.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise MatrixFormatError(f"{path.name}: bad magic {magic!r}")
    if version != _VERSION:
        raise MatrixFormatError(f"{path.name}: unsupported version {version}")
    if flags != 1:
        raise MatrixFormatError(f"{path.name}: unknown flag bits 0x{flags:02x}")
    expected = _HEADER.size + 8 * (d + k * d + k)
    if len(blob) != expected:
        raise MatrixFormatError(
            f"{path.name}: expected {expected} bytes for a {k}x{d} model, "
            f"got {len(blob)}"
        )
    offset = _HEADER.size
    mean = np.frombuffer(blob, dtype="<f8", count=d, offset=offset).copy()
    offset += 8 * d
    comps = (
        np.frombuffer(blob, dtype="<f8", count=k * d, offset=offset)
        .reshape(k, d)
        .copy()
    )
    offset += 8 * k * d
    ratios = np.frombuffer(blob, dtype="<f8", count=k, offset=offset).copy()
    try:
        return PcaModel(
            mean=mean, components=comps, explained_ratios=ratios, threshold=threshold
        )
    except ValidationError as exc:
        raise MatrixFormatError(f"{path.name}: {exc}") from exc
