"""Attribute-wise distribution diffing for embedding datasets.

Given two datasets represented as rows of latent attribute vectors, this
package locates the attribute dimensions whose one-dimensional distributions
differ most (exact per-dimension Wasserstein distances), renders paired
histograms and sample selections for inspection, and ships baseline
selection strategies plus a synthetic benchmark harness for head-to-head
comparison.
"""

__version__ = "0.1.0"

from .errors import (
    AttrDiffError,
    DimensionMismatchError,
    InsufficientSamplesError,
    MatrixFormatError,
    ValidationError,
)
from .matrix import AttributeMatrix, LabelVector, PooledStats, pooled_stats
from .adif import load_labels, load_matrix, save_matrix
from .ot import (
    GaussianSummary,
    SinkhornResult,
    TransportPlan,
    frechet_gaussian,
    gaussian_summary,
    lp_transport_oracle,
    normalized_wasserstein_1d,
    sinkhorn_cost,
    wasserstein_1d,
)
from .pca import (
    DEFAULT_THRESHOLD,
    PcaModel,
    fit_pca,
    inverse_direction,
    load_pca,
    save_pca,
    transform,
)
from .diff import (
    DiffReport,
    DimensionDetail,
    DimensionDiff,
    HistogramPair,
    SelectionResult,
    compare,
    endpoint_direction,
    histogram,
    select_endpoint,
    select_window,
)
from .baselines import fid_greedy_select, kcenter_select, lof_select
from .evaluate import (
    DEFAULT_METHODS,
    P_GRID,
    STANDARD_BENCHMARK,
    BenchmarkResult,
    SplitSpec,
    SynthConfig,
    SynthResult,
    aggregate_score,
    make_split,
    run_benchmark,
    score_selection,
    synth_generate,
)

__all__ = [
    "AttrDiffError",
    "AttributeMatrix",
    "BenchmarkResult",
    "DEFAULT_METHODS",
    "DEFAULT_THRESHOLD",
    "DiffReport",
    "DimensionDetail",
    "DimensionDiff",
    "DimensionMismatchError",
    "GaussianSummary",
    "HistogramPair",
    "InsufficientSamplesError",
    "LabelVector",
    "MatrixFormatError",
    "P_GRID",
    "PcaModel",
    "PooledStats",
    "STANDARD_BENCHMARK",
    "SelectionResult",
    "SinkhornResult",
    "SplitSpec",
    "SynthConfig",
    "SynthResult",
    "TransportPlan",
    "ValidationError",
    "aggregate_score",
    "compare",
    "endpoint_direction",
    "fid_greedy_select",
    "fit_pca",
    "frechet_gaussian",
    "gaussian_summary",
    "histogram",
    "inverse_direction",
    "kcenter_select",
    "load_labels",
    "load_matrix",
    "load_pca",
    "lof_select",
    "lp_transport_oracle",
    "make_split",
    "normalized_wasserstein_1d",
    "pooled_stats",
    "run_benchmark",
    "save_matrix",
    "save_pca",
    "score_selection",
    "select_endpoint",
    "select_window",
    "sinkhorn_cost",
    "synth_generate",
    "transform",
    "wasserstein_1d",
]
