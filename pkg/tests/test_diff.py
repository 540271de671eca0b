import numpy as np
import pytest

from attrdiff import (
    AttributeMatrix,
    DimensionDiff,
    InsufficientSamplesError,
    ValidationError,
    compare,
    endpoint_direction,
    histogram,
    select_endpoint,
    select_window,
    wasserstein_1d,
)


def random_pair(rng, n_real=40, n_dev=30, d=6):
    scales = rng.uniform(0.2, 20, size=d)
    real = AttributeMatrix(rng.normal(size=(n_real, d)) * scales)
    dev = AttributeMatrix(rng.normal(size=(n_dev, d)) * scales + rng.normal(size=d))
    return real, dev


# -------------------------------------------------------------------- compare


def test_compare_matches_direct_distance_calls():
    rng = np.random.default_rng(0)
    real, dev = random_pair(rng)
    report = compare(real, dev, k=2)
    assert len(report.ranked) == real.n_dims
    for entry in report.ranked:
        direct = wasserstein_1d(real.column(entry.dim), dev.column(entry.dim))
        assert entry.raw_distance == direct  # same code path, zero drift


def test_compare_normalization_and_ranking():
    rng = np.random.default_rng(1)
    real, dev = random_pair(rng)
    report = compare(real, dev)
    scores = [e.score for e in report.ranked]
    assert scores == sorted(scores, reverse=True)
    for entry in report.ranked:
        if entry.sigma > 0:
            assert entry.normalized_distance == pytest.approx(
                entry.raw_distance / entry.sigma, rel=1e-12
            )
        assert entry.score == entry.normalized_distance

    raw_report = compare(real, dev, normalize=False)
    for entry in raw_report.ranked:
        assert entry.score == entry.raw_distance


def test_compare_constant_dimension_scores_zero():
    real = AttributeMatrix(np.column_stack([np.full(20, 3.0), np.arange(20.0)]))
    dev = AttributeMatrix(np.column_stack([np.full(15, 3.0), np.arange(15.0) + 5]))
    report = compare(real, dev, k=1)
    by_dim = {e.dim: e for e in report.ranked}
    assert by_dim[0].sigma == 0.0
    assert by_dim[0].normalized_distance == 0.0
    assert report.ranked[0].dim == 1


def test_compare_rank_ties_break_by_lower_dim():
    # Two identical dimensions produce identical scores.
    rng = np.random.default_rng(2)
    col_r = rng.normal(size=25)
    col_d = rng.normal(size=25) + 1
    real = AttributeMatrix(np.column_stack([col_r, col_r, col_r]))
    dev = AttributeMatrix(np.column_stack([col_d, col_d, col_d]))
    report = compare(real, dev)
    assert [e.dim for e in report.ranked] == [0, 1, 2]


def test_compare_threads_do_not_change_results():
    rng = np.random.default_rng(3)
    real, dev = random_pair(rng, d=17)
    single = compare(real, dev, threads=1)
    multi = compare(real, dev, threads=4)
    for a, b in zip(single.ranked, multi.ranked):
        assert (a.dim, a.raw_distance, a.score) == (b.dim, b.raw_distance, b.score)


def test_compare_detail_content():
    rng = np.random.default_rng(4)
    real, dev = random_pair(rng, d=5)
    report = compare(real, dev, k=3, bins=12, select_k=7)
    assert report.k == 3
    assert len(report.details) == 3
    for det, entry in zip(report.details, report.ranked):
        assert det.diff is entry
        assert det.histogram.counts_real.sum() == real.n_samples
        assert det.histogram.counts_dev.sum() == dev.n_samples
        assert det.histogram.counts_real.size == 12
        assert det.selection.indices.size == 7
        assert det.direction == endpoint_direction(entry)
        # No PCA: the direction vector is the one-hot axis.
        expected = np.zeros(real.n_dims)
        expected[entry.dim] = 1.0
        np.testing.assert_array_equal(det.direction_vector, expected)


def test_compare_k_and_select_k_clamped():
    rng = np.random.default_rng(5)
    real, dev = random_pair(rng, n_real=8, n_dev=6, d=2)
    report = compare(real, dev, k=10, select_k=50)
    assert report.k == 2
    assert report.select_k == 8
    assert report.details[0].selection.indices.size == 8


def test_compare_select_source_dev():
    rng = np.random.default_rng(6)
    real, dev = random_pair(rng)
    report = compare(real, dev, select_source="dev", k=1, select_k=5)
    sel = report.details[0].selection
    assert sel.source == "dev"
    assert sel.indices.max() < dev.n_samples


def test_compare_with_pca_reports_component_space():
    rng = np.random.default_rng(7)
    real, dev = random_pair(rng, n_real=60, n_dev=50, d=4)
    report = compare(real, dev, pca_threshold=0.99999, k=1)
    assert report.pca is not None
    assert report.n_dims == report.pca.n_components
    assert report.n_input_dims == 4
    det = report.details[0]
    np.testing.assert_array_equal(
        det.direction_vector, report.pca.components[det.diff.dim]
    )


def test_compare_validation():
    rng = np.random.default_rng(8)
    real, dev = random_pair(rng)
    with pytest.raises(ValidationError):
        compare(real, dev, k=0)
    with pytest.raises(ValidationError):
        compare(real, dev, select_k=0)
    with pytest.raises(ValidationError):
        compare(real, dev, threads=0)
    with pytest.raises(ValidationError):
        compare(real, dev, select_source="both")
    with pytest.raises(ValidationError):
        compare(real, dev, order=0.5)


# ------------------------------------------------------------------ histogram


def test_histogram_shared_edges():
    real = AttributeMatrix(np.array([[0.0], [1.0], [10.0]]))
    dev = AttributeMatrix(np.array([[-5.0], [2.0]]))
    hist = histogram(real, dev, 0, bins=5)
    assert hist.edges[0] == -5.0
    assert hist.edges[-1] == 10.0
    assert hist.edges.size == 6
    assert hist.counts_real.sum() == 3
    assert hist.counts_dev.sum() == 2


def test_histogram_degenerate_single_bin():
    real = AttributeMatrix(np.full((4, 1), 2.5))
    dev = AttributeMatrix(np.full((6, 1), 2.5))
    hist = histogram(real, dev, 0, bins=60)
    assert hist.counts_real.size == 1
    assert hist.counts_real[0] == 4
    assert hist.counts_dev[0] == 6
    assert hist.edges[0] < 2.5 < hist.edges[1]


def test_histogram_validation():
    m = AttributeMatrix([[1.0]])
    with pytest.raises(ValidationError):
        histogram(m, m, 0, bins=0)


# ------------------------------------------------------------------ selection


def test_select_endpoint_max_ordering_and_ties():
    values = np.array([[5.0], [1.0], [5.0], [3.0], [9.0]])
    m = AttributeMatrix(values, sample_ids=tuple("abcde"))
    sel = select_endpoint(m, 0, "max", 3)
    np.testing.assert_array_equal(sel.indices, [4, 0, 2])  # tie: index 0 first
    np.testing.assert_array_equal(sel.values, [9.0, 5.0, 5.0])
    assert sel.sample_ids == ("e", "a", "c")
    assert sel.mode == "endpoint"
    assert sel.direction == "max"


def test_select_endpoint_min_ordering():
    m = AttributeMatrix(np.array([[5.0], [1.0], [5.0], [3.0]]))
    sel = select_endpoint(m, 0, "min", 2)
    np.testing.assert_array_equal(sel.indices, [1, 3])
    assert list(sel.values) == [1.0, 3.0]


def test_select_endpoint_errors():
    m = AttributeMatrix(np.ones((3, 1)))
    with pytest.raises(InsufficientSamplesError):
        select_endpoint(m, 0, "max", 4)
    with pytest.raises(ValidationError):
        select_endpoint(m, 0, "sideways", 1)
    with pytest.raises(ValidationError):
        select_endpoint(m, 0, "max", 0)


def test_endpoint_direction_rule():
    def make(mean_real, mean_dev):
        return DimensionDiff(
            dim=0, raw_distance=1.0, normalized_distance=1.0, score=1.0,
            sigma=1.0, mean_real=mean_real, mean_dev=mean_dev,
        )

    assert endpoint_direction(make(2.0, 1.0)) == "max"
    assert endpoint_direction(make(1.0, 2.0)) == "min"
    assert endpoint_direction(make(1.0, 1.0)) == "max"  # tie goes to max


def test_select_window_inclusive_bounds():
    m = AttributeMatrix(np.array([[0.0], [1.0], [2.0], [3.0], [4.0]]))
    sel = select_window(m, 0, center=2.0, half_width=1.0, k=5)
    np.testing.assert_array_equal(sel.indices, [1, 2, 3])  # 1.0 and 3.0 included
    assert sel.short_count


def test_select_window_samples_by_seed():
    rng = np.random.default_rng(9)
    m = AttributeMatrix(rng.normal(size=(50, 1)))
    a = select_window(m, 0, center=0.0, half_width=2.0, k=5, seed=1)
    b = select_window(m, 0, center=0.0, half_width=2.0, k=5, seed=1)
    c = select_window(m, 0, center=0.0, half_width=2.0, k=5, seed=2)
    np.testing.assert_array_equal(a.indices, b.indices)
    assert not a.short_count
    assert a.indices.size == 5
    assert list(a.indices) != list(c.indices)
    # All picked values really lie inside the window.
    assert np.abs(a.values).max() <= 2.0


def test_select_window_empty_and_validation():
    m = AttributeMatrix(np.array([[0.0], [10.0]]))
    sel = select_window(m, 0, center=5.0, half_width=1.0, k=3)
    assert sel.indices.size == 0
    assert sel.short_count
    with pytest.raises(ValidationError):
        select_window(m, 0, center=0.0, half_width=0.0, k=1)
    with pytest.raises(ValidationError):
        select_window(m, 0, center=np.inf, half_width=1.0, k=1)
    with pytest.raises(ValidationError):
        select_window(m, 0, center=0.0, half_width=1.0, k=0)
