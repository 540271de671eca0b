import numpy as np
import pytest

from attrdiff import (
    InsufficientSamplesError,
    LabelVector,
    P_GRID,
    SplitSpec,
    SynthConfig,
    ValidationError,
    aggregate_score,
    make_split,
    run_benchmark,
    score_selection,
    synth_generate,
)


def test_p_grid_values():
    assert P_GRID == (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5)


# ----------------------------------------------------------------- make_split


def balanced_labels(n_zero, n_one):
    return np.array([0] * n_zero + [1] * n_one, dtype=np.int64)


@pytest.mark.parametrize("p", P_GRID)
def test_split_counts_mirror(p):
    labels = balanced_labels(700, 700)
    spec = SplitSpec(p=p, n_per_dataset=500, seed=3)
    dev, real = make_split(labels, spec)
    assert dev.size == real.size == 500
    dev_zero = int((labels[dev] == 0).sum())
    real_zero = int((labels[real] == 0).sum())
    # round-half-up counts
    assert dev_zero == int(np.floor(p * 500 + 0.5))
    assert real_zero == int(np.floor((1 - p) * 500 + 0.5))


def test_split_disjoint_sorted_deterministic():
    labels = balanced_labels(400, 420)
    spec = SplitSpec(p=0.3, n_per_dataset=300, seed=11)
    dev1, real1 = make_split(labels, spec)
    dev2, real2 = make_split(labels, spec)
    np.testing.assert_array_equal(dev1, dev2)
    np.testing.assert_array_equal(real1, real2)
    assert np.all(np.diff(dev1) > 0)
    assert np.all(np.diff(real1) > 0)
    assert not set(dev1.tolist()) & set(real1.tolist())

    dev3, _ = make_split(labels, SplitSpec(p=0.3, n_per_dataset=300, seed=12))
    assert dev3.tolist() != dev1.tolist()


def test_split_odd_n_round_half_up():
    labels = balanced_labels(200, 200)
    dev, real = make_split(labels, SplitSpec(p=0.05, n_per_dataset=101, seed=0))
    # 0.05 * 101 = 5.05 -> 5; 0.95 * 101 = 95.95 -> 96
    assert int((labels[dev] == 0).sum()) == 5
    assert int((labels[real] == 0).sum()) == 96


def test_split_insufficient_pool():
    labels = balanced_labels(100, 500)
    with pytest.raises(InsufficientSamplesError):
        make_split(labels, SplitSpec(p=0.5, n_per_dataset=200, seed=0))


def test_split_accepts_label_vector():
    vec = LabelVector(balanced_labels(50, 50), "attr")
    dev, real = make_split(vec, SplitSpec(p=0.0, n_per_dataset=30, seed=0))
    assert (vec.labels[dev] == 1).all()  # p=0: dev is pure label-1
    assert (vec.labels[real] == 0).all()


def test_split_spec_validation():
    with pytest.raises(ValidationError):
        SplitSpec(p=1.5)
    with pytest.raises(ValidationError):
        SplitSpec(p=0.2, n_per_dataset=0)


# ------------------------------------------------------------------- scoring


def test_score_selection_fraction():
    labels = np.array([0, 0, 1, 1, 1])
    assert score_selection(labels, [0, 1, 2, 3], 0) == 0.5
    assert score_selection(labels, [2, 3, 4], 1) == 1.0
    assert score_selection(labels, [4], 0) == 0.0


def test_score_selection_validation():
    labels = np.array([0, 1])
    with pytest.raises(ValidationError):
        score_selection(labels, [], 0)
    with pytest.raises(ValidationError):
        score_selection(labels, [0], 2)


def test_aggregate_score_mean_and_validation():
    grid = np.full((2, 11), 0.75)
    grid[0, 0] = 1.0
    grid[1, 10] = 0.5
    assert aggregate_score(grid) == pytest.approx((0.75 * 20 + 1.0 + 0.5) / 22)
    with pytest.raises(ValidationError):
        aggregate_score(np.ones((2, 10)))
    bad = np.full((2, 11), 0.5)
    bad[0, 0] = np.nan
    with pytest.raises(ValidationError):
        aggregate_score(bad)
    bad2 = np.full((2, 11), 0.5)
    bad2[1, 3] = 1.5
    with pytest.raises(ValidationError):
        aggregate_score(bad2)


def test_random_selection_calibrates_near_three_quarters():
    # E[score] = mean over the grid of (1 - p) = 0.75 exactly.
    rng = np.random.default_rng(0)
    labels = balanced_labels(1400, 1400)
    rng.shuffle(labels)
    totals = []
    for trial in range(20):
        for label in (0, 1):
            split_labels = labels if label == 0 else 1 - labels
            for p_index, p in enumerate(P_GRID):
                spec = SplitSpec(p=p, n_per_dataset=500, seed=(trial, label, p_index))
                _, real_idx = make_split(split_labels, spec)
                picked = rng.choice(real_idx.size, size=10, replace=False)
                totals.append(score_selection(labels[real_idx], picked, label))
    assert np.mean(totals) == pytest.approx(0.75, abs=0.02)


# ------------------------------------------------------------- synth_generate


def test_synth_shapes_and_labels():
    cfg = SynthConfig(d=12, n=100, planted_dims=(2, 5), delta=1.5, seed=4)
    out = synth_generate(cfg)
    assert out.matrix.n_samples == 260  # ceil(2.6 * n)
    assert out.matrix.n_dims == 12
    assert out.labels.labels.shape == (260,)
    assert set(np.unique(out.labels.labels)) <= {0, 1}
    assert out.planted_directions.shape == (2, 12)
    assert out.scales.shape == (12,)
    np.testing.assert_array_equal(out.scales[[2, 5]], [1.0, 1.0])


def test_synth_planted_shift_present():
    cfg = SynthConfig(d=8, n=2000, planted_dims=(3,), delta=2.0, seed=5)
    out = synth_generate(cfg)
    vals = out.matrix.column(3)
    lab = out.labels.labels
    gap = vals[lab == 1].mean() - vals[lab == 0].mean()
    assert gap == pytest.approx(2.0, abs=0.15)
    # Unplanted dims carry no shift.
    other = out.matrix.column(0)
    assert abs(other[lab == 1].mean() - other[lab == 0].mean()) < 0.15
    # One-hot ground-truth direction without rotation.
    np.testing.assert_array_equal(
        out.planted_directions[0], np.eye(8)[3]
    )


def test_synth_scale_laws():
    cfg = SynthConfig(
        d=2000, n=2, planted_dims=(0,), scale_law="uniform",
        scale_min=2.0, scale_max=6.0, seed=6,
    )
    out = synth_generate(cfg, n_rows=2)
    scales = out.scales[1:]
    assert scales.min() >= 2.0 and scales.max() <= 6.0
    assert abs(scales.mean() - 4.0) < 0.2  # uniform mean

    cfg_log = SynthConfig(
        d=2000, n=2, planted_dims=(0,), scale_law="log_uniform",
        scale_min=1.0, scale_max=100.0, seed=6,
    )
    log_scales = np.log(synth_generate(cfg_log, n_rows=2).scales[1:])
    assert abs(log_scales.mean() - np.log(100.0) / 2) < 0.2


def test_synth_rotation_hides_axis_and_reports_direction():
    cfg = SynthConfig(
        d=10, n=3000, planted_dims=(0,), delta=3.0, rotate_dims=4, seed=7
    )
    out = synth_generate(cfg)
    direction = out.planted_directions[0]
    assert np.linalg.norm(direction) == pytest.approx(1.0, rel=1e-12)
    # The shift now lives along `direction`, not along any single axis.
    lab = out.labels.labels
    proj = out.matrix.values @ direction
    gap = proj[lab == 1].mean() - proj[lab == 0].mean()
    assert gap == pytest.approx(3.0, abs=0.2)
    per_axis = np.abs(
        out.matrix.values[lab == 1].mean(axis=0)
        - out.matrix.values[lab == 0].mean(axis=0)
    )
    assert per_axis.max() < 0.9 * gap
    # Dimensions outside the rotated block are untouched one-hot noise.
    assert np.abs(direction[4:]).max() == 0.0


def test_synth_seed_override_and_determinism():
    cfg = SynthConfig(d=6, n=50, seed=1)
    a = synth_generate(cfg)
    b = synth_generate(cfg)
    np.testing.assert_array_equal(a.matrix.values, b.matrix.values)
    c = synth_generate(cfg, seed=(1, 2, 3))
    assert not np.array_equal(a.matrix.values, c.matrix.values)
    d2 = synth_generate(cfg, seed=(1, 2, 3))
    np.testing.assert_array_equal(c.matrix.values, d2.matrix.values)


def test_synth_config_validation():
    with pytest.raises(ValidationError):
        SynthConfig(d=4, planted_dims=(4,))
    with pytest.raises(ValidationError):
        SynthConfig(planted_dims=())
    with pytest.raises(ValidationError):
        SynthConfig(planted_dims=(0, 0))
    with pytest.raises(ValidationError):
        SynthConfig(scale_law="exponential")
    with pytest.raises(ValidationError):
        SynthConfig(scale_min=0.0)
    with pytest.raises(ValidationError):
        SynthConfig(scale_min=3.0, scale_max=2.0)
    with pytest.raises(ValidationError):
        SynthConfig(delta=-1.0)
    with pytest.raises(ValidationError):
        SynthConfig(d=8, planted_dims=(0, 1), rotate_dims=1)
    with pytest.raises(ValidationError):
        SynthConfig(d=8, rotate_dims=9)


# -------------------------------------------------------------- run_benchmark


def small_config():
    return SynthConfig(d=6, n=60, planted_dims=(0,), delta=2.5, seed=0)


def test_benchmark_shapes_and_determinism():
    res1 = run_benchmark(
        ["stylediff", "random"], config=small_config(), trials=2,
        base_seed=5, n_select=5,
    )
    res2 = run_benchmark(
        ["stylediff", "random"], config=small_config(), trials=2,
        base_seed=5, n_select=5,
    )
    assert res1.per_cell.shape == (2, 2, 2, 11)
    np.testing.assert_array_equal(res1.per_cell, res2.per_cell)
    np.testing.assert_array_equal(res1.aggregates, res2.aggregates)
    assert res1.skipped == ()
    assert np.isfinite(res1.per_cell).all()
    assert set(res1.mean_scores()) == {"stylediff", "random"}
    for value in res1.mean_scores().values():
        assert 0.0 <= value <= 1.0


def test_benchmark_separates_methods_on_strong_signal():
    res = run_benchmark(
        ["stylediff", "random"],
        config=SynthConfig(d=6, n=80, planted_dims=(0,), delta=4.0, seed=1),
        trials=2, base_seed=0, n_select=8,
    )
    scores = res.mean_scores()
    assert scores["stylediff"] > scores["random"]
    assert scores["stylediff"] > 0.85


def test_benchmark_fixed_pool():
    from attrdiff import AttributeMatrix

    rng = np.random.default_rng(8)
    n = 130
    values = rng.normal(size=(n, 4))
    labels = LabelVector((np.arange(n) % 2 == 0).astype(np.int64), "parity")
    res = run_benchmark(
        ["random"],
        pool=AttributeMatrix(values),
        labels=labels,
        trials=1, n_per_dataset=60, n_select=4,
    )
    assert res.per_cell.shape == (1, 1, 2, 11)
    assert np.isfinite(res.per_cell).all()
    assert res.config["pool_rows"] == n


def test_benchmark_skips_infeasible_cells():
    rng = np.random.default_rng(9)
    values = rng.normal(size=(100, 3))
    labels = LabelVector(
        np.array([0] * 20 + [1] * 80, dtype=np.int64), "rare"
    )
    from attrdiff import AttributeMatrix

    res = run_benchmark(
        ["random"], pool=AttributeMatrix(values), labels=labels,
        trials=1, n_per_dataset=40, n_select=3,
    )
    assert res.skipped  # label-0 pool (20) cannot fill every mix
    for trial, label, p_index in res.skipped:
        assert np.isnan(res.per_cell[0, trial, label, p_index])
    assert np.isnan(res.aggregates).any()


def test_benchmark_validation():
    with pytest.raises(ValidationError):
        run_benchmark(["random"])  # neither config nor pool
    with pytest.raises(ValidationError):
        run_benchmark(["not_a_method"], config=small_config())
    with pytest.raises(ValidationError):
        run_benchmark([], config=small_config())
    with pytest.raises(ValidationError):
        run_benchmark(["random"], config=small_config(), trials=0)
    from attrdiff import AttributeMatrix

    pool = AttributeMatrix(np.zeros((4, 2)) + np.arange(4)[:, None])
    with pytest.raises(ValidationError):
        run_benchmark(["random"], pool=pool, labels=None)
    with pytest.raises(ValidationError):
        run_benchmark(
            ["random"], pool=pool,
            labels=LabelVector(np.array([0, 1]), "x"),
        )
    with pytest.raises(ValidationError):
        run_benchmark(["random"], config=small_config(), pool=pool)
