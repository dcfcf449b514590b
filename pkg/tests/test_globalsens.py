import numpy as np
import pytest

from actsens import (
    InvalidBounds,
    ParameterCuboid,
    SamplingError,
    analyze_global,
    build_sample_matrices,
    evaluate_family,
    vbs_tsi,
)
from actsens.presets import family_evaluator, builtin_cuboid, row_validity

UNIT2 = ParameterCuboid.from_dict({"x1": (0.0, 1.0), "x2": (0.0, 1.0)})
UNIT3 = ParameterCuboid.from_dict({"x1": (0.0, 1.0), "x2": (0.0, 1.0),
                                   "x3": (0.0, 1.0)})
GRID = np.array([0.0, 1.0])


def constant_in_time(values):
    """Trajectory ensemble that repeats a per-row scalar at every time."""
    return np.repeat(np.asarray(values, dtype=float)[:, None], GRID.size, axis=1)


# ---------------------------------------------------------------------------
# sample-matrix construction
# ---------------------------------------------------------------------------


def test_single_parameter_swap_is_total_swap():
    cub = ParameterCuboid.from_dict({"x": (0.0, 1.0)})
    m = build_sample_matrices(cub, n=8, seed=3)
    assert np.array_equal(m.a_swapped[0], m.b)
    assert np.array_equal(m.b_swapped[0], m.a)


def test_matrices_are_deterministic_and_in_bounds():
    cub = ParameterCuboid.from_dict({"x1": (-1.0, 2.0), "x2": (5.0, 6.0)})
    m1 = build_sample_matrices(cub, n=4, seed=11)
    m2 = build_sample_matrices(cub, n=4, seed=11)
    assert np.array_equal(m1.a, m2.a) and np.array_equal(m1.b, m2.b)
    assert np.array_equal(m1.a_swapped, m2.a_swapped)
    for arr in (m1.a, m1.b):
        assert np.all(arr >= cub.lower) and np.all(arr <= cub.upper)
    m3 = build_sample_matrices(cub, n=4, seed=12)
    assert not np.array_equal(m1.a, m3.a)


def test_swap_structure():
    m = build_sample_matrices(UNIT3, n=16, seed=0)
    for i in range(3):
        other = [j for j in range(3) if j != i]
        assert np.array_equal(m.a_swapped[i][:, other], m.a[:, other])
        assert np.array_equal(m.a_swapped[i][:, i], m.b[:, i])
        assert np.array_equal(m.b_swapped[i][:, other], m.b[:, other])
        assert np.array_equal(m.b_swapped[i][:, i], m.a[:, i])


def test_invalid_bounds_rejected_but_degenerate_allowed():
    with pytest.raises(InvalidBounds):
        ParameterCuboid.from_dict({"x": (1.0, 0.0)})
    cub = ParameterCuboid.from_dict({"x1": (0.0, 1.0), "x2": (0.7, 0.7)})
    m = build_sample_matrices(cub, n=8, seed=1)
    assert np.all(m.a[:, 1] == 0.7) and np.all(m.b[:, 1] == 0.7)


def test_validity_predicate_holds_for_all_swaps():
    validity = row_validity("hatze")
    cub = builtin_cuboid("hatze")
    m = build_sample_matrices(cub, n=64, seed=7, validity=validity)
    names = cub.names
    for block in (m.a, m.b, *m.a_swapped, *m.b_swapped):
        for row in block:
            assert validity(dict(zip(names, row)))


def test_halton_sampler_deterministic_and_valid():
    cub = builtin_cuboid("zajac")
    m1 = build_sample_matrices(cub, n=16, seed=5, sampler="halton",
                               validity=row_validity("zajac"))
    m2 = build_sample_matrices(cub, n=16, seed=5, sampler="halton",
                               validity=row_validity("zajac"))
    assert np.array_equal(m1.a, m2.a)
    assert np.all(m1.a >= cub.lower) and np.all(m1.a <= cub.upper)


def test_impossible_validity_raises():
    cub = ParameterCuboid.from_dict({"x": (0.0, 1.0)})
    with pytest.raises(SamplingError):
        build_sample_matrices(cub, n=2, seed=0, validity=lambda row: False,
                              max_draws=50)


# ---------------------------------------------------------------------------
# family evaluation
# ---------------------------------------------------------------------------


def test_constant_model_gives_identical_trajectories_and_zero_variance():
    m = build_sample_matrices(UNIT2, n=32, seed=2)
    fam = evaluate_family(lambda rows, grid: np.full((rows.shape[0], grid.size), 3.5),
                          m, GRID)
    assert fam.n_evaluations == 2 * 32 * (2 + 1)
    assert np.all(fam.pooled() == 3.5)
    res = vbs_tsi(fam, m)
    assert np.all(res.undefined)
    assert np.all(np.isnan(res.vbs))


def test_evaluation_count_matches_sample_arithmetic():
    cub = builtin_cuboid("zajac")  # N = 5
    m = build_sample_matrices(cub, n=16, seed=0, validity=row_validity("zajac"))
    fam = evaluate_family(family_evaluator("zajac"), m, np.linspace(0.0, 0.2, 5))
    assert fam.n_evaluations == 16 * 2 * (5 + 1)


def test_failed_rows_are_resampled_not_zero_filled():
    m = build_sample_matrices(UNIT2, n=16, seed=9)
    state = {"calls": 0}

    def flaky(rows, grid):
        state["calls"] += 1
        out = np.repeat(rows[:, :1], grid.size, axis=1)
        if state["calls"] == 1:  # first pass: rows with small x1 fail
            out[rows[:, 0] < 0.4] = np.nan
        return out

    fam = evaluate_family(flaky, m, GRID)
    assert np.all(np.isfinite(fam.pooled()))
    assert len(fam.resampled_rows) > 0


def test_unrecoverable_rows_raise():
    m = build_sample_matrices(UNIT2, n=4, seed=9)

    def broken(rows, grid):
        return np.full((rows.shape[0], grid.size), np.nan)

    with pytest.raises(SamplingError):
        evaluate_family(broken, m, GRID, max_retries=2)


# ---------------------------------------------------------------------------
# variance decomposition on analytic models
# ---------------------------------------------------------------------------


def _global(fun, cuboid, n=2048, seed=17):
    m = build_sample_matrices(cuboid, n=n, seed=seed)
    fam = evaluate_family(lambda rows, grid: constant_in_time(fun(rows)), m, GRID)
    return vbs_tsi(fam, m)


def test_identity_map_attributes_all_variance_to_its_parameter():
    res = _global(lambda rows: rows[:, 0], UNIT3)
    assert res.vbs[0, 0] == pytest.approx(1.0, abs=0.05)
    assert res.tsi[0, 0] == pytest.approx(1.0, abs=0.05)
    for i in (1, 2):
        assert abs(res.vbs[i, 0]) < 0.05
        assert abs(res.tsi[i, 0]) < 0.05


def test_additive_model_splits_variance_evenly():
    res = _global(lambda rows: rows[:, 0] + rows[:, 1], UNIT2)
    for i in range(2):
        assert res.vbs[i, 0] == pytest.approx(0.5, abs=0.05)
        assert res.tsi[i, 0] == pytest.approx(0.5, abs=0.05)


def test_pure_interaction_model_has_no_first_order_share():
    res = _global(lambda rows: (rows[:, 0] - 0.5) * (rows[:, 1] - 0.5), UNIT2)
    for i in range(2):
        assert abs(res.vbs[i, 0]) < 0.05
        assert res.tsi[i, 0] == pytest.approx(1.0, abs=0.05)


def test_degenerate_column_has_no_effect():
    cub = ParameterCuboid.from_dict({"x1": (0.0, 1.0), "x2": (0.7, 0.7)})
    res = _global(lambda rows: rows[:, 0] + rows[:, 1], cub)
    assert res.vbs[1, 0] == pytest.approx(0.0, abs=1e-12)
    assert res.tsi[1, 0] == pytest.approx(0.0, abs=0.05)
    assert res.vbs[0, 0] == pytest.approx(1.0, abs=0.05)


def test_index_bounds_and_consistency():
    res = _global(lambda rows: rows[:, 0] + 0.3 * rows[:, 1] * rows[:, 2], UNIT3)
    assert np.all(res.v_total >= 0.0)
    assert np.all(res.vbs >= 0.0) and np.all(res.vbs <= 1.05)
    assert np.all(res.tsi >= 0.0)
    assert res.vbs[:, 0].sum() <= 1.05
    assert res.tsi[:, 0].sum() >= 0.95
    assert np.all(res.tsi[:, 0] >= res.vbs[:, 0] - 0.05)


def test_global_analysis_is_bit_reproducible():
    cub = builtin_cuboid("zajac")
    grid = np.linspace(0.0, 0.2, 6)
    kw = dict(n=32, seed=123, grid=grid, validity=row_validity("zajac"))
    r1 = analyze_global(family_evaluator("zajac"), cub, **kw)
    r2 = analyze_global(family_evaluator("zajac"), cub, **kw)
    assert np.array_equal(r1.vbs, r2.vbs)
    assert np.array_equal(r1.tsi, r2.tsi)
    assert np.array_equal(r1.v_total, r2.v_total)
