"""Tests for probability-vector validation, norms, means, and grids."""

from __future__ import annotations

import math

import numpy as np
import pytest

from coalition_forge import (
    Forecast,
    LengthMismatch,
    NegativeEntry,
    NonPositiveWeight,
    SumOutOfTolerance,
    TooFewStates,
    grid_array,
    simplex_grid,
    two_norm,
    validate_forecast,
    weighted_mean,
)

from conftest import random_forecast


def test_validate_accepts_interior_point():
    f = validate_forecast([0.2, 0.8])
    assert isinstance(f, Forecast)
    assert f.probs == (0.2, 0.8)
    assert f.m == 2


def test_validate_accepts_vertex():
    f = validate_forecast([1.0, 0.0, 0.0])
    assert f.probs == (1.0, 0.0, 0.0)


def test_validate_accepts_tiny_rounding_slack():
    # Off by less than the 1e-9 budget: still a valid forecast.
    f = validate_forecast([0.3, 0.7 + 4e-10])
    assert math.isclose(sum(f.probs), 1.0, abs_tol=1e-9)


def test_validate_rejects_bad_sum():
    with pytest.raises(SumOutOfTolerance) as err:
        validate_forecast([0.5, 0.6])
    assert err.value.actual_sum == pytest.approx(1.1)


def test_validate_rejects_negative_entry():
    with pytest.raises(NegativeEntry):
        validate_forecast([-0.1, 1.1])


def test_validate_rejects_single_state():
    with pytest.raises(TooFewStates):
        validate_forecast([1.0])


def test_forecast_sequence_protocol():
    f = Forecast((0.1, 0.9))
    assert len(f) == 2
    assert f[1] == 0.9
    assert list(f) == [0.1, 0.9]
    np.testing.assert_array_equal(f.as_array(), np.array([0.1, 0.9]))


def test_two_norm_known_values():
    assert two_norm(Forecast((0.5, 0.5))) == pytest.approx(math.sqrt(0.5))
    assert two_norm(Forecast((1.0, 0.0))) == pytest.approx(1.0)
    assert two_norm(Forecast((0.1, 0.9))) == pytest.approx(0.9055385138137417)


def test_two_norm_bounds_on_random_forecasts():
    # Norm of a probability vector lies in [1/sqrt(m), 1], with the lower
    # bound attained at the uniform vector and the upper at a vertex.
    rng = np.random.default_rng(101)
    for _ in range(200):
        m = int(rng.integers(2, 5))
        f = random_forecast(rng, m)
        norm = two_norm(f)
        assert 1.0 / math.sqrt(m) - 1e-12 <= norm <= 1.0 + 1e-12
    assert two_norm(Forecast((1 / 3, 1 / 3, 1 / 3))) == pytest.approx(
        1.0 / math.sqrt(3)
    )


def test_weighted_mean_symmetric_pair():
    mean = weighted_mean(
        [Forecast((0.2, 0.8)), Forecast((0.8, 0.2))], [1.0, 1.0]
    )
    np.testing.assert_allclose(mean.as_array(), [0.5, 0.5])


def test_weighted_mean_unequal_weights():
    mean = weighted_mean(
        [Forecast((0.3, 0.7)), Forecast((0.5, 0.5))], [3.0, 1.0]
    )
    np.testing.assert_allclose(mean.as_array(), [0.35, 0.65])


def test_weighted_mean_single_forecast_is_identity():
    f = Forecast((0.25, 0.35, 0.4))
    np.testing.assert_allclose(weighted_mean([f], [2.0]).as_array(), f.as_array())


def test_weighted_mean_length_mismatch():
    with pytest.raises(LengthMismatch):
        weighted_mean([Forecast((0.5, 0.5))], [1.0, 1.0])


def test_weighted_mean_rejects_nonpositive_weight():
    with pytest.raises(NonPositiveWeight):
        weighted_mean(
            [Forecast((0.5, 0.5)), Forecast((0.4, 0.6))], [1.0, 0.0]
        )


def test_weighted_mean_stays_on_simplex():
    # Convexity: a weighted mean of forecasts is itself a valid forecast,
    # so construction must not raise for any random combination.
    rng = np.random.default_rng(202)
    for _ in range(200):
        m = int(rng.integers(2, 6))
        k = int(rng.integers(1, 5))
        forecasts = [random_forecast(rng, m) for _ in range(k)]
        weights = rng.uniform(0.1, 5.0, size=k).tolist()
        mean = weighted_mean(forecasts, weights)
        assert math.isclose(sum(mean.probs), 1.0, abs_tol=1e-9)
        assert min(mean.probs) >= 0.0


def test_simplex_grid_binary_resolution_two():
    points = simplex_grid(2, 2)
    assert [p.probs for p in points] == [
        (0.0, 1.0),
        (0.5, 0.5),
        (1.0, 0.0),
    ]


def test_simplex_grid_resolution_one_gives_vertices():
    points = simplex_grid(3, 1)
    assert {p.probs for p in points} == {
        (1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, 0.0, 1.0),
    }


def test_simplex_grid_counts_match_compositions():
    # Lattice size is C(resolution + m - 1, m - 1).
    for m in (2, 3, 4):
        for resolution in (1, 5, 12, 20):
            expected = math.comb(resolution + m - 1, m - 1)
            assert len(simplex_grid(m, resolution)) == expected


def test_grid_array_matches_grid_order():
    points = simplex_grid(3, 7)
    arr = grid_array(3, 7)
    assert arr.shape == (len(points), 3)
    np.testing.assert_allclose(
        arr, np.asarray([p.probs for p in points]), atol=1e-15
    )


def test_grid_points_are_valid_forecasts():
    for f in simplex_grid(4, 9):
        validate_forecast(list(f.probs))
