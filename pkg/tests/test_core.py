import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from betting_tests.core import (
    ConfigurationError,
    GeometryBounds,
    IngestionError,
    NullSpec,
    RunningStats,
    StreamSpec,
    atomic_write_text,
    check_observation,
    update_stats,
)
from betting_tests.experiments import generate, one_axis_stream


def test_geometry_invariants():
    GeometryBounds(2, 0.7, 0.9)
    with pytest.raises(ConfigurationError):
        GeometryBounds(0, 1.0, 1.0)
    with pytest.raises(ConfigurationError):
        GeometryBounds(1, 0.5, 1.5)  # D > 2B
    with pytest.raises(ConfigurationError):
        GeometryBounds(1, -1.0, 0.0)
    with pytest.raises(ConfigurationError):
        GeometryBounds(1, 0.0, 0.0).require_positive_B()


def test_null_spec_coercion():
    assert NullSpec.coerce("one_sided") is NullSpec.ONE_SIDED
    assert NullSpec.FUNCTIONAL_ONE_SIDED.one_sided and NullSpec.FUNCTIONAL_ONE_SIDED.functional
    with pytest.raises(ConfigurationError):
        NullSpec.coerce("sideways")


def test_update_stats_zero_input():
    g = GeometryBounds(2, 1.0, 2.0)
    s = update_stats(RunningStats.empty(2), np.zeros(2), g)
    assert s.n == 1
    np.testing.assert_array_equal(s.mean, [0.0, 0.0])


def test_update_stats_arithmetic():
    g = GeometryBounds(2, 1.0, 2.0)
    s = RunningStats(1, np.array([1.0, 0.0]), np.zeros(2), np.zeros(2))
    s = update_stats(s, [0.0, 1.0], g)
    np.testing.assert_allclose(s.mean, [0.5, 0.5])


def test_update_stats_conditional_sums_only_when_given():
    g = GeometryBounds(1, 1.0, 2.0)
    s = update_stats(RunningStats.empty(1), [0.5], g, cond_mean=[0.25], cond_sq=[0.1, 0.1])
    s = update_stats(s, [0.5], g)
    np.testing.assert_allclose(s.sum_cond_mean, [0.25])
    np.testing.assert_allclose(s.sum_cond_sq, [0.1, 0.1])
    assert s.n == 2


def test_one_axis_noiseless_mean_is_constant():
    # a = 0: (m / n) * sum_t t^0 = m for every n
    sample = generate(one_axis_stream(0.4, 0.0, 0.0, 2, T=50), 1)
    np.testing.assert_allclose(sample.cond_mean, np.tile([0.4, 0.0], (50, 1)))
    running = np.cumsum(sample.cond_mean, axis=0) / np.arange(1, 51)[:, None]
    np.testing.assert_allclose(running[:, 0], 0.4)


def test_norm_violation_is_an_error():
    g = GeometryBounds(2, 0.7, 0.9)
    with pytest.raises(IngestionError, match="exceeds bound"):
        update_stats(RunningStats.empty(2), [0.7, 0.1], g)
    with pytest.raises(IngestionError):
        check_observation([np.nan, 0.0], g)
    with pytest.raises(IngestionError):
        check_observation([0.1, 0.1, 0.1], g)


def test_floating_point_boundary_is_accepted():
    g = GeometryBounds(1, 0.7, 0.9)
    check_observation([0.5 + 0.2], g)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (20, 3), elements=st.floats(-1, 1)))
def test_empirical_mean_stays_in_ball(raw):
    g = GeometryBounds(3, 1.0, 2.0)
    X = raw / np.maximum(1.0, np.linalg.norm(raw, axis=1, keepdims=True))
    s = RunningStats.empty(3)
    for x in X:
        s = update_stats(s, x, g)
        assert np.linalg.norm(s.mean) <= g.B * (1 + 1e-12)


def test_final_sums_are_permutation_invariant(rng):
    g = GeometryBounds(2, 1.0, 2.0)
    X = rng.uniform(-0.7, 0.7, size=(30, 2))

    def final_mean(rows):
        s = RunningStats.empty(2)
        for x in rows:
            s = update_stats(s, x, g)
        return s.mean

    reference = final_mean(X)
    for _ in range(100):
        np.testing.assert_allclose(final_mean(X[rng.permutation(30)]), reference, rtol=0, atol=1e-15)


def test_stream_spec_validates_horizon():
    with pytest.raises(ConfigurationError):
        StreamSpec("one-axis", {}, T=0)


def test_atomic_write_replaces_file(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "first")
    atomic_write_text(target, "second")
    assert target.read_text() == "second"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]
