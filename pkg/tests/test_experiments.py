import hashlib
import math

import numpy as np
import pytest
from scipy import stats

from betting_tests.bounds import adversarial_stream
from betting_tests.core import ConfigurationError
from betting_tests.experiments import (
    brier_diff,
    centered_null_stream,
    forecaster_stream,
    generate,
    henzi_bet,
    henzi_log_wealth,
    henzi_mixture,
    henzi_name,
    make_rng,
    monte_carlo_tau,
    one_axis_stream,
    sample_uniform_ball,
    spiral_stream,
    strategy_log_wealth,
)


# ---------------------------------------------------------------- sampling

@pytest.mark.parametrize("d", [1, 3, 10])
def test_uniform_ball_norm_and_mean(d):
    rng = make_rng(3)
    x = sample_uniform_ball(d, 0.2, rng, 10**5)
    assert x.shape == (10**5, d)
    assert np.linalg.norm(x, axis=-1).max() <= 0.2
    sigma = 0.2 / math.sqrt(d + 2) / math.sqrt(10**5)
    assert np.all(np.abs(x.mean(axis=0)) <= 4 * sigma)


def test_uniform_ball_radius_distribution_d1():
    x = sample_uniform_ball(1, 0.2, make_rng(11), 10**5)
    assert stats.kstest(np.abs(x[:, 0]) / 0.2, "uniform").pvalue > 0.01


def test_uniform_ball_rejects_bad_radius():
    with pytest.raises(ConfigurationError):
        sample_uniform_ball(2, 0.0, make_rng(0))


def test_make_rng_validates_seed():
    with pytest.raises(ConfigurationError):
        make_rng(-1)
    assert make_rng(5).random() == make_rng(5).random()


# ---------------------------------------------------------------- streams

def test_one_axis_noiseless_mean_and_bounds():
    sample = generate(one_axis_stream(0.4, 0.0, 0.0, 3, seed=1, T=1000), 100)
    np.testing.assert_array_equal(sample.cond_mean, np.tile([0.4, 0.0, 0.0], (1000, 1)))
    assert np.linalg.norm(sample.X, axis=-1).max() <= 0.7
    np.testing.assert_allclose(sample.v, 0.16 + 0.04)


def test_one_axis_null_and_ranges():
    sample = generate(one_axis_stream(0.0, 0.3, 0.2, 2, T=10), 3)
    np.testing.assert_array_equal(sample.cond_mean, 0.0)
    for bad in (dict(m=0.5, a=0, b=0), dict(m=0.1, a=1.0, b=0), dict(m=0.1, a=0, b=-0.1)):
        with pytest.raises(ConfigurationError):
            one_axis_stream(d=2, **bad)


def test_one_axis_second_moment_sequence():
    m, a, b = 0.3, 0.2, 0.4
    sample = generate(one_axis_stream(m, a, b, 2, T=50), 1)
    t = np.arange(1, 51)
    np.testing.assert_allclose(sample.v, np.cumsum(m**2 * t ** (-2 * a) + t ** (-2 * b) / 25) / t)


def test_spiral_mean_and_bounds():
    sample = generate(spiral_stream(0.4, 0.3, 50, T=1000), 100)
    t = np.arange(1, 1001)
    np.testing.assert_allclose(np.linalg.norm(sample.cond_mean, axis=-1), 0.4 * t**-0.3)
    assert np.linalg.norm(sample.X, axis=-1).max() <= 0.5
    wide = generate(spiral_stream(0.4, 0.0, 10**6, T=5), 1).cond_mean
    assert np.all(wide[:, 0] > 0.399) and np.all(np.abs(wide[:, 1]) < 1e-4)


def test_forecaster_no_signal():
    sample = generate(forecaster_stream(0.0, T=200), 3)
    np.testing.assert_array_equal(sample.extras["p"], 0.5)
    np.testing.assert_array_equal(sample.extras["q"], 0.5)
    np.testing.assert_array_equal(sample.X, 0.0)


def test_forecaster_calibration_and_positive_drift():
    sample = generate(forecaster_stream(0.7, seed=4, T=10**5), 1)
    q, y = sample.extras["q"][:, 0], sample.extras["y"][:, 0]
    sel = (q >= 0.45) & (q <= 0.55)
    mean_q = q[sel].mean()
    sigma = math.sqrt(mean_q * (1 - mean_q) / sel.sum())
    assert abs(y[sel].mean() - mean_q) <= 4 * sigma
    X = sample.X[:, 0, 0]
    assert X.mean() > 4 * X.std(ddof=1) / math.sqrt(X.size)
    assert np.abs(X).max() <= 1


def test_adversarial_replicates_identical():
    result = monte_carlo_tau(adversarial_stream("capital-const", 0.1, 200), ["capital_ewa", "capital_ons"],
                             replicates=5)
    for s in result.strategies:
        rows = [t for t in result.trials if t.strategy == s]
        assert len({(t.tau_truncated, t.final_logw) for t in rows}) == 1


# ---------------------------------------------------------------- forecaster baseline

def test_brier_diff_examples():
    assert brier_diff(0.3, 0.3, 1) == 0
    assert brier_diff(1, 0, 1) == -1
    assert brier_diff(1, 0, 0) == 1
    with pytest.raises(ConfigurationError):
        brier_diff(1.2, 0, 0)
    with pytest.raises(ConfigurationError):
        brier_diff(0.5, 0.5, 0.5)


def _growth(lam, p, q, pi):
    x1 = brier_diff(p, q, 1)
    x0 = brier_diff(p, q, 0)
    return pi * np.log1p(lam * x1) + (1 - pi) * np.log1p(lam * x0)


def test_henzi_bet_trivial_cases():
    assert henzi_bet(0.4, 0.4, 0.7) == 0
    # q = 0.9 is worse than p = 0.5 when the outcome probability is low
    assert henzi_bet(0.5, 0.9, 0.1) == 0


def test_henzi_bet_grid_oracle(rng):
    grid = np.linspace(0, 0.5, 10**4)
    for _ in range(300):
        p, q, pi = rng.uniform(0, 1, 3)
        lam = float(henzi_bet(p, q, pi))
        assert 0 <= lam <= 0.5
        assert _growth(lam, p, q, pi) >= _growth(grid, p, q, pi).max() - 1e-3


def test_henzi_log_wealth_and_names():
    p = np.array([0.5, 0.5]); q = np.array([0.9, 0.9]); y = np.array([1.0, 1.0])
    lw = henzi_log_wealth(p, q, y, 0.0)
    # pi_hat = 0.9: x1 = 0.24, x0 = -0.56; drift 0.16, stationary 0.16/0.1344 > 1/2
    np.testing.assert_allclose(lw, np.log1p(0.5 * 0.24) * np.array([1, 2]))
    assert henzi_name(0.25) == "henzi_25"
    with pytest.raises(ConfigurationError):
        henzi_log_wealth(p, q, y, 1.5)


def test_henzi_mixture_examples(rng):
    w = np.log(np.array([4.0, 2.0]))
    np.testing.assert_allclose(henzi_mixture([w, -w])[0], math.log(2.125))
    np.testing.assert_allclose(henzi_mixture([w, w]), w)
    paths = [np.cumsum(rng.normal(size=20)) for _ in range(4)]
    mix = henzi_mixture(paths)
    assert np.all(mix >= np.min(paths, axis=0) - 1e-12) and np.all(mix <= np.max(paths, axis=0) + 1e-12)
    with pytest.raises(ConfigurationError):
        henzi_mixture([])


# ---------------------------------------------------------------- harness

def test_monte_carlo_is_deterministic():
    spec = one_axis_stream(0.3, 0, 0, 2, seed=7, T=200)
    a = monte_carlo_tau(spec, replicates=20)
    b = monte_carlo_tau(spec, replicates=20)
    assert a.trials == b.trials


def test_monte_carlo_replicate_seeds_and_chunking():
    spec = one_axis_stream(0.3, 0, 0, 2, seed=7, T=100)
    whole = monte_carlo_tau(spec, ["capital_ons"], replicates=9)
    chunked = monte_carlo_tau(spec, ["capital_ons"], replicates=9, chunk=4)
    assert whole.trials == chunked.trials
    assert [t.seed for t in whole.trials] == list(range(7, 16))
    # replicate 5 regenerated alone
    single = monte_carlo_tau(spec, ["capital_ons"], replicates=1, base_seed=12)
    assert single.trials[0].final_logw == whole.trials[5].final_logw


def test_common_random_numbers_hash(monkeypatch):
    import betting_tests.experiments as ex

    seen = {}
    original = ex.strategy_log_wealth

    def spy(name, sample, *args, **kwargs):
        seen[name] = [hashlib.sha256(sample.X[:, r].tobytes()).hexdigest() for r in range(sample.X.shape[1])]
        return original(name, sample, *args, **kwargs)

    monkeypatch.setattr(ex, "strategy_log_wealth", spy)
    ex.monte_carlo_tau(one_axis_stream(0.2, 0, 0, 3, T=50), replicates=6)
    hashes = list(seen.values())
    assert len(hashes) == 4 and all(h == hashes[0] for h in hashes)
    assert len(set(hashes[0])) == 6


def test_trial_invariants():
    result = monte_carlo_tau(one_axis_stream(0.2, 0, 0, 2, T=150), replicates=30)
    for t in result.trials:
        assert 1 <= t.tau_truncated <= 150
        if not t.rejected:
            assert t.tau_truncated == 150
    s = result.summary("capital_ons")
    assert s.replicates == 30 and 0 <= s.reject_rate <= 1


def test_null_stream_mean_tau():
    T = 1000
    result = monte_carlo_tau(one_axis_stream(0.0, 0, 0, 2, seed=100, T=T), ["hoeffding_ftl", "capital_ewa"],
                             replicates=500)
    for s in result.strategies:
        assert result.mean_tau(s) >= (1 - 0.07) * T


def test_strategy_log_wealth_errors():
    sample = generate(one_axis_stream(0.2, 0, 0, 2, T=10), 2)
    with pytest.raises(ConfigurationError):
        strategy_log_wealth("henzi_0", sample)
    fsample = generate(forecaster_stream(T=10), 2)
    with pytest.raises(ConfigurationError):
        strategy_log_wealth("henzi_x", fsample)
    assert strategy_log_wealth("henzi_mixture", fsample).shape == (10, 2)


def test_centered_null_stream_values():
    sample = generate(centered_null_stream(0.5, 4, T=20), 3)
    np.testing.assert_array_equal(np.abs(sample.X), 0.25)
    with pytest.raises(ConfigurationError):
        generate(one_axis_stream(0.1, 0, 0, 2, T=5), 0)
