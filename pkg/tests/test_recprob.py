import csv
import io
import json

import numpy as np
import pytest
from scipy import integrate

from lcf.errors import DegenerateDistributionError, InsufficientDataError
from lcf.recprob import (
    PowerLaw,
    PowerLawFit,
    RecommendationPolicy,
    Uniform,
    draw_feed,
    feed_csv,
    fit_ctp_distribution,
    fit_report_json,
    recommendation_probability,
)


def synthetic(alpha, x_min, m, seed):
    u = np.random.default_rng(seed).random(m)
    return x_min * (1 - u) ** (-1 / (alpha - 1))


def test_recovers_exponent():
    fit = fit_ctp_distribution(synthetic(2.5, 0.01, 10_000, seed=0))
    assert 2.4 <= fit.alpha <= 2.6
    assert fit.n_samples == 10_000
    assert fit.x_min >= 0.01


def test_mle_formula_by_hand():
    x = np.array([0.1, 0.2, 0.4, 0.8])
    fit = fit_ctp_distribution(x, min_size=4)
    assert fit.x_min == 0.1
    assert fit.alpha == pytest.approx(1 + 4 / (np.log(2) + np.log(4) + np.log(8)))


def test_zeros_are_dropped():
    x = np.concatenate([np.zeros(50), synthetic(2.0, 0.05, 40, seed=1)])
    fit = fit_ctp_distribution(x)
    assert fit.n_samples == 40


def test_degenerate_and_small_inputs():
    with pytest.raises(DegenerateDistributionError):
        fit_ctp_distribution(np.full(100, 0.3))
    with pytest.raises(InsufficientDataError):
        fit_ctp_distribution(synthetic(2.5, 0.01, 5, seed=0))


def test_fit_validation():
    with pytest.raises(ValueError):
        PowerLawFit(0.1, 1.0, 10)
    with pytest.raises(ValueError):
        PowerLawFit(0.0, 2.0, 10)


@pytest.mark.parametrize("alpha,x_min", [(2.5, 0.01), (1.5, 0.2), (3.7, 1e-3)])
def test_density_normalization(alpha, x_min):
    fit = PowerLawFit(x_min, alpha, 100)
    hi = 1e3 * x_min
    # integrate in log space: the density spans many decades
    val, _ = integrate.quad(lambda t: float(fit.pdf(np.exp(t))) * np.exp(t), np.log(x_min), np.log(hi),
                            epsabs=1e-12, epsrel=1e-12, limit=200)
    assert abs(val - (1 - (hi / x_min) ** (1 - alpha))) < 1e-6
    assert fit.cdf(hi) == pytest.approx(1 - (hi / x_min) ** (1 - alpha))


def test_estimator_error_shrinks_with_sample_size():
    medians = []
    for m in (100, 1_000, 10_000):
        errs = [abs(fit_ctp_distribution(synthetic(2.5, 0.01, m, seed)).alpha - 2.5) for seed in range(20)]
        medians.append(np.median(errs))
    assert medians[0] > medians[1] > medians[2]


def test_probability_matching_target_is_one():
    fit = PowerLawFit(0.05, 2.2, 100)
    x = np.linspace(0, 1, 101)
    assert np.all(recommendation_probability(fit, RecommendationPolicy(PowerLaw(2.2), 1.0), x) == 1.0)


def test_probability_zero_scale():
    fit = PowerLawFit(0.05, 2.2, 100)
    assert np.all(recommendation_probability(fit, RecommendationPolicy(Uniform(0, 1), 0.0),
                                             np.linspace(0, 1, 11)) == 0.0)


def test_probability_uniform_target_by_hand():
    fit = PowerLawFit(0.1, 2.0, 100)
    # f(0.1) = (2 - 1) / 0.1 = 10; g = 1 / 0.9
    prob = recommendation_probability(fit, RecommendationPolicy(Uniform(0.1, 1.0), 1.0), 0.1)
    assert prob == pytest.approx((1 / 0.9) / 10)
    assert prob == pytest.approx(0.111, abs=5e-4)
    # below x_min the density at x_min is used
    assert recommendation_probability(fit, RecommendationPolicy(Uniform(0.0, 1.0), 1.0), 0.01) == \
        pytest.approx(1 / 10)


def test_probability_monotone_in_scale():
    fit = PowerLawFit(0.02, 2.5, 100)
    x = np.linspace(0, 1, 50)
    probs = [recommendation_probability(fit, RecommendationPolicy(Uniform(0, 1), c), x) for c in (0, 0.01, 0.1, 1, 10)]
    for lo, hi in zip(probs, probs[1:]):
        assert np.all(lo <= hi)


def test_probability_bounds_random():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        fit = PowerLawFit(rng.uniform(1e-4, 0.5), rng.uniform(1.01, 5), 100)
        target = Uniform(*sorted(rng.uniform(-0.2, 1.2, 2) + [0, 1e-3])) if rng.random() < 0.5 \
            else PowerLaw(rng.uniform(1.01, 5))
        policy = RecommendationPolicy(target, rng.uniform(0, 100))
        p = recommendation_probability(fit, policy, rng.uniform(-0.5, 1.5, 100))
        assert np.all((p >= 0) & (p <= 1))


def test_draw_feed_extremes():
    fit = PowerLawFit(0.05, 2.0, 100)
    preds = [(j, 0.05 + j / 200) for j in range(100)]
    included, prob = draw_feed(preds, fit, RecommendationPolicy(PowerLaw(2.0), 1.0), seed=1)
    assert included == list(range(100)) and np.all(prob == 1)
    included, _ = draw_feed(preds, fit, RecommendationPolicy(PowerLaw(2.0), 0.0), seed=1)
    assert included == []
    assert draw_feed([], fit, RecommendationPolicy(PowerLaw(2.0), 1.0), seed=1)[0] == []


def test_draw_feed_binomial_count_and_determinism():
    fit = PowerLawFit(0.05, 2.0, 100)
    policy = RecommendationPolicy(PowerLaw(2.0), 0.25)
    preds = [(j, 0.3) for j in range(10_000)]
    included, prob = draw_feed(preds, fit, policy, seed=123)
    assert np.all(prob == 0.25)
    sd = np.sqrt(10_000 * 0.25 * 0.75)
    assert abs(len(included) - 2500) < 4 * sd
    assert draw_feed(preds, fit, policy, seed=123)[0] == included


def test_report_formats():
    fit = PowerLawFit(0.05, 2.0, 40)
    assert json.loads(fit_report_json("u1", fit)) == {"user": "u1", "x_min": 0.05, "alpha": 2.0, "n_samples": 40}
    rows = list(csv.reader(io.StringIO(feed_csv("u1", ["a", "b"], [0.5, 1.0], ["b"]))))
    assert rows == [["user", "item", "probability", "included"],
                    ["u1", "a", "0.500000", "false"], ["u1", "b", "1.000000", "true"]]
