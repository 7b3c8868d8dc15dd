"""Turn predicted CTPs into recommendation probabilities.

A user's predicted CTPs are modeled as a continuous power law above
``x_min``.  An item with predicted CTP ``x`` is then shown with probability
``min(1, c * g(x) / f(x))``, where ``f`` is the fitted density and ``g`` the
density the feed should have.  Sampling every candidate independently with
that probability reshapes the feed toward ``g``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDistributionError, InsufficientDataError

__all__ = [
    "MIN_FIT_SIZE",
    "PowerLawFit",
    "Uniform",
    "PowerLaw",
    "RecommendationPolicy",
    "fit_ctp_distribution",
    "recommendation_probability",
    "draw_feed",
    "fit_report_json",
    "feed_csv",
]

MIN_FIT_SIZE = 30


@dataclass(frozen=True)
class PowerLawFit:
    x_min: float
    alpha: float
    n_samples: int

    def __post_init__(self):
        if not self.alpha > 1:
            raise ValueError(f"alpha must be > 1, got {self.alpha}")
        if not self.x_min > 0:
            raise ValueError(f"x_min must be > 0, got {self.x_min}")

    def pdf(self, x):
        """Density at `x`; zero below ``x_min``."""
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            f = (self.alpha - 1) / self.x_min * (x / self.x_min) ** -self.alpha
        return np.where(x >= self.x_min, f, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x >= self.x_min, 1 - (np.maximum(x, self.x_min) / self.x_min) ** (1 - self.alpha), 0.0)

    def sample(self, size, rng=None):
        """Inverse-CDF draws."""
        rng = np.random.default_rng(rng)
        return self.x_min * (1 - rng.random(size)) ** (-1 / (self.alpha - 1))


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("Uniform target needs hi > lo")

    def pdf(self, x, fit=None):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)


@dataclass(frozen=True)
class PowerLaw:
    """Power-law target sharing the fitted ``x_min``."""

    alpha: float

    def pdf(self, x, fit):
        return PowerLawFit(fit.x_min, self.alpha, fit.n_samples).pdf(x)


@dataclass(frozen=True)
class RecommendationPolicy:
    target_density: Uniform | PowerLaw
    scale_c: float = 1.0

    def __post_init__(self):
        if self.scale_c < 0:
            raise ValueError("scale_c must be nonnegative")


def fit_ctp_distribution(ctps, min_size: int = MIN_FIT_SIZE) -> PowerLawFit:
    """Maximum-likelihood power-law fit with ``x_min`` at the smallest positive sample.

    ``alpha = 1 + m / sum(log(x / x_min))``.  Zero CTPs are dropped before
    fitting.
    """
    x = np.asarray(ctps, dtype=float)
    x = x[x > 0]
    if len(x) < min_size:
        raise InsufficientDataError(f"need at least {min_size} positive CTPs, got {len(x)}")
    x_min = x.min()
    log_sum = np.log(x / x_min).sum()
    if log_sum == 0:
        raise DegenerateDistributionError("all CTPs are equal; exponent is undefined")
    return PowerLawFit(float(x_min), float(1 + len(x) / log_sum), len(x))


def recommendation_probability(fit: PowerLawFit, policy: RecommendationPolicy, x):
    """Probability of showing an item with predicted CTP `x` (scalar or array).

    `x` is clipped to [0, 1] and then raised to ``fit.x_min`` before both
    densities are evaluated.
    """
    x = np.maximum(np.clip(np.asarray(x, dtype=float), 0.0, 1.0), fit.x_min)
    ratio = policy.target_density.pdf(x, fit) / fit.pdf(x)
    prob = np.clip(policy.scale_c * ratio, 0.0, 1.0)
    return float(prob) if prob.ndim == 0 else prob


def draw_feed(predictions, fit: PowerLawFit, policy: RecommendationPolicy, seed=None):
    """Independently include each candidate with its recommendation probability.

    Parameters
    ----------
    predictions : sequence of (item, ctp)
        Candidate items with their clamped predicted CTPs.
    seed : int or numpy Generator

    Returns
    -------
    included : list of item
    probabilities : ndarray
        Per-candidate probability, aligned with `predictions`.
    """
    items = [item for item, _ in predictions]
    ctps = np.array([ctp for _, ctp in predictions], dtype=float)
    prob = np.atleast_1d(recommendation_probability(fit, policy, ctps)) if len(ctps) else np.empty(0)
    draws = np.random.default_rng(seed).random(len(items))
    included = draws < prob
    return [item for item, inc in zip(items, included) if inc], prob


def fit_report_json(user, fit: PowerLawFit) -> str:
    return json.dumps({"user": user, "x_min": fit.x_min, "alpha": fit.alpha,
                       "n_samples": fit.n_samples}, ensure_ascii=False) + "\n"


def feed_csv(user, items, probabilities, included) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["user", "item", "probability", "included"])
    inc = set(included)
    for item, prob in zip(items, probabilities):
        w.writerow([user, item, f"{prob:.6f}", str(item in inc).lower()])
    return buf.getvalue()
