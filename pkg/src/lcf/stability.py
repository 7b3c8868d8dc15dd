"""How stable is a sample CTR as a function of sample size?

The simulated MAE comes from seeded binomial draws; the exact MAE enumerates
the binomial distribution.  Each sample size gets its own child seed, so
results do not depend on the order or grouping in which sizes are run.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "StabilityConfig",
    "StabilityRow",
    "StabilityReport",
    "binary_mad",
    "exact_ctr_mae",
    "simulate_ctr_mae",
]

PAPER_SIZES = (16, 64, 400, 1600)


def _check_ratio(p, name="p"):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def binary_mad(p: float) -> float:
    """Mean absolute deviation ``E|X - p|`` of ``X ~ Bernoulli(p)``."""
    _check_ratio(p)
    return 2.0 * p * (1.0 - p)


def _binom_pmf(s, ctr):
    k = np.arange(s + 1)
    if ctr in (0.0, 1.0):
        pmf = np.zeros(s + 1)
        pmf[0 if ctr == 0.0 else s] = 1.0
        return k, pmf
    log_pmf = (gammaln(s + 1) - gammaln(k + 1) - gammaln(s - k + 1)
               + k * np.log(ctr) + (s - k) * np.log1p(-ctr))
    return k, np.exp(log_pmf)


def exact_ctr_mae(s: int, ctr: float) -> float:
    """``E|K/s - ctr|`` for ``K ~ Binomial(s, ctr)``, by enumeration."""
    if s < 1:
        raise ValueError(f"sample size must be >= 1, got {s}")
    _check_ratio(ctr, "ctr")
    k, pmf = _binom_pmf(s, ctr)
    return float(np.sum(pmf * np.abs(k / s - ctr)))


@dataclass(frozen=True)
class StabilityConfig:
    true_ctr: float = 0.5
    sample_sizes: tuple = PAPER_SIZES
    trials: int = 300_000
    seed: int = 42

    def __post_init__(self):
        _check_ratio(self.true_ctr, "true_ctr")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.sample_sizes or any(s < 1 for s in self.sample_sizes):
            raise ValueError("sample sizes must be >= 1")


@dataclass(frozen=True)
class StabilityRow:
    sample_size: int
    simulated_mae: float
    exact_mae: float
    trials: int
    std_error: float


@dataclass
class StabilityReport:
    config: StabilityConfig
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sample_size", "simulated_mae", "exact_mae", "trials"])
        for r in self.rows:
            w.writerow([r.sample_size, f"{r.simulated_mae:.6f}", f"{r.exact_mae:.6f}", r.trials])
        return buf.getvalue()


def _child_rng(seed, s):
    return np.random.default_rng(np.random.SeedSequence([seed, s]))


def simulate_ctr_mae(cfg: StabilityConfig) -> StabilityReport:
    """Monte-Carlo MAE of the sample CTR for each configured sample size."""
    report = StabilityReport(cfg)
    for s in cfg.sample_sizes:
        clicks = _child_rng(cfg.seed, s).binomial(s, cfg.true_ctr, size=cfg.trials)
        dev = np.abs(clicks / s - cfg.true_ctr)
        se = float(dev.std(ddof=1) / np.sqrt(cfg.trials)) if cfg.trials > 1 else float("nan")
        report.rows.append(StabilityRow(s, float(dev.mean()), exact_ctr_mae(s, cfg.true_ctr), cfg.trials, se))
    return report
