"""Offline evaluation: stratified k-fold splits and Hit Ratio at K.

Each user's interactions are shuffled and dealt round-robin across folds,
continuing the deal from one user to the next so fold sizes stay balanced.
For every fold the model is refit on the remaining folds.  The held-out
items of each user are then checked against that user's top-K list.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .corpus import InteractionDataset
from .errors import DegenerateSplitError
from .predict import DEFAULT_THETA2, CtpScorer, PredictionConfig, rank_items

__all__ = [
    "DEFAULT_P_GRID",
    "FoldAssignment",
    "EvalEntry",
    "EvalReport",
    "kfold_split",
    "evaluate_hr",
    "sweep_personalization",
]

log = logging.getLogger(__name__)

DEFAULT_P_GRID = tuple(np.round(np.arange(0, 4.0001, 0.25), 2).tolist())


@dataclass(frozen=True)
class FoldAssignment:
    """Fold id for every interaction, aligned with ``ds.pairs``."""

    k: int
    fold: np.ndarray

    def test_mask(self, f: int) -> np.ndarray:
        return self.fold == f

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(str(self.k).encode())
        h.update(np.ascontiguousarray(self.fold, dtype=np.int64).tobytes())
        return h.hexdigest()


def kfold_split(ds: InteractionDataset, k: int = 5, seed: int = 42) -> FoldAssignment:
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    rng = np.random.default_rng(seed)
    fold = np.empty(ds.n_interactions, dtype=np.int64)
    start = 0
    deal = 0
    for u in range(ds.n_users):
        n = len(ds.history[u])
        perm = rng.permutation(n)
        fold[start + perm] = (deal + np.arange(n)) % k
        deal = (deal + n) % k
        start += n
    fold.setflags(write=False)
    return FoldAssignment(k, fold)


@dataclass
class EvalEntry:
    p: float
    hr_micro: list = field(default_factory=list)
    hr_macro: list = field(default_factory=list)
    n_test_pairs: list = field(default_factory=list)

    @property
    def mean_hr_micro(self) -> float:
        return float(np.mean(self.hr_micro))

    @property
    def mean_hr_macro(self) -> float:
        return float(np.mean(self.hr_macro))


@dataclass
class EvalReport:
    K: int
    k: int
    seed: int | None
    config: dict
    fold_fingerprint: str
    entries: list = field(default_factory=list)

    @property
    def p_values(self):
        return [e.p for e in self.entries]

    def mean_hr(self, p) -> float:
        return next(e.mean_hr_micro for e in self.entries if e.p == p)

    def best_p(self) -> float:
        """Grid point with the highest mean micro HR (lowest p on ties)."""
        return max(self.entries, key=lambda e: (e.mean_hr_micro, -e.p)).p

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "fold", "hr_micro", "hr_macro", "n_test_pairs"])
        for e in self.entries:
            for f, (mi, ma, n) in enumerate(zip(e.hr_micro, e.hr_macro, e.n_test_pairs)):
                w.writerow([f"{e.p:g}", f, f"{mi:.6f}", f"{ma:.6f}", n])
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["p", "mean_hr_micro", "mean_hr_macro"])
        for e in self.entries:
            w.writerow([f"{e.p:g}", f"{e.mean_hr_micro:.6f}", f"{e.mean_hr_macro:.6f}"])
        return buf.getvalue()


def _fold_hits(ds, folds, f, K, p_grid, theta2, mode, exp):
    """Hits per grid point for one fold; returns (hits, macro_sums, n_pairs, n_users)."""
    test = folds.test_mask(f)
    n_pairs = int(test.sum())
    if n_pairs == 0:
        raise DegenerateSplitError(f"fold {f} has no test interactions")
    train = ds.restrict(~test)
    scorer = CtpScorer(train, exp)
    test_pairs = ds.pairs[test]
    users, starts = np.unique(test_pairs[:, 0], return_index=True)
    ends = np.append(starts[1:], len(test_pairs))

    hits = np.zeros(len(p_grid), dtype=np.int64)
    macro = np.zeros(len(p_grid))
    for u, lo, hi in zip(users, starts, ends):
        held_out = test_pairs[lo:hi, 1]
        total, n = scorer.history_terms(u, theta2, mode)
        seen = train.history[u]
        for g, p in enumerate(p_grid):
            top = rank_items(scorer.raw_scores(total, n, p), seen, K)
            h = int(np.isin(held_out, top).sum())
            hits[g] += h
            macro[g] += h / len(held_out)
    return hits, macro, n_pairs, len(users)


def _run(ds, folds, K, p_grid, theta2, mode, exp):
    p_grid = sorted(float(p) for p in p_grid)
    if not p_grid:
        raise ValueError("empty p grid")
    for p in p_grid:
        PredictionConfig(p=p, theta2=theta2, mode=mode)
    entries = [EvalEntry(p) for p in p_grid]
    for f in range(folds.k):
        hits, macro, n_pairs, n_users = _fold_hits(ds, folds, f, K, p_grid, theta2, mode, exp)
        log.info("fold %d: %d test pairs over %d users", f, n_pairs, n_users)
        for g, e in enumerate(entries):
            e.hr_micro.append(hits[g] / n_pairs)
            e.hr_macro.append(macro[g] / n_users)
            e.n_test_pairs.append(n_pairs)
    return entries


def evaluate_hr(ds: InteractionDataset, folds: FoldAssignment, K: int = 10,
                cfg: PredictionConfig = PredictionConfig(), exp=None) -> EvalEntry:
    """HR@K of the predictor configured by `cfg`, one value per fold.

    HR is micro-averaged over held-out (user, item) pairs; the per-user
    macro average is reported alongside.
    """
    return _run(ds, folds, K, [cfg.p], cfg.theta2, cfg.mode, exp)[0]


def sweep_personalization(ds: InteractionDataset, k: int = 5, K: int = 10, p_grid=DEFAULT_P_GRID,
                          theta2: int = DEFAULT_THETA2, mode: str = "lenient", seed: int = 42,
                          exp=None, folds: FoldAssignment | None = None) -> EvalReport:
    """HR@K for every p in `p_grid` over one shared fold assignment."""
    if folds is None:
        folds = kfold_split(ds, k, seed)
    entries = _run(ds, folds, K, p_grid, theta2, mode, exp)
    config = {"theta2": theta2, "mode": mode, "p_grid": [e.p for e in entries]}
    return EvalReport(K, folds.k, seed, config, folds.fingerprint(), entries)
