# %% [markdown]
# # Shaping a feed with recommendation probabilities
#
# Fit a power law to one user's predicted CTPs, then show each candidate with
# probability ``min(1, c * g(x) / f(x))``.  With a uniform target ``g`` the
# feed contains roughly as many low-CTP items as high-CTP ones.

# %%
import numpy as np

from lcf import PredictionConfig, ingest_text
from lcf.predict import CtpScorer
from lcf.recprob import RecommendationPolicy, Uniform, draw_feed, fit_ctp_distribution
from lcf.synthetic import steam_like_csv

ds = ingest_text(steam_like_csv(seed=0))
scorer = CtpScorer(ds)
u = 0
raw, _ = scorer.score_user(u, PredictionConfig(p=1.5))
candidates = [(j, float(np.clip(raw[j], 0, 1))) for j in range(ds.n_items) if j not in set(ds.history[u])]

fit = fit_ctp_distribution([x for _, x in candidates])
print(fit)

# %%
policy = RecommendationPolicy(Uniform(fit.x_min, 1.0), scale_c=0.05)
feed, prob = draw_feed(candidates, fit, policy, seed=42)
ctp = np.array([x for _, x in candidates])
shown = np.isin([j for j, _ in candidates], feed)
print(f"{len(feed)} of {len(candidates)} candidates shown; expected {prob.sum():.1f}")
print("median CTP of candidates:", np.median(ctp), " of feed:", np.median(ctp[shown]))
