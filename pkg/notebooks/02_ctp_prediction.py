# %% [markdown]
# # Predicting click-through probabilities
#
# A user's predicted CTP for an item starts at the item's global CTR and
# moves by ``p`` times the mean correlation of the item to the user's
# history.  ``p = 0`` is a pure popularity recommender.

# %%
import os

from lcf import PredictionConfig, ingest_text, load_interactions, predict_ctp, recommend_topk
from lcf.predict import CtpScorer
from lcf.synthetic import steam_like_csv

steam = os.environ.get("LCF_STEAM_CSV")
ds = load_interactions(steam) if steam else ingest_text(steam_like_csv(seed=0))
scorer = CtpScorer(ds)  # reuse co-occurrence counts across calls

# %%
u = max(range(ds.n_users), key=lambda u: len(ds.history[u]))
print(f"user {ds.users[u]} owns {len(ds.history[u])} items")

for p in (0.0, 1.5):
    cfg = PredictionConfig(p=p, theta2=16)
    print(f"\np = {p}")
    for j, pred in recommend_topk(ds, None, u, cfg, K=5, scorer=scorer):
        print(f"  {pred.raw_score:.4f}  n={pred.n_effective:<3d} {ds.items[j]}")

# %% [markdown]
# Single predictions carry the number of history items that passed the
# support threshold and a flag when none did.

# %%
j = recommend_topk(ds, None, u, PredictionConfig(), K=1, scorer=scorer)[0][0]
print(predict_ctp(ds, None, u, j, PredictionConfig(p=1.5), scorer=scorer))
print(predict_ctp(ds, None, u, j, PredictionConfig(p=1.5, theta2=ds.n_users), scorer=scorer))
