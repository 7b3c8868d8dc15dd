# %% [markdown]
# # Item-item correlation
#
# Build a dataset from a purchase log and look at which items the buyers of a
# given game over-index on.  Set ``LCF_STEAM_CSV`` to the Kaggle
# ``steam-200k.csv`` to run on the real data; otherwise a synthetic log with
# the same layout is generated.

# %%
import os

import numpy as np

from lcf import (
    asymmetry_ratio,
    build_correlation_index,
    dataset_stats,
    global_ctr,
    ingest_text,
    item_item_topk,
    load_interactions,
)
from lcf.synthetic import steam_like_csv

steam = os.environ.get("LCF_STEAM_CSV")
ds = load_interactions(steam) if steam else ingest_text(steam_like_csv(seed=0))
print(dataset_stats(ds).summary())

# %% [markdown]
# Each item's global CTR is the share of all users who bought it.  The
# correlation of a target to a source is how much more (or less) often the
# source's buyers bought the target than everybody did.

# %%
sources = ["The Elder Scrolls V Skyrim", "Dota 2", "Counter-Strike Global Offensive"] if steam else \
    [ds.items[int(j)] for j in np.argsort(-ds.item_counts, kind="stable")[:3]]
ids = [ds.find_item(t) for t in sources]
for t, i in zip(sources, ids):
    print(f"{t}: CTR {100 * global_ctr(ds, None, i):.2f}%")

# %%
index = build_correlation_index(ds, theta1=400 if steam else 30, sources=ids)
for t, i in zip(sources, ids):
    print(f"\n{t}")
    for j, r in item_item_topk(index, i, 10):
        print(f"  {100 * r:6.2f}  {ds.items[j]}")

# %% [markdown]
# ## Asymmetry
#
# Under full exposure, ``r_i(j) / r_j(i)`` equals the ratio of the two items'
# global CTRs: a popular target correlates weakly with everything because its
# buyers are already close to the population average.

# %%
a, b = ids[0], ids[1]
print(asymmetry_ratio(ds, a, b))

# %% [markdown]
# The whole index can be written out as CSV for inspection.

# %%
print(index.head(3).to_csv())
