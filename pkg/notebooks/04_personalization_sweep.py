# %% [markdown]
# # Choosing the personalization coefficient
#
# Five-fold cross-validated HR@10 over a grid of ``p``.  The fold assignment
# is shared across the grid, so differences between grid points come from
# ``p`` alone.  On the full Steam log this takes a few minutes.

# %%
import os

from lcf import ingest_text, load_interactions, sweep_personalization
from lcf.synthetic import steam_like_csv

steam = os.environ.get("LCF_STEAM_CSV")
ds = load_interactions(steam) if steam else ingest_text(steam_like_csv(seed=0))

report = sweep_personalization(ds, k=5, K=10, p_grid=[0, 0.5, 1, 1.5, 2, 3, 4], theta2=16, seed=42)
print(report.summary_csv())
print("best p:", report.best_p())

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    plt.plot(report.p_values, [e.mean_hr_micro for e in report.entries], "o-")
    plt.xlabel("p")
    plt.ylabel("HR@10")
    plt.savefig("hr_sweep.png", dpi=120)
