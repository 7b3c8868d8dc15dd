# %% [markdown]
# # How many samples does a stable CTR need?
#
# Sample CTRs of a 50% item, simulated and computed exactly.  The resulting
# table is the plot data for the sample-size curve; the support thresholds
# used elsewhere (16 and 400) come from it.

# %%
import numpy as np

from lcf.stability import StabilityConfig, binary_mad, exact_ctr_mae, simulate_ctr_mae

print("largest Bernoulli MAD:", max(binary_mad(p) for p in np.linspace(0, 1, 101)))

# %%
sizes = (1, 4, 16, 64, 100, 400, 1000, 1600, 4000)
report = simulate_ctr_mae(StabilityConfig(0.5, sizes, trials=300_000, seed=42))
print(report.to_csv())

# %% [markdown]
# For large samples the MAE falls like ``0.5 * sqrt(2 / (pi * s))``.

# %%
for s in (400, 1600, 10_000):
    print(s, exact_ctr_mae(s, 0.5), 0.5 * np.sqrt(2 / (np.pi * s)))

# %%
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    s = [r.sample_size for r in report.rows]
    plt.loglog(s, [r.simulated_mae for r in report.rows], "o", label="simulated")
    plt.loglog(s, [r.exact_mae for r in report.rows], "-", label="exact")
    plt.xlabel("sample size")
    plt.ylabel("MAE of sample CTR")
    plt.legend()
    plt.savefig("stability.png", dpi=120)
