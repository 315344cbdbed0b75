# %% [markdown]
# # Rank against size
#
# The ring keeps full rank at every size. Random and Wigner reservoirs fall
# behind as `n` grows, and fixing the largest singular value instead of the
# spectral radius makes the random reservoir contract harder.

# %%
from linres.simulate import ExperimentConfig, rank_scan

cfg = ExperimentConfig(realizations=5)
for fixed in ("spectral-radius", "max-singular-value"):
    _, agg = rank_scan(["cyclic", "random", "wigner"], [25, 50, 100, 150], 0.995, fixed, cfg)
    print(fixed)
    for row in agg.rows:
        print("  ", row[0], row[1], f"{row[4]:.1f} +- {row[5]:.1f}")
