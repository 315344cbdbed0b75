# %% [markdown]
# # Choosing the spectral radius
#
# With `tau` fixed, a small `rho` forgets too fast while `rho` close to one
# lets old inputs pile up in the state. The sweep below shows the rise and
# the sudden fall for a ring of 100 nodes.

# %%
from linres.simulate import ExperimentConfig, sr_sweep

rhos = (0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.98, 0.99, 0.995, 0.999, 0.9995)
table = sr_sweep("cyclic", [40], rhos, ExperimentConfig(n=100, realizations=3, taus=(40,)))
for rho, g, sd in zip(table.column("rho"), table.column("mean_gamma"), table.column("std_gamma")):
    print(f"rho={rho:<7g} gamma={g:.3f} +- {sd:.3f}")
