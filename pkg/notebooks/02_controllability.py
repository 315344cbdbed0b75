# %% [markdown]
# # How much of the past survives
#
# The rank of `C` caps how many independent directions of the encoded input
# the state can hold. Inputs that differ by a nullspace vector of `C` lead to
# the same state.

# %%
import numpy as np

from linres import ReservoirSpec, analyze, build_reservoir, controllability_matrix
from linres.controllability import expected_column_norms, indistinguishability_demo, older_share

n, rho = 100, 0.99
reports = {}
for kind in ("delay", "cyclic", "random", "wigner"):
    R = build_reservoir(ReservoirSpec(kind, n, rho, seed=0, input_seed=1))
    reports[kind] = analyze(controllability_matrix(R))
    print(f"{kind:7s} rank {reports[kind].rank:3d}")

# %% [markdown]
# Column `k` of `C` is `W^k w`, so for a random reservoir its norm falls
# roughly like `rho**k`. With `rho < 1` the late columns drop under the rank
# tolerance even when they are not exactly dependent.

# %%
rep = reports["random"]
ratio = rep.column_norms / expected_column_norms(rho, n)
print("norm / rho^k for k = 0, 10, 20, 40:", np.round(ratio[[0, 10, 20, 40]], 3))

# %% [markdown]
# Where does the nullspace live? Almost all of its energy sits on the older
# half of the encoded input.

# %%
for kind in ("random", "wigner"):
    print(kind, "share of nullspace energy on older components:", round(older_share(reports[kind]), 4))

# %% [markdown]
# Two encoded inputs that differ by a nullspace vector give the same state.

# %%
C = reports["wigner"].C
s = np.random.default_rng(5).standard_normal(n)
x1, x2 = indistinguishability_demo(C, s)
print("relative state difference", np.linalg.norm(x1 - x2) / np.linalg.norm(x1))
