# %% [markdown]
# # The encoded input
#
# A linear reservoir started long ago ends in the state `x0 = C s`. The
# matrix `C` depends only on the network; the vector `s` folds the whole input
# history into `n` numbers through the characteristic polynomial of `W`.
# This notebook checks the identity on each topology and looks at how the
# weights `phi^(k)` behave.

# %%
import numpy as np

from linres import ReservoirSpec, build_reservoir, controllability_matrix
from linres.ch_encoding import (
    encode_input,
    encode_input_cyclic,
    phi_sequence,
    reservoir_char_coeffs,
    truncation_horizon,
)
from linres.controllability import cyclic_controllability_tilde
from linres.simulate import run_reservoir

rng = np.random.default_rng(0)
n, rho = 12, 0.9
K = truncation_horizon(rho, 1e-14, n)
window = rng.standard_normal(K)  # most recent sample first
print("horizon K =", K)

# %% [markdown]
# Drive each reservoir with the same window and compare the final state with
# `C s`.

# %%
for kind in ("delay", "cyclic", "random", "wigner"):
    R = build_reservoir(ReservoirSpec(kind, n, rho, seed=1, input_seed=2, rescale_mode="exact"))
    x = run_reservoir(R, window[::-1])[-1]
    enc = encode_input(reservoir_char_coeffs(R), window, K)
    res = np.linalg.norm(x - controllability_matrix(R) @ enc.s) / np.linalg.norm(x)
    print(f"{kind:7s} residual {res:.1e}  tail bound {enc.tail_estimate:.1e}")

# %% [markdown]
# For the delay line the weights vanish after `n` steps, so `s` is simply the
# last `n` inputs. For the ring they repeat every `n` steps with a factor
# `rho**n`.

# %%
phi_delay = phi_sequence(reservoir_char_coeffs(build_reservoir(ReservoirSpec("delay", 5, 1.0))), 12)
print(phi_delay.astype(int))
phi_ring = phi_sequence(reservoir_char_coeffs(build_reservoir(ReservoirSpec("cyclic", 5, 0.5))), 12)
print(np.round(phi_ring, 4))

# %% [markdown]
# The ring also has a rescaled form: `C~ s~` with shifted copies of `w` as
# columns and `s~_j = rho**j s_j`.

# %%
R = build_reservoir(ReservoirSpec("cyclic", n, rho, input_seed=3))
s = encode_input(reservoir_char_coeffs(R), window, K).s
st = encode_input_cyclic(rho, n, window, K).s
print("scaling error", np.abs(st - rho ** np.arange(n) * s).max())
print("C~ s~ vs C s ", np.abs(cyclic_controllability_tilde(R.w) @ st - controllability_matrix(R) @ s).max())
