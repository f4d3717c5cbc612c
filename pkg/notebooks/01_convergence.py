# %% [markdown]
# # Convergence of the line-source model against the exact hole solution
#
# A single vessel of radius 0.1 sits in the middle of the unit square.  The
# exact displacement of a pressurized hole in a clamped disc of radius 1 is
# imposed on the box boundary, and errors are measured away from the vessel
# (mask radius 0.2).

# %%
import numpy as np

from vesselfem.experiments import load_config, run_converge

base = {
    "experiment": "converge",
    "vessels": [{"center": [0.5, 0.5], "radius": 0.1, "pressure": 1.0}],
    "bcs": {str(f): "exact" for f in range(4)},
    "converge": {"levels": [3, 4, 5, 6, 7], "R": 1.0, "mask_radius": 0.2},
}

# %% [markdown]
# With the thin-vessel source strength `pi a^2 (2mu+lambda)/mu p` the
# discrete solution converges to the thin-vessel model.  It differs from the
# finite-hole solution by a relative O(a^2), so the L2 error stalls once
# the discretization error drops below that level.

# %%
thin, _ = run_converge(load_config({**base, "converge": {**base["converge"], "jump": "thin"}}))
print(thin.to_text())

# %% [markdown]
# Matching the source strength to the finite-domain solution removes the
# model error, and the first-order H1 / second-order L2 rates appear.

# %%
exact, _ = run_converge(load_config({**base, "converge": {**base["converge"], "jump": "exact"}}))
print(exact.to_text())

l2 = np.array(exact.column("l2_error"))
h1 = np.array(exact.column("h1_error"))
print("overall L2 rate", np.log2(l2[0] / l2[-1]) / (len(l2) - 1))
print("overall H1 rate", np.log2(h1[0] / h1[-1]) / (len(h1) - 1))
