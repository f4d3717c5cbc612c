# %% [markdown]
# # Vessel trees and the traction matrix
#
# Trees grow greedily from a root.  The balancing factor trades total length
# (0: minimum spanning tree) against path length to the root (1: star).

# %%
import numpy as np

from vesselfem.experiments import load_config, run_tree
from vesselfem.vesselgen import TreeConfig, build_tree

for bf in (0.0, 0.25, 0.5, 0.75, 1.0):
    net = build_tree(TreeConfig(n_points=200, balancing_factor=bf, seed=0))
    print(f"bf={bf:.2f} length={net.total_length:.3f} radius={net.meta['radius']:.3e}")

# %% [markdown]
# Solving a pressurized tree in a clamped cube gives the matrix of wall
# tractions `M_ij = F_{i+} . e_j - F_{i-} . e_j`.  Its diagonal is negative
# and dominates the off-diagonal part.

# %%
cfg = load_config({"experiment": "tree", "dim": 3, "mesh": {"base_level": 4},
                   "vessels": {"kind": "tree", "n": 200, "root": "LL", "balancing_factor": 0.5}})
table, field, net = run_tree(cfg)
M = np.array([r[3] for r in table.rows if r[0] == "M"]).reshape(3, 3)
print(M)
print("eigenvalues", [r[3] for r in table.rows if r[0] == "eigenvalue"])
