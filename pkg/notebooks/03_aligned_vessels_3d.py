# %% [markdown]
# # Straight parallel vessels in a cube
#
# Vessels along z act only in the x-y plane: the lateral walls feel a normal
# force close to the 2D estimate, and by symmetry of each straight line
# source no z-force on the lateral walls.

# %%
import numpy as np

from vesselfem.analytic import homog_3d_aligned
from vesselfem.elasticity import Material
from vesselfem.experiments import load_config, run_stats

cfg = load_config({
    "experiment": "stats", "dim": 3, "mesh": {"base_level": 4},
    "vessels": {"kind": "aligned", "n": 25, "target_beta": 0.05},
    "run": {"realizations": 4, "master_seed": 3},
})
table, _ = run_stats(cfg)
F = np.array([r[3:] for r in table.rows if r[0] == "face"], dtype=float).reshape(4, 6, 3)
print("mean lateral normal force", F[:, :4, 0].mean())
print("max lateral z-force", np.abs(F[:, :4, 2]).max())

# %% [markdown]
# The homogenized displacement gradient and stress for the same volume
# fraction: no stress along the vessels, `beta p (2mu+lambda)/mu` across.

# %%
M, sigma = homog_3d_aligned(Material(1.0, 1.0), 0.05, 1.0, np.array([0.0, 0.0, 1.0]))
print(M)
print(sigma)
