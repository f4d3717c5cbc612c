# %% [markdown]
# # A branching vessel
#
# A trunk splits into two mirror-image branches.  Top and bottom are
# clamped, the sides are free.  The side walls move by equal and opposite
# amounts.

# %%
from vesselfem.experiments import load_config, run_solve

cfg = load_config({
    "experiment": "solve", "dim": 3,
    "mesh": {"base_level": 4, "local_levels": 2, "attractor_radius": 0.1},
    "vessels": {"kind": "y_junction", "diameter": 0.1},
    "bcs": {"0": "free", "1": "free", "2": "free", "3": "free", "4": "clamped", "5": "clamped"},
})
table, field = run_solve(cfg)
print(table.to_text())
