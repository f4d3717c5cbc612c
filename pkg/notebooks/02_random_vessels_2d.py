# %% [markdown]
# # Wall forces from many small vessels in 2D
#
# Random non-overlapping vessels fill 5% of the unit square.  Each
# realization is solved with clamped walls; the mean force on the walls is
# compared with the homogenized estimate `beta p (2mu+lambda)/mu |A|`.

# %%
from vesselfem.experiments import load_config, run_stats

cfg = load_config({
    "experiment": "stats", "dim": 2, "mesh": {"base_level": 6},
    "vessels": {"kind": "random", "n": 100, "target_beta": 0.05},
    "run": {"realizations": 20, "master_seed": 1},
})
table, _ = run_stats(cfg)

# %%
for row in table.rows:
    if row[0] != "face":
        print(row[0], row[2], *("%.4g" % v for v in row[3:]))

# %% [markdown]
# The `prediction` row is the homogenized force per wall.  Raising lambda
# raises both the prediction and the measured mean.

# %%
stiff = load_config({**cfg, "material": {"mu": 1.0, "lambda": 10.0}})
table10, _ = run_stats(stiff)
for row in table10.rows:
    if row[0] in ("mean", "prediction") and row[2] == "all":
        print(row[0], "%.4g" % row[3])
