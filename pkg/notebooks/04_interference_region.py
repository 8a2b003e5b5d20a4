# %% [markdown]
# # Reliability versus the interference radius
#
# Growing omega adds more SBSs to the interference sum, so the link slows
# down.  The drop is steeper for users far from their serving SBS.

# %%
from thzvr import experiments
from thzvr.config import from_dict

cfg = from_dict({"preset": "fig4"})
rows = experiments.sweep_region(cfg)
for d0 in cfg.sweep("region")["d0"]:
    sub = [r for r in rows if r["d0"] == d0]
    curve = "  ".join(f"{r['R@0.01']:.4f}" for r in sub[::3])
    steep = experiments.max_negative_slope(rows, d0, "R@0.01")
    print(f"d0 = {d0:4.1f} m   R@10ms at omega = 4.3..14 m: {curve}   steepest drop {steep:.2e}/m")
