# %% [markdown]
# # Transmission-delay density
#
# A packet of L bits takes alpha = L / capacity(I).  Inverting that map and
# applying the change of variables to the Gaussian interference law gives an
# analytic density for alpha.  Here it is checked against simulated packets.

# %%
import numpy as np

from thzvr import delay, experiments
from thzvr.config import from_dict

cfg = from_dict({"preset": "validation"})
res = experiments.txpdf(cfg)
print(f"L1(analytic, change-of-variables sample) = {res.l1:.4f}")
print(f"L1(analytic, simulator with clipped draws) = {res.l1_simulated:.4f}")

# %% [markdown]
# A coarse text rendering of the two curves.

# %%
t, a, e = res.analytic.t, res.analytic.values, res.empirical.values
peak = a.max()
for k in range(0, len(t), 8):
    if a[k] > 1e-3 * peak or e[k] > 1e-3 * peak:
        print(f"{t[k] * 1e3:7.3f} ms  {'#' * int(40 * a[k] / peak):<40s} {'*' * int(40 * e[k] / peak)}")

# %% [markdown]
# The analytic density does not integrate to one.  Interference below -N0
# has no finite delay and its Gaussian mass is simply missing.

# %%
print(f"mass of psi_T: {delay.tx_delay_mass(cfg.channel, cfg.stats):.6f}")
wide = cfg.stats.scaled(sigma_factor=10)
print(f"with sigma x10: {delay.tx_delay_mass(cfg.channel, wide):.4f}")
print(f"L1 with sigma x10: {experiments.txpdf(cfg, stats=wide).l1:.4f}")
