# %% [markdown]
# # The THz link and the interference it sees
#
# One serving SBS at distance d0, other SBSs scattered as a hard-core process.
# Everything is in linear watts.

# %%
import numpy as np

from thzvr import channel as chn
from thzvr import geometry as geo
from thzvr.config import from_dict

cfg = from_dict({"preset": "fig3"})
ch, dep = cfg.channel, cfg.deployment
print(f"A0 = {ch.A0:.4g} m^2")
print(f"received power at d0={ch.d0} m: {chn.tagged_received_power(ch):.4g} W")
print(f"noise floor (thermal + absorption): {chn.noise_floor(ch):.4g} W")
print(f"rate with no interference: {chn.capacity(ch, 0.0) / 1e9:.2f} Gbit/s")

# %% [markdown]
# ## One deployment
# Type-II thinning keeps every pair of SBSs at least r apart.

# %%
d = geo.sample_mhcpp(dep, seed=1)
print(f"{len(d)} SBSs in the {dep.area:g} m room, closest pair {d.min_pairwise_distance():.2f} m (r = {dep.r})")
print("interferers within omega of the centre:", np.round(geo.interferer_distances(d), 2))

# %% [markdown]
# ## Gaussian moments vs sampled geometry
# The closed-form moments used by the analytic chain are compared with
# interference measured over many deployments and with exact
# stochastic-geometry references (Campbell mean, Poisson variance).

# %%
I = geo.sample_exact_interference(dep, ch.p, ch.A0, seed=2, size=5000)
s = geo.interference_stats(dep, ch.p, ch.A0)
cm, cv = geo.campbell_moments(dep, ch.p, ch.A0)
print(f"sampled mean / closed form = {I.mean() / s.mu_I:.2f}   sampled mean / Campbell = {I.mean() / cm:.2f}")
print(f"sampled var  / closed form = {I.var() / s.sigma2_I:.2f}   sampled var  / Poisson  = {I.var() / cv:.2f}")
print(f"KS distance, sampled vs clipped Gaussian: {geo.gaussian_approximation_error(I, s):.3f}")
