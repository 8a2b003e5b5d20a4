# %% [markdown]
# # End-to-end reliability
#
# A request waits in the processing queue (M/M/1), then in the transmission
# queue (M/G/1 with the THz delay as service).  The analytic CDF of the total
# delay is built by convolution on a uniform grid and compared with a
# discrete-event simulation.

# %%
from thzvr import delay, experiments
from thzvr.acceptance import headline_numbers
from thzvr.config import from_dict
from thzvr.numerics import ks_against_samples
from thzvr.simulator import run_tandem

cfg = from_dict({"preset": "validation"})
an = delay.e2e_analysis(cfg.queue, cfg.channel, cfg.stats, delta_max=max(cfg.deltas))
sim = run_tandem(cfg.sim_config())
print(f"mu2 = {an.mu2:.1f}/s, rho = {an.rho:.2e}, Gamma = {an.info['Gamma']}")
print(f"KS(analytic, simulated) = {ks_against_samples(an.Phi, sim.e2e):.4f} over {len(sim.e2e)} requests")
for d in cfg.deltas:
    print(f"delta = {d * 1e3:4.0f} ms  analytic {float(an.reliability(d)):.4f}  simulated {sim.reliability(d):.4f}")

# %% [markdown]
# ## Reliability versus bandwidth
# The fig3 preset is a reconstruction of the unstated geometry.  Mean delays
# show where transmission stops dominating.

# %%
bw = from_dict({"preset": "fig3"})
rows = experiments.sweep_bandwidth(bw)
print(" W(GHz)  rate(Gb/s)  Q1(ms)  Q2(ms)   R@10ms      R@30ms")
for r in rows[::4]:
    print(f"{r['W'] / 1e9:6.1f}  {r['rate_at_mean_I'] / 1e9:9.2f}  {r['mean_q1_delay'] * 1e3:6.3f}  "
          f"{r['mean_q2_delay'] * 1e3:6.3f}  {r['R@0.01']:.7f}  {r['R@0.03']:.7f}")
print(headline_numbers(rows))
