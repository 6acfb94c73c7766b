"""
Rate estimators on a handful of live sessions
==============================================

Start a few looping sessions, take a measurement snapshot and compare the
aggregate rate (IAAR), its expectation (mu_S) and the exceedable upper limit
Pro-IAAR for a range of beta values.  The Hoeffding bound says how likely
the aggregate is to climb above that limit.
"""
import numpy as np

from qoembac import PRESETS, RateMeter, Session, beta_eval, mad_like_trace
from qoembac.measurement import epsilon, hoeffding_gamma, iaar, mu_s, pro_iaar

# %%
# Eight sessions of the MAD-like source, started 0.4 s apart.
trace = mad_like_trace()
sessions = [Session(i, trace, start_time=0.4 * i, loop=True) for i in range(8)]
for s in sessions:
    s.admit()
print(f"declared peak of one session: {sessions[0].peak_rate / 1e6:.2f} Mbit/s")

# %%
# Snapshot at t = 20 s.  Each x_i is the wire rate over the last second.
meter = RateMeter()
state = meter.state(20.0, sessions)
for e in state.per_session:
    print(f"session {e.session_id}: x={e.x / 1e6:5.2f}  p={e.p:.3f}  range=[{e.x_min / 1e6:.2f}, {e.x_max / 1e6:.2f}]")

mu = mu_s(state)
print(f"\nIAAR   = {iaar(state) / 1e6:.2f} Mbit/s")
print(f"mu_S   = {mu / 1e6:.2f} Mbit/s")

# %%
# Pro-IAAR grows linearly in beta; the bound gamma shrinks as eps grows.
n = state.n
for beta in (0.2, 0.5, 0.8, 1.0):
    eps = epsilon(beta, mu, n)
    print(f"beta={beta:.1f}  Pro-IAAR={pro_iaar(mu, n, eps) / 1e6:6.2f} Mbit/s  gamma={hoeffding_gamma(state, eps):.3g}")

# %%
# The beta model ties beta to the link size and the number of sessions.
model = PRESETS["MAD_CIF"]
grid = np.array([[beta_eval(model, c, k) for k in (15, 20, 25, 30)] for c in (22, 30, 40)])
print("\nbeta for c_l in {22, 30, 40} Mbit/s (rows) and n in {15, 20, 25, 30} (columns)")
print(np.round(grid, 3))
