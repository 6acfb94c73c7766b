"""
CBAC against Pro-IBMAC over a range of link sizes
=================================================

The same seeded arrival schedule is replayed under both policies.  Pro-IBMAC
uses the MAD_CIF beta model.  Set DURATION to 500 for the full-length run.
"""
import numpy as np

from qoembac import PRESETS, SimConfig, drop_ratio, mad_like_trace, run_simulation
from qoembac.scenario import session_qoe

DURATION = 120.0
traces = {"mad": mad_like_trace()}

print(" c_l  policy     n  drop%  delay_ms  MOS")
for c_l in (22, 24, 30, 36, 39, 40):
    for policy in ("ProIBMAC", "CBAC"):
        beta = PRESETS["MAD_CIF"] if policy == "ProIBMAC" else None
        rep = run_simulation(SimConfig(c_l * 1e6, traces, policy, beta=beta, duration=DURATION, seed=3))
        mos = np.mean([q.mos for q in session_qoe(rep).values()])
        print(f"{c_l:4d}  {policy:9s} {rep.n_admitted:3d} {100 * drop_ratio(rep):6.2f} "
              f"{1000 * rep.mean_delay():9.1f} {mos:4.2f}")
