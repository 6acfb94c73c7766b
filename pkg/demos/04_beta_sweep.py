"""
Trading sessions for loss with beta
===================================

A smaller beta lowers the estimated aggregate rate, admits more sessions and
eventually overloads the link.
"""
from qoembac import SimConfig, drop_ratio, mad_like_trace, run_simulation
from qoembac.scenario import session_qoe

traces = {"mad": mad_like_trace()}

print("beta   n  drop%  mean_MOS  worst_DIV%")
for beta in (0.96, 0.89, 0.85, 0.78):
    rep = run_simulation(SimConfig(22e6, traces, "ProIBMAC", beta=beta, duration=120.0, seed=3))
    qoe = session_qoe(rep).values()
    mos = sum(q.mos for q in qoe) / len(qoe)
    div = max(q.div_percent for q in qoe)
    print(f"{beta:.2f} {rep.n_admitted:3d} {100 * drop_ratio(rep):6.2f} {mos:8.2f} {div:10.1f}")
