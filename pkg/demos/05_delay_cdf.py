"""
Delay distribution of admitted sessions
=======================================

Per-session mean delays under CBAC and under Pro-IBMAC with a low beta.
The Pro-IBMAC curve sits to the right: more sessions share the link, so
packets wait longer.
"""
from qoembac import SimConfig, delay_cdf, mad_like_trace, run_simulation

traces = {"mad": mad_like_trace()}
runs = {
    "CBAC": SimConfig(22e6, traces, "CBAC", duration=120.0, seed=3),
    "Pro-IBMAC beta 0.78": SimConfig(22e6, traces, "ProIBMAC", beta=0.78, duration=120.0, seed=3),
}
curves = {name: delay_cdf(run_simulation(cfg), points=10) for name, cfg in runs.items()}

print("fraction  " + "  ".join(f"{name:>20s}" for name in curves))
for k in range(10):
    frac = (k + 1) / 10
    row = "  ".join(f"{1000 * curves[name][k][0]:17.1f} ms" for name in curves)
    print(f"{frac:8.1f}  {row}")
