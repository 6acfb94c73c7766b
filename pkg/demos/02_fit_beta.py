"""
Fitting the beta model
======================

beta = alpha + c_l / (delta * n) is linear in z = c_l / n, so an ordinary
least-squares line gives the coefficients directly.
"""
from pathlib import Path

import numpy as np

from qoembac.admission import PRESETS
from qoembac.betafit import BetaPoint, adjusted_r_squared, fit_beta_model, goodness, read_points

here = Path(__file__).parent
points = read_points((here / "beta_points.csv").read_text())
report = fit_beta_model(points)
print(f"alpha = {report.alpha:.4f}")
print(f"delta = {report.delta:.4f}")
print(f"r2 = {report.r_squared:.4f}   adjusted r2 = {report.adj_r_squared:.4f}   rmse = {report.rmse:.4f}")

# %%
# The published MAD coefficients scored on the same points.
r2, rmse = goodness(PRESETS["MAD_CIF"], points)
print(f"\nMAD_CIF preset: r2 = {r2:.4f}  adjusted r2 = {adjusted_r_squared(r2, len(points)):.4f}  rmse = {rmse:.4f}")

# %%
# Residuals per point, fitted model vs. preset.
print("\nc_l   n  beta   fitted  preset")
for p in points:
    z = p.c_l / p.n
    fit = report.alpha + z / report.delta
    pre = PRESETS["MAD_CIF"].alpha + z / PRESETS["MAD_CIF"].delta
    print(f"{p.c_l:4g} {p.n:3d}  {p.beta:.2f}   {fit:.4f}  {pre:.4f}")

# %%
# Noise sensitivity: refit after jittering beta by 0.01.
rng = np.random.default_rng(0)
fits = []
for _ in range(200):
    noisy = [BetaPoint(p.c_l, p.n, min(1.0, p.beta + rng.normal(0, 0.01))) for p in points]
    r = fit_beta_model(noisy)
    fits.append((r.alpha, r.delta))
fits = np.array(fits)
print(f"\nalpha spread {fits[:, 0].std():.3f}, delta spread {fits[:, 1].std():.3f} under 0.01 jitter")
