"""Least-squares fitting of the beta model and goodness-of-fit metrics.

beta = alpha + c_l / (delta * n) is linear in z = c_l / n, so the fit is an
ordinary regression of beta on z with delta = 1 / slope.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .admission import BetaModel


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class BetaPoint:
    c_l: float  # Mbps
    n: int
    beta: float

    def __post_init__(self):
        if self.c_l <= 0 or self.n < 1 or not 0 < self.beta <= 1:
            raise ValueError(f"invalid point {self}")


@dataclass(frozen=True)
class FitReport:
    alpha: float
    delta: float
    r_squared: float
    adj_r_squared: float
    rmse: float
    n_points: int

    @property
    def model(self) -> BetaModel:
        return BetaModel(self.alpha, self.delta, clamp=False)


def _predict(model: BetaModel, points: Sequence[BetaPoint]) -> np.ndarray:
    z = np.array([p.c_l / p.n for p in points], dtype=float)
    return model.alpha + z / model.delta


def goodness(model: BetaModel, points: Sequence[BetaPoint]) -> tuple[float, float]:
    """Return ``(r_squared, rmse)`` of the model on the points.

    r_squared is ``nan`` when all observed betas are equal and the model is
    exact, and ``-inf`` when they are equal but the model misses.
    """
    if not points:
        raise FitError("need at least one point")
    y = np.array([p.beta for p in points], dtype=float)
    resid = y - _predict(model, points)
    sse = float(resid @ resid)
    sst = float(((y - y.mean()) ** 2).sum())
    rmse = math.sqrt(sse / len(points))
    if sst == 0:
        return (math.nan if sse == 0 else -math.inf), rmse
    return 1.0 - sse / sst, rmse


def adjusted_r_squared(r2: float, n_points: int, n_params: int = 2) -> float:
    dof = n_points - n_params
    if dof <= 0 or not math.isfinite(r2):
        return math.nan
    return 1.0 - (1.0 - r2) * (n_points - 1) / dof


def fit_beta_model(points: Sequence[BetaPoint]) -> FitReport:
    if len(points) < 2:
        raise FitError("need at least two points")
    z = np.array([p.c_l / p.n for p in points], dtype=float)
    y = np.array([p.beta for p in points], dtype=float)
    if np.ptp(z) == 0:
        raise FitError("degenerate design: every point has the same c_l/n")
    design = np.column_stack([np.ones_like(z), z])
    (alpha, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    if slope == 0:
        raise FitError("fitted slope is zero; delta is undefined")
    model = BetaModel(float(alpha), float(1.0 / slope), clamp=False)
    r2, rmse = goodness(model, points)
    return FitReport(model.alpha, model.delta, r2, adjusted_r_squared(r2, len(points)), rmse, len(points))


def read_points(text: str) -> list[BetaPoint]:
    """Parse CSV with header ``c_l_mbps,n,beta``."""
    reader = csv.DictReader(io.StringIO(text))
    need = {"c_l_mbps", "n", "beta"}
    if reader.fieldnames is None or not need <= {f.strip() for f in reader.fieldnames}:
        raise FitError("CSV header must contain c_l_mbps,n,beta")
    points = []
    for lineno, row in enumerate(reader, start=2):
        row = {k.strip(): v for k, v in row.items() if k is not None}
        try:
            points.append(BetaPoint(float(row["c_l_mbps"]), int(row["n"]), float(row["beta"])))
        except (TypeError, ValueError) as exc:
            raise FitError(f"line {lineno}: {exc}") from None
    return points


def points_from_rows(rows: Iterable[tuple[float, int, float]]) -> list[BetaPoint]:
    return [BetaPoint(float(c), int(n), float(b)) for c, n, b in rows]
