"""Admission rules: CBAC, Pro-IBMAC and the beta prediction model."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from .measurement import RateMeter, RateState, epsilon, iaar, mu_s, pro_iaar

POLICIES = ("CBAC", "ProIBMAC")


class BetaOutOfRegion(ValueError):
    def __init__(self, c_l_mbps: float, n: int, value: float):
        self.c_l_mbps, self.n, self.value = c_l_mbps, n, value
        super().__init__(f"beta model gives {value:.4f} <= 0 at c_l={c_l_mbps:g} Mbps, n={n}")


@dataclass(frozen=True)
class BetaModel:
    """beta = alpha + c_l / (delta * n), with c_l in Mbps."""

    alpha: float
    delta: float
    clamp: bool = True

    def __post_init__(self):
        if self.delta == 0:
            raise ValueError("delta must be non-zero")


PRESETS = {
    "MAD_CIF": BetaModel(-0.5429, 0.9689),
    "PARIS_CIF": BetaModel(-0.1227, 1.952),
    "DEADLINE_QCIF": BetaModel(-0.1323, 0.4991),
}


def preset(name: str) -> BetaModel:
    try:
        return PRESETS[name.upper()]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def beta_eval(model: BetaModel, c_l_mbps: float, n: int) -> float:
    if n < 1:
        raise ValueError("n must be >= 1")
    if c_l_mbps <= 0:
        raise ValueError("c_l must be positive")
    beta = model.alpha + c_l_mbps / (model.delta * n)
    if model.clamp:
        if beta <= 0:
            raise BetaOutOfRegion(c_l_mbps, n, beta)
        beta = min(beta, 1.0)
    return beta


@dataclass(frozen=True)
class AdmissionDecision:
    accepted: bool
    policy: str
    measured: float
    threshold: float
    x_new: float
    beta_used: Optional[float] = None
    t: float = 0.0
    error: Optional[str] = None


def cbac_decide(calr: float, x_new: float, c_l: float, t: float = 0.0) -> AdmissionDecision:
    if min(calr, x_new, c_l) < 0:
        raise ValueError("rates must be >= 0")
    return AdmissionDecision(calr + x_new <= c_l, "CBAC", calr, c_l, x_new, None, t)


def pro_ibmac_decide(state: RateState, x_new: float, c_l: float,
                     model: Union[BetaModel, float], t: Optional[float] = None,
                     n_beta: Optional[float] = None) -> AdmissionDecision:
    """Accept iff mu_S * (1 + beta*(n-1)) + x_new <= c_l.

    ``model`` is either a ``BetaModel`` or a fixed beta in (0, 1].  The model
    is evaluated at ``n_beta`` sessions, defaulting to the current count.  A
    beta outside the model's validity region rejects the request instead of
    raising.
    """
    if x_new <= 0 or c_l <= 0:
        raise ValueError("x_new and c_l must be positive")
    t = state.t if t is None else t
    n = state.n
    if n == 0:
        return AdmissionDecision(x_new <= c_l, "ProIBMAC", 0.0, c_l, x_new, None, t)
    try:
        if isinstance(model, BetaModel):
            beta = beta_eval(model, c_l / 1e6, n if n_beta is None else n_beta)
        else:
            beta = float(model)
        mu = mu_s(state)
        measured = pro_iaar(mu, n, epsilon(beta, mu, n))
    except ValueError as exc:
        return AdmissionDecision(False, "ProIBMAC", math.inf, c_l, x_new, None, t, str(exc))
    return AdmissionDecision(measured + x_new <= c_l, "ProIBMAC", measured, c_l, x_new, beta, t)


def projected_sessions(state: RateState, c_l: float) -> float:
    """Sessions of the current mean measured rate that would fill the link."""
    if state.n == 0:
        return 1.0
    mean = iaar(state) / state.n
    return max(1.0, c_l / mean) if mean > 0 else float(state.n)


@dataclass
class AdmissionController:
    """Answers admission requests against a live set of sessions.

    ``beta_n`` picks the session count fed to the beta model: ``"projected"``
    uses how many sessions of the current mean rate fit on the link,
    ``"current"`` uses the number admitted so far.
    """

    policy: str
    c_l: float
    model: Union[BetaModel, float, None] = None
    meter: RateMeter = field(default_factory=RateMeter)
    beta_n: str = "projected"

    def __post_init__(self):
        if self.policy not in POLICIES + ("none",):
            raise ValueError(f"unknown policy {self.policy!r}")
        if self.policy == "ProIBMAC" and self.model is None:
            raise ValueError("Pro-IBMAC needs a beta model or a fixed beta")
        if self.beta_n not in ("projected", "current"):
            raise ValueError(f"unknown beta_n {self.beta_n!r}")

    def n_for_beta(self, state: RateState) -> float:
        return projected_sessions(state, self.c_l) if self.beta_n == "projected" else state.n

    def decide(self, t: float, x_new: float, active: Sequence) -> AdmissionDecision:
        if self.policy == "CBAC":
            return cbac_decide(self.meter.calr(t, active), x_new, self.c_l, t)
        if self.policy == "ProIBMAC":
            state = self.meter.state(t, active)
            return pro_ibmac_decide(state, x_new, self.c_l, self.model, t, self.n_for_beta(state))
        measured = self.meter.calr(t, active)
        return AdmissionDecision(True, "none", measured, self.c_l, x_new, None, t)


@dataclass
class AdmissionLog:
    decisions: list = field(default_factory=list)
    admitted: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.admitted)


def admit_sequence(requests: Sequence, policy: str, c_l: float, model=None,
                   rate_oracle: Optional[Callable] = None, beta_n: str = "projected") -> AdmissionLog:
    """Decide each request at its start time, in arrival order.

    ``rate_oracle(t, sessions)`` returns the ``RateState`` of the admitted,
    unfinished sessions; CBAC uses its aggregate rate as CalR.  Without an
    oracle a windowed ``RateMeter`` is used.
    """
    meter = RateMeter()
    log = AdmissionLog()
    last_t = -math.inf
    for req in requests:
        t = req.start_time
        if t < last_t:
            raise ValueError("requests must be ordered by arrival time")
        last_t = t
        for s in log.admitted:
            if s.state == "active" and s.end_time <= t:
                s.finish()
        active = [s for s in log.admitted if s.state == "active"]
        state = rate_oracle(t, active) if rate_oracle else meter.state(t, active)
        if policy == "CBAC":
            d = cbac_decide(iaar(state), req.peak_rate, c_l, t)
        elif policy == "ProIBMAC":
            n_beta = projected_sessions(state, c_l) if beta_n == "projected" else None
            d = pro_ibmac_decide(state, req.peak_rate, c_l, model, t, n_beta)
        else:
            raise ValueError(f"unknown policy {policy!r}")
        log.decisions.append((req.id, d))
        if d.accepted:
            req.admit()
            log.admitted.append(req)
        else:
            req.reject()
    return log
