"""Aggregate-rate estimators used by the admission policies.

All rates are wire rates in bits/s.  ``RateState`` is a snapshot of the
admitted sessions at one instant: the measured rate ``x`` of every session,
the probability weight ``p`` attached to it and the bounds ``x_min``/``x_max``
that the Hoeffding bound needs.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence


class NoDataError(ValueError):
    """Raised when an estimator has nothing to estimate from."""


@dataclass(frozen=True)
class SessionRate:
    session_id: int
    x: float
    p: float = 1.0
    x_min: float = 0.0
    x_max: float = math.inf

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"session {self.session_id}: p={self.p} outside [0, 1]")
        if not self.x_min <= self.x <= self.x_max:
            raise ValueError(f"session {self.session_id}: x outside [x_min, x_max]")


@dataclass(frozen=True)
class RateState:
    t: float
    per_session: tuple[SessionRate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "per_session", tuple(self.per_session))

    @property
    def n(self) -> int:
        return len(self.per_session)

    @classmethod
    def from_arrays(cls, t, x, p=None, x_min=None, x_max=None, ids=None) -> "RateState":
        n = len(x)
        p = [1.0] * n if p is None else p
        x_min = [0.0] * n if x_min is None else x_min
        x_max = [math.inf] * n if x_max is None else x_max
        ids = range(n) if ids is None else ids
        return cls(t, tuple(SessionRate(int(i), float(a), float(b), float(c), float(d))
                            for i, a, b, c, d in zip(ids, x, p, x_min, x_max)))


@dataclass
class MeasurementWindow:
    """Trailing window of ``(t, bits)`` samples spanning at most ``tau`` seconds."""

    tau: float = 1.0
    samples: deque = field(default_factory=deque)

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")

    def add(self, t: float, bits: float):
        self.samples.append((t, bits))
        self.expire(t)

    def expire(self, now: float):
        while self.samples and self.samples[0][0] <= now - self.tau:
            self.samples.popleft()


def iaar(state: RateState) -> float:
    return math.fsum(s.x for s in state.per_session)


def calr(window: MeasurementWindow) -> float:
    """Bits observed in the window averaged over its length ``tau``."""
    if not window.samples:
        raise NoDataError("measurement window is empty")
    return math.fsum(b for _, b in window.samples) / window.tau


def mu_s(state: RateState) -> float:
    """Expected aggregate rate: sum of x_i * p_i."""
    return math.fsum(s.x * s.p for s in state.per_session)


def epsilon(beta: float, mu: float, n: int) -> float:
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta={beta} outside (0, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    if mu < 0:
        raise ValueError("mu must be >= 0")
    return beta * mu * (n - 1) / n


def pro_iaar(mu: float, n: int, eps: float) -> float:
    """Exceedable upper rate limit ``mu + n * eps``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    return mu + n * eps


def hoeffding_gamma(state: RateState, eps: float) -> float:
    """Hoeffding bound on Pr{IAAR >= mu_S + n*eps}.

    A zero denominator (every session pinned to a single rate) gives 0 for
    any positive ``eps``; ``eps == 0`` always gives 1.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    n = state.n
    if n == 0:
        raise NoDataError("no sessions")
    if eps == 0:
        return 1.0
    denom = math.fsum((s.x_max - s.x_min) ** 2 for s in state.per_session)
    if denom == 0:
        return 0.0
    if math.isinf(denom):
        return 1.0
    return math.exp(-2.0 * n * n * eps * eps / denom)


def activity_probability(history: Sequence[int], window: float = 1.0, tick: float = 0.1) -> float:
    """Fraction of measurement ticks in the trailing window with >= 1 packet sent.

    ``history`` holds per-tick packet counts, oldest first.  A session with no
    history yet counts as always active.
    """
    if window <= 0 or tick <= 0:
        raise ValueError("window and tick must be positive")
    n_ticks = max(1, int(round(window / tick)))
    recent = list(history)[-n_ticks:]
    if not recent:
        return 1.0
    return sum(1 for c in recent if c > 0) / len(recent)


def share_weights(activity: Sequence[float]) -> list[float]:
    """Normalize per-session activity fractions into probabilities summing to 1.

    The weights describe how likely each of the n observed session rates is
    to be the one drawn, which keeps ``mu_s`` on the scale of a single
    session's expected rate.
    """
    total = math.fsum(activity)
    if total <= 0:
        n = len(activity)
        return [1.0 / n] * n if n else []
    return [a / total for a in activity]


class RateMeter:
    """Builds ``RateState`` snapshots from live sessions.

    Each session's ``x`` is its wire rate over the trailing ``window``.  A
    session younger than one window is accounted at its declared peak rate
    until a full window has been observed.  ``x_min``/``x_max`` are running
    extremes of observed rates seeded at ``(0, peak_rate)``.

    ``p_mode`` selects the probability weights: ``"share"`` normalizes the
    activity fractions so they sum to 1 across sessions, ``"activity"`` uses
    the raw per-session activity fraction.
    """

    def __init__(self, window: float = 1.0, activity_tick: float = 0.1, p_mode: str = "share"):
        if p_mode not in ("share", "activity"):
            raise ValueError(f"unknown p_mode {p_mode!r}")
        if window <= 0 or activity_tick <= 0:
            raise ValueError("window and activity_tick must be positive")
        self.window = window
        self.activity_tick = activity_tick
        self.p_mode = p_mode
        self._bounds: dict[int, list[float]] = {}

    def measured_rate(self, session, t: float) -> float:
        if t - session.start_time < self.window:
            return float(session.peak_rate)
        return (session.wire_bits_by(t) - session.wire_bits_by(t - self.window)) / self.window

    def activity(self, session, t: float) -> float:
        n_ticks = max(1, int(round(self.window / self.activity_tick)))
        history = []
        for k in range(n_ticks, 0, -1):
            lo = t - k * self.activity_tick
            if lo < session.start_time - 1e-12:
                continue
            history.append(session.frames_sent_by(lo + self.activity_tick) - session.frames_sent_by(lo))
        return activity_probability(history, self.window, self.activity_tick)

    def state(self, t: float, sessions) -> RateState:
        xs = [self.measured_rate(s, t) for s in sessions]
        acts = [self.activity(s, t) for s in sessions]
        ps = share_weights(acts) if self.p_mode == "share" else acts
        entries = []
        for s, x, p in zip(sessions, xs, ps):
            lo, hi = self._bounds.setdefault(s.id, [0.0, float(s.peak_rate)])
            lo, hi = min(lo, x), max(hi, x)
            self._bounds[s.id] = [lo, hi]
            entries.append(SessionRate(s.id, x, min(1.0, p), lo, hi))
        return RateState(t, tuple(entries))

    def calr(self, t: float, sessions) -> float:
        """Aggregate bits seen over the trailing window, divided by its length."""
        win = MeasurementWindow(self.window)
        for s in sessions:
            win.samples.append((t, self.measured_rate(s, t) * self.window))
        if not win.samples:
            return 0.0
        return calr(win)
