"""Discrete-event simulation of a droptail FIFO bottleneck link.

Sessions are requested over time and admitted by a policy.  Admitted
sessions emit each frame as an atomic burst of packets at its frame instant;
the link serves packets first-in first-out at ``c_l`` bits/s and drops any
packet that finds ``queue_capacity`` packets already in the system.
Admission and rate measurement run on the sender side, so they never depend
on the link state.
"""
from __future__ import annotations

import heapq
import math
from array import array
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .admission import AdmissionController, AdmissionDecision, BetaModel, beta_eval
from .measurement import NoDataError, RateMeter, epsilon, hoeffding_gamma, iaar, mu_s, pro_iaar
from .traffic import HEADER_BYTES, PAYLOAD_LIMIT, Session, packet_count


class SimConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    c_l: float
    traces: dict
    policy: str = "ProIBMAC"
    beta: Union[BetaModel, float, None] = None
    arrival_schedule: Optional[Sequence[tuple]] = None
    prop_delay: float = 0.010
    queue_capacity: int = 5300
    payload_limit: int = PAYLOAD_LIMIT
    tick: float = 1.0
    duration: float = 500.0
    seed: int = 0
    loop: bool = True
    p_mode: str = "share"
    beta_n: str = "projected"
    activity_tick: float = 0.1
    record_packets: bool = False

    def __post_init__(self):
        if self.c_l <= 0:
            raise SimConfigError("c_l must be positive")
        if self.queue_capacity < 1:
            raise SimConfigError("queue_capacity must be >= 1")
        if self.duration <= 0 or self.tick <= 0:
            raise SimConfigError("duration and tick must be positive")
        if self.policy not in ("CBAC", "ProIBMAC", "none"):
            raise SimConfigError(f"unknown policy {self.policy!r}")
        if self.policy == "ProIBMAC" and self.beta is None:
            raise SimConfigError("Pro-IBMAC needs a beta model or a fixed beta")
        if not self.traces:
            raise SimConfigError("no traces configured")

    def schedule(self) -> list[tuple]:
        if self.arrival_schedule is not None:
            return sorted(self.arrival_schedule, key=lambda r: r[0])
        return make_schedule(self.duration, sorted(self.traces), self.seed)


def make_schedule(duration: float, trace_ids: Sequence[str], seed: int = 0,
                  interval: float = 1.0) -> list[tuple]:
    """One request per ``interval`` with uniform jitter inside the interval."""
    rng = np.random.default_rng(seed)
    count = int(math.floor(duration / interval))
    jitter = rng.random(count)
    picks = rng.integers(0, len(trace_ids), count)
    out = []
    for k in range(count):
        t = (k + jitter[k]) * interval
        if t < duration:
            out.append((float(t), trace_ids[int(picks[k])], None))
    return out


@dataclass
class SessionStats:
    session_id: int
    trace_id: str
    start_time: float
    peak_rate: float
    admitted: bool
    sent: int = 0
    delivered: int = 0
    dropped: int = 0
    queued: int = 0
    delay_sum: float = 0.0
    delays: array = field(default_factory=lambda: array("d"))
    # per emitted frame: 1 = all packets delivered, 0 = a packet dropped,
    # 2 = a packet still queued at the end
    frames: bytearray = field(default_factory=bytearray)

    @property
    def mean_delay(self) -> float:
        return self.delay_sum / self.delivered if self.delivered else math.nan

    def resolved_delivery(self) -> list[bool]:
        """Delivery map up to the first frame whose fate is still open."""
        cut = self.frames.find(2)
        frames = self.frames if cut < 0 else self.frames[:cut]
        return [b == 1 for b in frames]


@dataclass
class RateSample:
    t: float
    n: int
    iaar: float
    mu_s: float
    beta: float
    pro_iaar: float
    calr: float
    gamma: float


@dataclass
class SimReport:
    config: SimConfig
    sessions: dict
    admissions: list
    rates: list
    packets: list
    warnings: list
    busy_time: float = 0.0
    max_backlog: float = 0.0  # seconds of queued work seen by any arrival
    max_queue: int = 0

    def admitted_ids(self) -> list[int]:
        return [sid for sid, s in self.sessions.items() if s.admitted]

    def rejected_ids(self) -> list[int]:
        return [sid for sid, s in self.sessions.items() if not s.admitted]

    @property
    def n_admitted(self) -> int:
        return len(self.admitted_ids())

    def totals(self) -> dict:
        keys = ("sent", "delivered", "dropped", "queued")
        return {k: sum(getattr(s, k) for s in self.sessions.values()) for k in keys}

    def mean_delay(self) -> float:
        delivered = sum(s.delivered for s in self.sessions.values())
        if not delivered:
            return math.nan
        return math.fsum(s.delay_sum for s in self.sessions.values()) / delivered

    def session_mean_delays(self) -> list[float]:
        return [s.mean_delay for s in self.sessions.values() if s.delivered]


def drop_ratio(report: SimReport) -> float:
    tot = report.totals()
    if tot["sent"] == 0:
        raise NoDataError("no traffic was sent")
    return tot["dropped"] / tot["sent"]


def delay_cdf(report_or_delays, points: int = 20) -> list[tuple[float, float]]:
    """Empirical CDF of per-session mean delays at evenly spaced quantiles.

    Returns ``(delay, F(delay))`` pairs for quantile levels ``j / points``,
    ``j = 1..points``.
    """
    if points < 1:
        raise ValueError("points must be >= 1")
    if isinstance(report_or_delays, SimReport):
        delays = report_or_delays.session_mean_delays()
    else:
        delays = list(report_or_delays)
    if not delays:
        raise NoDataError("no delivered packets")
    d = np.sort(np.asarray(delays, dtype=float))
    m = len(d)
    out = []
    for j in range(1, points + 1):
        q = j / points
        idx = max(0, int(math.ceil(q * m - 1e-12)) - 1)
        value = float(d[idx])
        frac = float(np.searchsorted(d, value, side="right")) / m
        out.append((value, frac))
    return out


# event kinds, ordered for ties at the same instant
_FRAME, _ARRIVAL, _TICK = 0, 1, 2


def run_simulation(config: SimConfig) -> SimReport:
    schedule = config.schedule()
    for t, trace_id, _ in schedule:
        if trace_id not in config.traces:
            raise SimConfigError(f"unknown trace_id {trace_id!r}")
    warnings = [f"request at t={t:.6f} is beyond duration {config.duration:g}"
                for t, _, _ in schedule if t >= config.duration]

    meter = RateMeter(config.tick, config.activity_tick, config.p_mode)
    controller = None
    if config.policy != "none":
        controller = AdmissionController(config.policy, config.c_l, config.beta, meter, config.beta_n)

    c_l = config.c_l
    limit = config.payload_limit
    prop = config.prop_delay
    cap = config.queue_capacity
    end = config.duration
    record = config.record_packets

    events: list = []
    seq = 0
    for t, trace_id, peak in schedule:
        if t < end:
            heapq.heappush(events, (t, _ARRIVAL, seq, (trace_id, peak)))
            seq += 1
    k = 1
    while k * config.tick <= end + 1e-9:
        heapq.heappush(events, (k * config.tick, _TICK, seq, None))
        seq += 1
        k += 1

    sessions: dict[int, Session] = {}
    stats: dict[int, SessionStats] = {}
    active: list[Session] = []
    admissions: list = []
    rates: list = []
    packets: list = []

    # packets in the system: (finish_time, send_time, session_id, frame_no)
    system: deque = deque()
    last_finish = 0.0
    busy = 0.0
    max_backlog = 0.0
    max_queue = 0
    next_id = 0

    def retire(now: float):
        while system and system[0][0] <= now:
            finish, sent_at, sid, _ = system.popleft()
            st = stats[sid]
            delay = finish - sent_at + prop
            st.delivered += 1
            st.delay_sum += delay
            st.delays.append(delay)

    while events:
        t, kind, _, payload = heapq.heappop(events)
        if t > end:
            break
        if kind == _FRAME:
            sess, frame_no = payload
            trace = sess.trace
            frame = trace.frames[frame_no % len(trace)]
            st = stats[sess.id]
            retire(t)
            n_pkts = packet_count(frame.size, limit)
            status = 1
            for j in range(n_pkts):
                payload_bytes = min(limit, frame.size - j * limit)
                wire = (payload_bytes + HEADER_BYTES) * 8
                st.sent += 1
                if len(system) >= cap:
                    st.dropped += 1
                    status = 0
                    if record:
                        packets.append((sess.id, frame_no, j, t, math.nan, "dropped"))
                    continue
                start = t if t > last_finish else last_finish
                last_finish = start + wire / c_l
                busy += wire / c_l
                system.append((last_finish, t, sess.id, frame_no))
                if last_finish - t > max_backlog:
                    max_backlog = last_finish - t
                if len(system) > max_queue:
                    max_queue = len(system)
                if record:
                    packets.append((sess.id, frame_no, j, t, last_finish + prop - t, "delivered"))
            st.frames.append(status)
            nxt = frame_no + 1
            if sess.loop or nxt < len(trace):
                heapq.heappush(events, (sess.start_time + nxt / trace.fps, _FRAME, seq, (sess, nxt)))
                seq += 1
            else:
                sess.finish()
                active.remove(sess)
        elif kind == _ARRIVAL:
            trace_id, peak = payload
            sid = next_id
            next_id += 1
            sess = Session(sid, config.traces[trace_id], t, peak, config.loop, limit)
            sessions[sid] = sess
            if controller is None:
                decision = AdmissionDecision(True, "none", math.nan, c_l, sess.peak_rate, None, t)
            else:
                decision = controller.decide(t, sess.peak_rate, active)
            admissions.append((sid, decision))
            stats[sid] = SessionStats(sid, trace_id, t, float(sess.peak_rate), decision.accepted)
            if decision.accepted:
                sess.admit()
                active.append(sess)
                heapq.heappush(events, (t, _FRAME, seq, (sess, 0)))
                seq += 1
            else:
                sess.reject()
        else:
            rates.append(_sample_rates(t, active, meter, config, controller))

    retire(end)
    for finish, _, sid, frame_no in system:
        st = stats[sid]
        st.queued += 1
        st.frames[frame_no] = 2
    if record and system:
        residual = {(sid, f) for _, _, sid, f in system}
        packets = [p if (p[0], p[1]) not in residual or p[5] == "dropped" else p[:5] + ("queued",)
                   for p in packets]
    # the link may still be busy past the end; only count time inside the run
    busy -= max(0.0, last_finish - end)
    return SimReport(config, stats, admissions, rates, packets, warnings, busy, max_backlog, max_queue)


def _sample_rates(t: float, active: list, meter: RateMeter, config: SimConfig,
                  controller: Optional[AdmissionController]) -> RateSample:
    state = meter.state(t, active)
    agg = iaar(state)
    calr = meter.calr(t, active)
    n = state.n
    if n == 0:
        return RateSample(t, 0, 0.0, 0.0, math.nan, 0.0, calr, math.nan)
    mu = mu_s(state)
    try:
        if isinstance(config.beta, BetaModel):
            n_beta = controller.n_for_beta(state) if controller else n
            beta = beta_eval(config.beta, config.c_l / 1e6, n_beta)
        elif config.beta is not None:
            beta = float(config.beta)
        else:
            beta = 1.0
        eps = epsilon(beta, mu, n)
        return RateSample(t, n, agg, mu, beta, pro_iaar(mu, n, eps), calr, hoeffding_gamma(state, eps))
    except ValueError:
        return RateSample(t, n, agg, mu, math.nan, math.nan, calr, math.nan)
