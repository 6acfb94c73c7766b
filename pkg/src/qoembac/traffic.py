"""Video frame traces, packetization and per-session send rates.

Trace files are EvalVid-like text: one frame per line with columns
``index type size_bytes [psnr_db]``; lines starting with ``#`` are comments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

PAYLOAD_LIMIT = 1024
UDP_HEADER = 8
IP_HEADER = 20
HEADER_BYTES = UDP_HEADER + IP_HEADER
DEFAULT_PSNR = 38.0

FRAME_TYPES = ("I", "P", "B")
FORMAT_TAGS = ("CIF", "QCIF", "other")


class TraceError(ValueError):
    """Base class for trace ingestion and validation failures."""


class TraceParseError(TraceError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class TraceStructureError(TraceError):
    pass


class EmptyTraceError(TraceError):
    pass


@dataclass(frozen=True)
class FrameRecord:
    index: int
    frame_type: str
    size: int
    ref_psnr: float = DEFAULT_PSNR

    def __post_init__(self):
        if self.frame_type not in FRAME_TYPES:
            raise TraceStructureError(f"frame {self.index}: unknown type {self.frame_type!r}")
        if self.size <= 0:
            raise TraceStructureError(f"frame {self.index}: size must be positive")
        if self.index < 0:
            raise TraceStructureError("frame index must be non-negative")
        if self.ref_psnr < 0:
            raise TraceStructureError(f"frame {self.index}: negative PSNR")


@dataclass(frozen=True)
class Packet:
    session_id: int
    frame_index: int
    seq_in_frame: int
    payload: int
    send_time: float = 0.0
    header: int = HEADER_BYTES

    @property
    def wire_size(self) -> int:
        return self.payload + self.header


def packet_count(size: int, payload_limit: int = PAYLOAD_LIMIT) -> int:
    return -(-size // payload_limit)


def packetize(frame: FrameRecord, payload_limit: int = PAYLOAD_LIMIT,
              session_id: int = 0, send_time: float = 0.0) -> list[Packet]:
    """Split a frame into UDP/IP packets; the last one carries the remainder."""
    if payload_limit <= 0:
        raise ValueError("payload_limit must be positive")
    count = packet_count(frame.size, payload_limit)
    packets = []
    for seq in range(count):
        payload = min(payload_limit, frame.size - seq * payload_limit)
        packets.append(Packet(session_id, frame.index, seq, payload, send_time))
    return packets


@dataclass(frozen=True, eq=False)
class VideoTrace:
    """An immutable VBR source: ordered frames played at ``fps``."""

    frames: tuple[FrameRecord, ...]
    fps: float = 30.0
    gop: int = 30
    format_tag: str = "other"

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if not self.frames:
            raise EmptyTraceError("trace has no frames")
        if self.fps <= 0:
            raise TraceStructureError("fps must be positive")
        if self.gop < 1:
            raise TraceStructureError("gop must be >= 1")
        if self.format_tag not in FORMAT_TAGS:
            raise TraceStructureError(f"unknown format tag {self.format_tag!r}")
        for expected, frame in enumerate(self.frames):
            if frame.index != expected:
                raise TraceStructureError(
                    f"frame indices must increase by 1 from 0; got {frame.index} at position {expected}")
            if expected % self.gop == 0 and frame.frame_type != "I":
                raise TraceStructureError(f"frame {expected} opens a GoP but is type {frame.frame_type}")

    def __len__(self):
        return len(self.frames)

    @property
    def duration(self) -> float:
        return len(self.frames) / self.fps

    @property
    def total_bytes(self) -> int:
        return sum(f.size for f in self.frames)

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([f.size for f in self.frames], dtype=np.int64)

    @cached_property
    def ref_psnr(self) -> np.ndarray:
        return np.array([f.ref_psnr for f in self.frames], dtype=float)

    def packet_counts(self, payload_limit: int = PAYLOAD_LIMIT) -> np.ndarray:
        return -(-self.sizes // payload_limit)

    def wire_bits(self, payload_limit: int = PAYLOAD_LIMIT) -> np.ndarray:
        """Bits each frame puts on the wire, headers included."""
        cache = self.__dict__.setdefault("_wire_cache", {})
        if payload_limit not in cache:
            counts = self.packet_counts(payload_limit)
            cache[payload_limit] = (self.sizes + HEADER_BYTES * counts) * 8
        return cache[payload_limit]

    def mean_bitrate(self) -> float:
        """Payload bitrate averaged over the whole trace."""
        return self.total_bytes * 8 / self.duration


def _window_frames(window: float, fps: float) -> int:
    # frames j with k - window*fps < j <= k
    return max(1, int(math.ceil(window * fps - 1e-9)))


def peak_rate(trace: VideoTrace, window: float = 1.0, payload_limit: int = PAYLOAD_LIMIT,
              cyclic: bool = False) -> float:
    """Largest wire bitrate over any ``window``-second span of the trace.

    With ``cyclic`` the trace is treated as looping, so windows that wrap
    around the end are considered as well.
    """
    bits = trace.wire_bits(payload_limit)
    m = _window_frames(window, trace.fps)
    if cyclic:
        reps = -(-m // len(bits))
        bits = np.concatenate([bits] * (reps + 1))
    csum = np.concatenate([[0], np.cumsum(bits)])
    k = np.arange(len(bits))
    lo = np.maximum(k + 1 - m, 0)
    return float((csum[k + 1] - csum[lo]).max()) / window


@dataclass(eq=False)
class Session:
    """A flow that plays ``trace`` from ``start_time`` at its frame rate.

    ``peak_rate`` (bits/s) is the declared rate of the flow; when omitted it
    is derived as the maximum 1-second wire bitrate of the trace.  With
    ``loop`` the trace repeats until the simulation ends.
    """

    id: int
    trace: VideoTrace
    start_time: float = 0.0
    peak_rate: Optional[float] = None
    loop: bool = False
    payload_limit: int = PAYLOAD_LIMIT
    state: str = "requested"
    _transitions = {"requested": ("active", "rejected"), "active": ("finished",)}

    def __post_init__(self):
        if self.start_time < 0:
            raise ValueError("start_time must be >= 0")
        if self.peak_rate is None:
            self.peak_rate = peak_rate(self.trace, 1.0, self.payload_limit, cyclic=self.loop)
        if self.peak_rate <= 0:
            raise ValueError("peak_rate must be positive")

    def _move(self, new: str):
        if new not in self._transitions.get(self.state, ()):
            raise ValueError(f"session {self.id}: cannot go from {self.state} to {new}")
        self.state = new

    def admit(self):
        self._move("active")

    def reject(self):
        self._move("rejected")

    def finish(self):
        self._move("finished")

    @property
    def end_time(self) -> float:
        return math.inf if self.loop else self.start_time + self.trace.duration

    def frames_sent_by(self, t: float) -> int:
        """Number of frames emitted at or before ``t``."""
        if t < self.start_time:
            return 0
        k = int(math.floor((t - self.start_time) * self.trace.fps + 1e-9)) + 1
        return k if self.loop else min(k, len(self.trace))

    def wire_bits_by(self, t: float) -> int:
        """Cumulative wire bits the session has emitted up to ``t``."""
        k = self.frames_sent_by(t)
        if k == 0:
            return 0
        csum = _cumulative_bits(self.trace, self.payload_limit)
        loops, rem = divmod(k, len(self.trace))
        return int(loops * csum[-1] + csum[rem])


def _cumulative_bits(trace: VideoTrace, payload_limit: int) -> np.ndarray:
    cache = trace.__dict__.setdefault("_csum_cache", {})
    if payload_limit not in cache:
        cache[payload_limit] = np.concatenate([[0], np.cumsum(trace.wire_bits(payload_limit))])
    return cache[payload_limit]


def instantaneous_rate(session: Session, t: float, window: float = 1.0) -> float:
    """Wire bits sent in ``(t - window, t]`` divided by ``window``."""
    if window <= 0:
        raise ValueError("window must be positive")
    return (session.wire_bits_by(t) - session.wire_bits_by(t - window)) / window


def load_trace(source: str, fps: float = 30.0, gop: int = 30, format_tag: str = "other") -> VideoTrace:
    frames = []
    has_psnr = None
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cols = line.split()
        if len(cols) not in (3, 4):
            raise TraceParseError(lineno, f"expected 3 or 4 columns, got {len(cols)}")
        try:
            index = int(cols[0])
        except ValueError:
            raise TraceParseError(lineno, f"bad frame index {cols[0]!r}") from None
        ftype = cols[1].upper()
        if ftype not in FRAME_TYPES:
            raise TraceParseError(lineno, f"unknown frame type {cols[1]!r}")
        try:
            size = int(cols[2])
            psnr = float(cols[3]) if len(cols) == 4 else DEFAULT_PSNR
        except ValueError:
            raise TraceParseError(lineno, "non-numeric size or PSNR") from None
        if size <= 0:
            raise TraceParseError(lineno, "frame size must be positive")
        if psnr < 0 or not math.isfinite(psnr):
            raise TraceParseError(lineno, "PSNR must be a finite value >= 0")
        if has_psnr is None:
            has_psnr = len(cols) == 4
        frames.append(FrameRecord(index, ftype, size, psnr))
    if not frames:
        raise EmptyTraceError("trace contains no frames")
    return VideoTrace(tuple(frames), fps=fps, gop=gop, format_tag=format_tag)


def read_trace(path, **kwargs) -> VideoTrace:
    with open(path, encoding="utf-8") as fh:
        return load_trace(fh.read(), **kwargs)


def format_trace(trace: VideoTrace) -> str:
    lines = [f"# fps={trace.fps:g} gop={trace.gop} format={trace.format_tag}"]
    lines += [f"{f.index} {f.frame_type} {f.size} {f.ref_psnr:.2f}" for f in trace.frames]
    return "\n".join(lines) + "\n"


def synth_trace(mean_bitrate: float, burstiness: float, duration: float, fps: float = 30.0,
                gop: int = 30, seed: int = 0, scene_sigma: float = 0.0,
                scene_peak: float = 1.0, scene_period: float = 30.0,
                ref_psnr: float = DEFAULT_PSNR, format_tag: str = "other") -> VideoTrace:
    """Generate a synthetic VBR trace.

    I frames are ``burstiness`` times the mean frame size and P frames shrink
    to keep the mean.  Per-frame jitter grows with burstiness (none at 1.0).

    Two optional GoP-level effects make the 1-second rate vary:
    ``scene_sigma`` is a slowly varying log-normal level, and ``scene_peak``
    scales one randomly placed GoP in every ``scene_period`` seconds (a scene
    cut) while the rest of the period shrinks to compensate.  Sizes are
    rescaled at the end so the trace mean matches ``mean_bitrate``.
    """
    if min(mean_bitrate, burstiness, duration, fps, gop) <= 0:
        raise ValueError("all parameters must be positive")
    if burstiness < 1:
        raise ValueError("burstiness must be >= 1")
    if gop > 1 and burstiness >= gop:
        raise ValueError("burstiness must be smaller than the GoP length")
    if scene_sigma < 0:
        raise ValueError("scene_sigma must be >= 0")
    if scene_peak < 1 or scene_period <= 0:
        raise ValueError("scene_peak must be >= 1 and scene_period positive")
    n = max(1, int(round(duration * fps)))
    rng = np.random.default_rng(seed)
    mean_frame = mean_bitrate / 8.0 / fps

    idx = np.arange(n)
    is_i = idx % gop == 0
    if gop == 1:
        base = np.full(n, mean_frame)
    else:
        p_size = mean_frame * (gop - burstiness) / (gop - 1)
        base = np.where(is_i, burstiness * mean_frame, p_size)

    jitter_sigma = 0.3 * (1.0 - 1.0 / burstiness)
    if jitter_sigma > 0:
        base = base * rng.lognormal(-0.5 * jitter_sigma ** 2, jitter_sigma, n)
    if scene_sigma > 0:
        n_gops = -(-n // gop)
        rho = 0.8
        level = np.empty(n_gops)
        level[0] = rng.normal(0.0, scene_sigma)
        innov = rng.normal(0.0, scene_sigma * math.sqrt(1 - rho ** 2), n_gops)
        for g in range(1, n_gops):
            level[g] = rho * level[g - 1] + innov[g]
        base = base * np.exp(level - 0.5 * scene_sigma ** 2)[idx // gop]
    if scene_peak > 1:
        n_gops = -(-n // gop)
        per = max(1, int(round(scene_period * fps / gop)))
        level = np.ones(n_gops)
        for first in range(0, n_gops, per):
            span = min(per, n_gops - first)
            if span > 1:
                level[first:first + span] = (span - scene_peak) / (span - 1) if span > scene_peak else 1.0
                level[first + int(rng.integers(span))] = scene_peak if span > scene_peak else 1.0
        base = base * level[idx // gop]

    base *= mean_frame * n / base.sum()
    sizes = np.maximum(1, np.rint(base)).astype(np.int64)
    frames = tuple(
        FrameRecord(int(i), "I" if is_i[i] else "P", int(sizes[i]), ref_psnr) for i in range(n))
    return VideoTrace(frames, fps=fps, gop=gop, format_tag=format_tag)


def mad_like_trace(seed: int = 1, duration: float = 30.0) -> VideoTrace:
    """A slow-motion CIF-like source: about 1.6 Mbit/s on the wire, I frames
    four times the mean and one scene cut per 30 s at 3.5x the usual level."""
    return synth_trace(1.55e6, 4.0, duration, fps=30, gop=30, seed=seed, scene_peak=3.5,
                       format_tag="CIF")


def total_wire_bits(trace: VideoTrace, payload_limit: int = PAYLOAD_LIMIT) -> int:
    return int(trace.wire_bits(payload_limit).sum())
