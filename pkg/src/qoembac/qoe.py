"""Frame-loss driven quality scoring: PSNR to MOS, session MOS and DIV."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .traffic import VideoTrace

# (lower bound exclusive, MOS), highest first
_MOS_STEPS = ((37.0, 5), (31.0, 4), (25.0, 3), (20.0, 2))


class QoeError(ValueError):
    pass


def psnr_to_mos(psnr: float) -> int:
    if psnr < 0:
        raise ValueError("PSNR must be >= 0")
    for bound, mos in _MOS_STEPS:
        if psnr > bound:
            return mos
    return 1


@dataclass(frozen=True)
class FrameOutcome:
    index: int
    delivered: bool
    sent_mos: int
    recv_mos: int


@dataclass(frozen=True)
class SessionQoe:
    mos: float
    div_percent: float
    interval: int = 30


def frame_outcomes(trace: VideoTrace, delivery: Sequence[bool], gop: int | None = None,
                   cyclic: bool = False) -> list[FrameOutcome]:
    """Apply the GoP dependency rule to a per-frame delivery map.

    A frame is viable when all its packets arrived and, unless it is an I
    frame, every earlier frame of its GoP is viable too.  Non-viable frames
    score MOS 1.  With ``cyclic`` the delivery map may cover several
    play-throughs of the trace (the last one possibly partial).
    """
    gop = trace.gop if gop is None else gop
    n = len(trace)
    if not cyclic and len(delivery) != n:
        raise QoeError(f"delivery map has {len(delivery)} entries for {n} frames")
    if gop < 1:
        raise QoeError("gop must be >= 1")
    out = []
    chain_ok = False
    for k, ok in enumerate(delivery):
        frame = trace.frames[k % n]
        pos = frame.index % gop
        if frame.frame_type == "I" or pos == 0:
            chain_ok = bool(ok)
        else:
            chain_ok = chain_ok and bool(ok)
        sent = psnr_to_mos(frame.ref_psnr)
        out.append(FrameOutcome(k, chain_ok, sent, sent if chain_ok else 1))
    return out


def div_metric(outcomes: Sequence[FrameOutcome], interval: int = 30) -> float:
    """Largest per-interval percentage of frames received below their sent MOS."""
    if interval < 1:
        raise ValueError("interval must be >= 1")
    if not outcomes:
        raise QoeError("no frames")
    worse = np.array([o.recv_mos < o.sent_mos for o in outcomes], dtype=float)
    worst = 0.0
    for start in range(0, len(worse), interval):
        chunk = worse[start:start + interval]
        worst = max(worst, 100.0 * chunk.sum() / len(chunk))
    return worst


def score_outcomes(outcomes: Sequence[FrameOutcome], interval: int = 30) -> SessionQoe:
    if not outcomes:
        raise QoeError("no frames")
    mos = float(np.mean([o.recv_mos for o in outcomes]))
    return SessionQoe(mos, div_metric(outcomes, interval), interval)


def score_session(trace: VideoTrace, delivery: Sequence[bool], gop: int | None = None,
                  interval: int = 30) -> SessionQoe:
    return score_outcomes(frame_outcomes(trace, delivery, gop), interval)


def score_playback(trace: VideoTrace, delivery: Sequence[bool], gop: int | None = None,
                   interval: int = 30) -> SessionQoe:
    """Like ``score_session`` for a looped session covering any number of frames."""
    return score_outcomes(frame_outcomes(trace, delivery, gop, cyclic=True), interval)
