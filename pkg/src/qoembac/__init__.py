"""Measurement-based admission control for bursty video traffic.

Modules
-------
traffic      frame traces, packetization, per-session send rates
measurement  IAAR, CalR, mu_S, epsilon, Pro-IAAR and the Hoeffding bound
admission    CBAC and Pro-IBMAC decisions, the beta model and its presets
betafit      least-squares fit of the beta model
simlink      droptail FIFO bottleneck link simulator
qoe          PSNR to MOS, session MOS and DIV
"""
from .admission import (PRESETS, AdmissionDecision, BetaModel, admit_sequence, beta_eval,
                        cbac_decide, preset, pro_ibmac_decide)
from .betafit import BetaPoint, FitReport, fit_beta_model, goodness
from .measurement import (MeasurementWindow, RateMeter, RateState, SessionRate, activity_probability,
                          calr, epsilon, hoeffding_gamma, iaar, mu_s, pro_iaar)
from .qoe import div_metric, psnr_to_mos, score_playback, score_session
from .simlink import SimConfig, SimReport, delay_cdf, drop_ratio, run_simulation
from .traffic import (FrameRecord, Packet, Session, VideoTrace, instantaneous_rate, load_trace,
                      mad_like_trace, packetize, peak_rate, synth_trace)

__all__ = [
    "PRESETS",
    "AdmissionDecision",
    "BetaModel",
    "admit_sequence",
    "beta_eval",
    "cbac_decide",
    "preset",
    "pro_ibmac_decide",
    "BetaPoint",
    "FitReport",
    "fit_beta_model",
    "goodness",
    "MeasurementWindow",
    "RateMeter",
    "RateState",
    "SessionRate",
    "activity_probability",
    "calr",
    "epsilon",
    "hoeffding_gamma",
    "iaar",
    "mu_s",
    "pro_iaar",
    "div_metric",
    "psnr_to_mos",
    "score_playback",
    "score_session",
    "SimConfig",
    "SimReport",
    "delay_cdf",
    "drop_ratio",
    "run_simulation",
    "FrameRecord",
    "Packet",
    "Session",
    "VideoTrace",
    "instantaneous_rate",
    "load_trace",
    "mad_like_trace",
    "packetize",
    "peak_rate",
    "synth_trace",
]

__version__ = "0.1.0"
