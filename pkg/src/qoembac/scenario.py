"""Scenario files and CSV bundles.

A scenario file is INI-style.  Sections named ``trace NAME`` define traces,
every other section is a scenario::

    [trace mad]
    synth = mad_like            ; or: file = traces/mad.txt
    seed = 1

    [table6]
    traces = mad
    c_l = 22e6, 24e6, 30e6
    policies = CBAC, ProIBMAC
    beta = MAD_CIF              ; preset name(s) and/or fixed values
    duration = 120
    seed = 3

List-valued ``c_l`` and ``beta`` expand into one run per combination; CBAC
and ``none`` ignore ``beta``.
"""
from __future__ import annotations

import configparser
import csv
import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .admission import PRESETS, preset
from .qoe import score_playback
from .simlink import SimConfig, SimReport, delay_cdf, drop_ratio, run_simulation
from .traffic import TraceError, mad_like_trace, read_trace, synth_trace


class ScenarioError(ValueError):
    pass


_SYNTH_KEYS = {"mean_bitrate": float, "burstiness": float, "duration": float, "fps": float,
               "gop": int, "seed": int, "scene_sigma": float, "scene_peak": float,
               "scene_period": float, "ref_psnr": float, "format_tag": str}

_SIM_KEYS = {"prop_delay": float, "queue_capacity": int, "payload_limit": int, "tick": float,
             "duration": float, "seed": int, "p_mode": str, "beta_n": str,
             "activity_tick": float}


@dataclass
class Run:
    scenario: str
    label: str
    c_l: float
    policy: str
    beta_text: str
    config: SimConfig


@dataclass
class Scenario:
    name: str
    runs: list = field(default_factory=list)


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]


def _bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "yes", "true", "on"):
        return True
    if v in ("0", "no", "false", "off"):
        return False
    raise ScenarioError(f"not a boolean: {value!r}")


def _load_trace(name: str, section, base: Path):
    try:
        if "file" in section:
            path = Path(section["file"])
            if not path.is_absolute():
                path = base / path
            if not path.exists():
                raise ScenarioError(f"trace {name!r}: file not found: {path}")
            return read_trace(path, fps=float(section.get("fps", 30)), gop=int(section.get("gop", 30)),
                              format_tag=section.get("format_tag", "other"))
        kind = section.get("synth", "").strip()
        if kind == "mad_like":
            return mad_like_trace(int(section.get("seed", 1)), float(section.get("duration", 30)))
        if kind in ("yes", "true", "1"):
            kwargs = {k: conv(section[k]) for k, conv in _SYNTH_KEYS.items() if k in section}
            missing = {"mean_bitrate", "burstiness", "duration"} - kwargs.keys()
            if missing:
                raise ScenarioError(f"trace {name!r}: missing {', '.join(sorted(missing))}")
            return synth_trace(**kwargs)
    except TraceError as exc:
        raise ScenarioError(f"trace {name!r}: {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"trace {name!r}: {exc}") from None
    raise ScenarioError(f"trace {name!r}: needs 'file' or 'synth'")


def _parse_beta(text: str):
    if text.upper() in PRESETS:
        return preset(text)
    try:
        value = float(text)
    except ValueError:
        raise ScenarioError(f"beta {text!r} is neither a preset nor a number") from None
    if not 0 < value <= 1:
        raise ScenarioError(f"beta {value} outside (0, 1]")
    return value


def parse_scenarios(text: str, base: Path = Path("."), seed: Optional[int] = None,
                    packets: bool = False) -> list[Scenario]:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse scenario file: {exc}") from None

    traces = {}
    for sec in parser.sections():
        if sec.startswith("trace "):
            name = sec[len("trace "):].strip()
            traces[name] = _load_trace(name, parser[sec], base)

    scenarios = []
    for sec in parser.sections():
        if sec.startswith("trace "):
            continue
        s = parser[sec]
        ids = _split(s.get("traces", ""))
        if not ids:
            raise ScenarioError(f"scenario {sec!r}: no traces listed")
        for tid in ids:
            if tid not in traces:
                raise ScenarioError(f"scenario {sec!r}: unknown trace {tid!r}")
        try:
            capacities = [float(v) for v in _split(s.get("c_l", ""))]
        except ValueError:
            raise ScenarioError(f"scenario {sec!r}: bad c_l") from None
        if not capacities:
            raise ScenarioError(f"scenario {sec!r}: c_l is required")
        policies = _split(s.get("policies", "ProIBMAC"))
        betas = _split(s.get("beta", "MAD_CIF"))
        extra = {}
        for key, conv in _SIM_KEYS.items():
            if key in s:
                try:
                    extra[key] = conv(s[key])
                except ValueError:
                    raise ScenarioError(f"scenario {sec!r}: bad value for {key}") from None
        if "loop" in s:
            extra["loop"] = _bool(s["loop"])
        if seed is not None:
            extra["seed"] = seed
        scen = Scenario(sec)
        for c_l, policy in itertools.product(capacities, policies):
            for beta_text in (betas if policy == "ProIBMAC" else ["-"]):
                beta = _parse_beta(beta_text) if policy == "ProIBMAC" else None
                try:
                    cfg = SimConfig(c_l=c_l, traces={t: traces[t] for t in ids}, policy=policy,
                                    beta=beta, record_packets=packets, **extra)
                except ValueError as exc:
                    raise ScenarioError(f"scenario {sec!r}: {exc}") from None
                label = f"{policy}_{c_l / 1e6:g}M" + ("" if beta is None else f"_{beta_text}")
                scen.runs.append(Run(sec, label, c_l, policy, beta_text, cfg))
        scenarios.append(scen)
    if not scenarios:
        raise ScenarioError("scenario file defines no scenarios")
    names = [s.name for s in scenarios]
    if len(set(names)) != len(names):
        raise ScenarioError("scenario names must be unique")
    return scenarios


def load_scenarios(path, seed: Optional[int] = None, packets: bool = False) -> list[Scenario]:
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario file not found: {path}")
    return parse_scenarios(path.read_text(encoding="utf-8"), path.parent, seed, packets)


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(round(x, 9))
    return str(x)


def _write(path: Path, header: list, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def session_qoe(report: SimReport) -> dict:
    out = {}
    for sid, st in report.sessions.items():
        if not st.admitted:
            continue
        delivery = st.resolved_delivery()
        if delivery:
            out[sid] = score_playback(report.config.traces[st.trace_id], delivery)
    return out


def summarize(run: Run, report: SimReport) -> dict:
    tot = report.totals()
    qoe = session_qoe(report)
    mos = [q.mos for q in qoe.values()]
    return {
        "run": run.label, "c_l_mbps": run.c_l / 1e6, "policy": run.policy, "beta": run.beta_text,
        "admitted": report.n_admitted, "rejected": len(report.rejected_ids()),
        "sent": tot["sent"], "delivered": tot["delivered"], "dropped": tot["dropped"],
        "queued": tot["queued"],
        "drop_percent": 100.0 * drop_ratio(report) if tot["sent"] else 0.0,
        "mean_delay_ms": 1000.0 * report.mean_delay(),
        "mean_mos": sum(mos) / len(mos) if mos else math.nan,
        "min_mos": min(mos) if mos else math.nan,
        "max_div_percent": max((q.div_percent for q in qoe.values()), default=math.nan),
    }


def write_bundle(scenario: Scenario, reports: list, out_dir, packets: bool = False) -> Path:
    out = Path(out_dir) / scenario.name
    out.mkdir(parents=True, exist_ok=True)
    summaries = [summarize(run, rep) for run, rep in zip(scenario.runs, reports)]
    _write(out / "summary.csv", list(summaries[0]), [list(s.values()) for s in summaries])
    _write(out / "admissions.csv",
           ["run", "t", "session", "policy", "decision", "measured", "beta", "x_new", "threshold"],
           [(run.label, d.t, sid, d.policy, "accept" if d.accepted else "reject", d.measured,
             math.nan if d.beta_used is None else d.beta_used, d.x_new, d.threshold)
            for run, rep in zip(scenario.runs, reports) for sid, d in rep.admissions])
    _write(out / "rates.csv", ["run", "t", "n", "iaar", "mu_s", "beta", "pro_iaar", "calr", "gamma"],
           [(run.label, r.t, r.n, r.iaar, r.mu_s, r.beta, r.pro_iaar, r.calr, r.gamma)
            for run, rep in zip(scenario.runs, reports) for r in rep.rates])
    _write(out / "qoe.csv", ["run", "session", "mos", "div"],
           [(run.label, sid, q.mos, q.div_percent)
            for run, rep in zip(scenario.runs, reports) for sid, q in session_qoe(rep).items()])
    cdf_rows = []
    for run, rep in zip(scenario.runs, reports):
        if rep.session_mean_delays():
            cdf_rows += [(run.label, d, f) for d, f in delay_cdf(rep, 20)]
    _write(out / "delay_cdf.csv", ["run", "delay_s", "fraction"], cdf_rows)
    if packets:
        _write(out / "packets.csv", ["run", "session", "frame", "seq", "send_time", "delay", "status"],
               [(run.label,) + p for run, rep in zip(scenario.runs, reports) for p in rep.packets])
    return out


def run_scenario(scenario: Scenario, jobs: int = 1) -> list:
    configs = [r.config for r in scenario.runs]
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_simulation, configs))
    return [run_simulation(c) for c in configs]


def default_out_dir() -> str:
    return os.environ.get("QOEMBAC_OUT", "qoembac_out")
