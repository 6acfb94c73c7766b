"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed in the
terminal summary (see conftest.py) and by running this file directly.
"""
import filecmp
import math
import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from qoembac.admission import PRESETS, beta_eval
from qoembac.betafit import BetaPoint, fit_beta_model, points_from_rows
from qoembac.cli import main as cli_main
from qoembac.measurement import RateState, epsilon, hoeffding_gamma, iaar, mu_s, pro_iaar
from qoembac.qoe import score_session
from qoembac.scenario import session_qoe
from qoembac.simlink import SimConfig, drop_ratio, run_simulation
from qoembac.traffic import HEADER_BYTES, mad_like_trace, peak_rate, synth_trace

VERDICTS: dict = {}

CAPACITIES = (22, 24, 30, 36, 39, 40)
TABLE = [(22, 15, 0.96), (24, 17, 0.95), (30, 21, 0.94), (36, 26, 0.87), (39, 29, 0.84), (40, 30, 0.83)]
ORACLE_ALPHA, ORACLE_DELTA = -0.61999335, 0.91875036
SWEEP = (0.96, 0.89, 0.85, 0.78)
SEED = 3
DURATION = 500.0


def verdict(num: int, ok: bool, detail: str):
    VERDICTS[num] = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, VERDICTS[num]


@lru_cache(maxsize=None)
def policy_run(policy: str, c_mbps: float, beta=None):
    """One 500 s run on the MAD-like source; cached across criteria."""
    model = PRESETS["MAD_CIF"] if beta == "preset" else beta
    cfg = SimConfig(c_mbps * 1e6, {"mad": mad_like_trace()}, policy, beta=model,
                    duration=DURATION, seed=SEED)
    return run_simulation(cfg)


def test_c01_closed_form_exactness():
    rng = np.random.default_rng(2024)
    cases = []
    for _ in range(1000):
        n = int(rng.integers(1, 40))
        x = rng.uniform(0, 8e6, n)
        p = rng.uniform(0, 1, n)
        beta = float(rng.uniform(1e-6, 1.0))
        cases.append((RateState.from_arrays(0.0, x, p), x, p, beta))
    worst = 0.0
    start = time.perf_counter()
    results = []
    for s, _, _, beta in cases:
        m = mu_s(s)
        e = epsilon(beta, m, s.n)
        results.append((iaar(s), m, e, pro_iaar(m, s.n, e)))
    elapsed = time.perf_counter() - start
    for (s, x, p, beta), got in zip(cases, results):
        fx = [Fraction(v) for v in x]
        fm = sum(Fraction(a) * Fraction(b) for a, b in zip(x, p))
        fe = Fraction(beta) * Fraction(got[1]) * (s.n - 1) / s.n
        want = (sum(fx), fm, fe, Fraction(got[1]) + s.n * Fraction(got[2]))
        for g, w in zip(got, want):
            if w != 0:
                worst = max(worst, abs(float((Fraction(g) - w) / w)))
            else:
                worst = max(worst, abs(g))
    verdict(1, worst <= 1e-12 and elapsed < 1.0,
            f"max rel err {worst:.2e} (tol 1e-12), {elapsed * 1000:.1f} ms for 1000 inputs")


def test_c02_beta_reproduction():
    diffs = [abs(beta_eval(PRESETS["MAD_CIF"], c, n) - b) for c, n, b in TABLE]
    worst = max(diffs)
    row = TABLE[diffs.index(worst)][0]
    verdict(2, worst <= 0.04, f"max |beta - published| = {worst:.4f} at {row} Mbps (tol 0.04)")


def test_c03_fit_recovery():
    rng = np.random.default_rng(5)
    errs = []
    for alpha, delta in [(-0.5, 1.0), (-0.5429, 0.9689), (-0.1227, 1.952), (-0.1323, 0.4991)]:
        pts = []
        while len(pts) < 12:
            c, n = float(rng.uniform(5, 60)), int(rng.integers(2, 60))
            b = alpha + c / (delta * n)
            if 0 < b <= 1:
                pts.append(BetaPoint(c, n, b))
        rep = fit_beta_model(pts)
        errs += [abs(rep.alpha - alpha), abs(rep.delta - delta)]
    table = fit_beta_model(points_from_rows(TABLE))
    ok = (max(errs) <= 1e-9 and table.r_squared >= 0.85 and table.rmse <= 0.03
          and abs(table.alpha - ORACLE_ALPHA) <= 0.10 and abs(table.delta - ORACLE_DELTA) <= 0.10)
    verdict(3, ok, f"noiseless err {max(errs):.1e}; table alpha={table.alpha:.4f} delta={table.delta:.4f} "
                   f"r2={table.r_squared:.4f} rmse={table.rmse:.4f}")


def test_c04_hoeffding_monte_carlo():
    rng = np.random.default_rng(7)
    trials = 10_000
    start = time.perf_counter()
    cells, worst_margin, failures = 0, -math.inf, 0
    for n in (2, 5, 10):
        lo = rng.uniform(0, 2e6, n)
        hi = lo + rng.uniform(0.5e6, 4e6, n)
        state = RateState.from_arrays(0.0, (lo + hi) / 2, None, lo, hi)
        mean = float(np.sum((lo + hi) / 2))
        x = rng.uniform(lo, hi, (trials, n)).sum(axis=1)
        spread = math.sqrt(float(np.sum((hi - lo) ** 2)))
        for k in (0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0):
            eps = k * spread / n
            gamma = hoeffding_gamma(state, eps)
            freq = float(np.mean(x >= mean + n * eps))
            se = math.sqrt(gamma * (1 - gamma) / trials)
            cells += 1
            worst_margin = max(worst_margin, freq - gamma - 3 * se)
            failures += freq > gamma + 3 * se
    elapsed = time.perf_counter() - start
    verdict(4, failures == 0 and elapsed < 30,
            f"{cells} cells, {failures} violations, max(freq - gamma - 3se) = {worst_margin:.4f}, {elapsed:.2f} s")


def _offered_peak(rep, cfg):
    """Largest wire bits sent in any 1 s window (t - 1, t], over all packets."""
    sends, bits = [], []
    for sid, frame, seq, t, _, _ in rep.packets:
        tr = cfg.traces[rep.sessions[sid].trace_id]
        size = tr.frames[frame % len(tr)].size
        sends.append(t)
        bits.append((min(cfg.payload_limit, size - seq * cfg.payload_limit) + HEADER_BYTES) * 8)
    if not sends:
        return 0.0, 0
    order = np.argsort(sends, kind="stable")
    t = np.asarray(sends)[order]
    csum = np.concatenate([[0], np.cumsum(np.asarray(bits)[order])])
    first = np.searchsorted(t, t - 1.0, side="right")
    last = np.searchsorted(t, t, side="right")
    return float((csum[last] - csum[first]).max()), int((last - first).max())


def _config(k: int) -> SimConfig:
    rng = np.random.default_rng(1000 + k)
    traces = {f"v{j}": synth_trace(float(rng.uniform(3e5, 2.5e6)), float(rng.uniform(1, 8)),
                                   float(rng.uniform(3, 12)), seed=int(rng.integers(10_000)),
                                   scene_peak=float(rng.uniform(1, 3)), scene_period=4.0)
              for j in range(int(rng.integers(1, 4)))}
    duration = float(rng.uniform(10, 40))
    loop = bool(rng.integers(2))
    if k % 2 == 0:
        # sized so the sum of declared peaks fits on the link
        ids = sorted(traces)
        sched = [(float(rng.uniform(0, duration / 2)), ids[int(rng.integers(len(ids)))], None)
                 for _ in range(int(rng.integers(1, 10)))]
        total = sum(peak_rate(traces[tid], cyclic=True) for _, tid, _ in sched)
        return SimConfig(total * float(rng.uniform(1.0, 1.3)), traces, "none", arrival_schedule=sched,
                         duration=duration, loop=loop, seed=k, record_packets=True)
    policy = ["none", "CBAC", "ProIBMAC"][int(rng.integers(3))]
    return SimConfig(float(rng.uniform(1e6, 2e7)), traces, policy, beta=float(rng.uniform(0.3, 1.0)),
                     queue_capacity=int(rng.integers(1, 500)), duration=duration, loop=loop, seed=k,
                     record_packets=True)


def test_c05_conservation_and_zero_drop():
    broken, fitting, fitting_drops = 0, 0, 0
    for k in range(50):
        cfg = _config(k)
        rep = run_simulation(cfg)
        for s in rep.sessions.values():
            broken += s.sent != s.delivered + s.dropped + s.queued
        tot = rep.totals()
        broken += tot["sent"] != tot["delivered"] + tot["dropped"] + tot["queued"]
        peak_bits, peak_pkts = _offered_peak(rep, cfg)
        if peak_bits <= cfg.c_l * 1.0 and peak_pkts <= cfg.queue_capacity:
            fitting += 1
            fitting_drops += tot["dropped"]
    verdict(5, broken == 0 and fitting_drops == 0 and fitting >= 20,
            f"50 configs, {broken} conservation breaks; {fitting} with peak <= c_l, {fitting_drops} drops")


def test_c06_policy_direction():
    rows, ok = [], True
    for c in CAPACITIES:
        pro = policy_run("ProIBMAC", c, "preset").n_admitted
        cb = policy_run("CBAC", c).n_admitted
        ok &= pro > cb if c >= 30 else pro >= cb
        rows.append(f"{c}:{pro}/{cb}")
    verdict(6, ok, "c_l:Pro/CBAC " + " ".join(rows))


def test_c07_beta_sweep():
    reps = [policy_run("ProIBMAC", 22, b) for b in SWEEP]
    counts = [r.n_admitted for r in reps]
    drops = [drop_ratio(r) for r in reps]
    preset_drop = drop_ratio(policy_run("ProIBMAC", 22, "preset"))
    ok = (all(a <= b for a, b in zip(counts, counts[1:])) and all(a <= b for a, b in zip(drops, drops[1:]))
          and drops[0] == 0 and preset_drop == 0)
    detail = " ".join(f"{b}:{n}/{100 * d:.2f}%" for b, n, d in zip(SWEEP, counts, drops))
    verdict(7, ok, f"beta:admitted/drop {detail}; preset drop {100 * preset_drop:.2f}%")


def test_c08_qoe_extremes():
    clean, bad = 0, 0
    for c in CAPACITIES:
        for rep in (policy_run("CBAC", c), policy_run("ProIBMAC", c, "preset")):
            qoe = session_qoe(rep)
            for sid, q in qoe.items():
                if rep.sessions[sid].dropped == 0:
                    clean += 1
                    bad += (q.mos != 5.0) or (q.div_percent != 0.0)
    lost = score_session(mad_like_trace(), [False] * 900)
    ok = bad == 0 and clean > 0 and lost.mos == 1.0
    verdict(8, ok, f"{clean} loss-free sessions, {bad} not at MOS 5/DIV 0; full loss MOS {lost.mos}")


def test_c09_delay_direction():
    def mean_of_means(rep):
        return float(np.mean(rep.session_mean_delays()))

    pro = mean_of_means(policy_run("ProIBMAC", 22, 0.78))
    cb = mean_of_means(policy_run("CBAC", 22))
    verdict(9, pro > cb, f"mean session delay Pro(beta 0.78) {pro * 1000:.1f} ms vs CBAC {cb * 1000:.1f} ms")


SCENARIO = """
[trace mad]
synth = mad_like

[rerun]
traces = mad
c_l = 22e6, 30e6
policies = CBAC, ProIBMAC
beta = MAD_CIF, 0.8
duration = 60
seed = 11
"""


def test_c10_determinism(tmp_path):
    ini = tmp_path / "s.ini"
    ini.write_text(SCENARIO)
    outs = []
    for k, jobs in enumerate(("1", "1", "2")):
        out = tmp_path / f"o{k}"
        assert cli_main(["simulate", str(ini), "--out", str(out), "--packets-csv", "--quiet",
                         "--jobs", jobs]) == 0
        outs.append(out / "rerun")
    names = sorted(p.name for p in outs[0].iterdir())
    same = all(filecmp.cmp(outs[0] / n, o / n, shallow=False) for o in outs[1:] for n in names)
    verdict(10, same and len(names) == 6, f"{len(names)} CSV files identical across 3 runs: {same}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
