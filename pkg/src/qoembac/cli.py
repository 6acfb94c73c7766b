"""Command-line front end.

    qoembac simulate SCENARIO.ini [--out DIR] [--seed N] [--packets-csv] [--jobs N]
    qoembac fit POINTS.csv [--preset NAME]
    qoembac admit --state STATE.csv --xnew BPS --cl BPS --policy P [--beta V | --preset NAME]
    qoembac trace synth --mean BPS --burstiness B --duration S [-o FILE]
    qoembac trace inspect FILE

Exit status 2 means bad input, 3 a failure while running.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import betafit
from .admission import PRESETS, cbac_decide, preset, pro_ibmac_decide
from .measurement import RateState, SessionRate, iaar
from .scenario import ScenarioError, default_out_dir, load_scenarios, run_scenario, write_bundle
from .traffic import TraceError, format_trace, peak_rate, read_trace, synth_trace

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _say(args, *msg):
    if not getattr(args, "quiet", False):
        print(*msg)


def cmd_simulate(args) -> int:
    try:
        scenarios = load_scenarios(args.scenario, seed=args.seed, packets=args.packets_csv)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or default_out_dir()
    try:
        for scen in scenarios:
            reports = run_scenario(scen, jobs=args.jobs)
            path = write_bundle(scen, reports, out, packets=args.packets_csv)
            for run, rep in zip(scen.runs, reports):
                for w in rep.warnings:
                    print(f"warning: {run.label}: {w}", file=sys.stderr)
                tot = rep.totals()
                drop = 100.0 * tot["dropped"] / tot["sent"] if tot["sent"] else 0.0
                _say(args, f"{scen.name}/{run.label}: admitted={rep.n_admitted} drop={drop:.3f}%")
            _say(args, f"wrote {path}")
    except Exception as exc:  # noqa: BLE001 - any failure mid-run maps to one exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


def cmd_fit(args) -> int:
    try:
        points = betafit.read_points(Path(args.points).read_text(encoding="utf-8"))
        report = betafit.fit_beta_model(points)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = [("fitted", report.alpha, report.delta, report.r_squared, report.adj_r_squared,
             report.rmse, report.n_points)]
    if args.preset:
        try:
            model = preset(args.preset)
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return EXIT_CONFIG
        r2, rmse = betafit.goodness(model, points)
        rows.append((args.preset.upper(), model.alpha, model.delta, r2,
                     betafit.adjusted_r_squared(r2, len(points)), rmse, len(points)))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "alpha", "delta", "r_squared", "adj_r_squared", "rmse", "n_points"])
    for row in rows:
        w.writerow([row[0]] + [f"{v:.6g}" if isinstance(v, float) else v for v in row[1:]])
    sys.stdout.write(buf.getvalue())
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "fit.csv").write_text(buf.getvalue(), encoding="utf-8")
    return 0


def _read_state(path) -> RateState:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    need = ["session_id", "x_bps", "p", "x_min", "x_max"]
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != need:
        raise ValueError(f"state CSV header must be {','.join(need)}")
    entries = []
    for lineno, row in enumerate(reader, start=2):
        try:
            entries.append(SessionRate(int(row["session_id"]), float(row["x_bps"]), float(row["p"]),
                                       float(row["x_min"]), float(row["x_max"])))
        except (TypeError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return RateState(0.0, tuple(entries))


def cmd_admit(args) -> int:
    try:
        state = _read_state(args.state)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.policy == "CBAC":
        d = cbac_decide(iaar(state), args.xnew, args.cl)
    else:
        if args.beta is None and args.preset is None:
            print("error: ProIBMAC needs --beta or --preset", file=sys.stderr)
            return EXIT_CONFIG
        try:
            model = preset(args.preset) if args.preset else args.beta
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return EXIT_CONFIG
        d = pro_ibmac_decide(state, args.xnew, args.cl, model)
    print("accept" if d.accepted else "reject")
    label = "CalR" if d.policy == "CBAC" else "Pro-IAAR"
    print(f"{label}={d.measured / 1e6:.6g} Mbps threshold={d.threshold / 1e6:.6g} Mbps "
          f"x_new={d.x_new / 1e6:.6g} Mbps n={state.n}")
    if d.beta_used is not None:
        print(f"beta={d.beta_used:.6g}")
    if d.error:
        print(f"note: {d.error}")
    return 0


def cmd_trace_synth(args) -> int:
    try:
        trace = synth_trace(args.mean, args.burstiness, args.duration, fps=args.fps, gop=args.gop,
                            seed=args.seed, scene_sigma=args.scene_sigma, scene_peak=args.scene_peak)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = format_trace(trace)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_trace_inspect(args) -> int:
    try:
        trace = read_trace(args.file, fps=args.fps, gop=args.gop)
    except (OSError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    counts = {t: sum(1 for f in trace.frames if f.frame_type == t) for t in "IPB"}
    print(f"frames={len(trace)} duration_s={trace.duration:g} bytes={trace.total_bytes}")
    print(f"I={counts['I']} P={counts['P']} B={counts['B']}")
    print(f"mean_payload_bps={trace.mean_bitrate():.6g} peak_wire_bps={peak_rate(trace):.6g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qoembac", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run every scenario in an INI file")
    s.add_argument("scenario")
    s.add_argument("--out", help="output directory (default: $QOEMBAC_OUT or ./qoembac_out)")
    s.add_argument("--seed", type=int, help="override every scenario's seed")
    s.add_argument("--packets-csv", action="store_true", help="also write packets.csv")
    s.add_argument("--jobs", type=int, default=1, help="runs to execute in parallel")
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit beta = alpha + c_l/(delta*n) to CSV points")
    f.add_argument("points")
    f.add_argument("--preset", help=f"also score a preset ({', '.join(PRESETS)})")
    f.add_argument("--out", help="directory to write fit.csv into")
    f.set_defaults(func=cmd_fit)

    a = sub.add_parser("admit", help="one admission decision from a state CSV")
    a.add_argument("--state", required=True)
    a.add_argument("--xnew", type=float, required=True, help="peak rate of the new session, bits/s")
    a.add_argument("--cl", type=float, required=True, help="link capacity, bits/s")
    a.add_argument("--policy", choices=["CBAC", "ProIBMAC"], required=True)
    g = a.add_mutually_exclusive_group()
    g.add_argument("--beta", type=float)
    g.add_argument("--preset")
    a.set_defaults(func=cmd_admit)

    t = sub.add_parser("trace", help="synthesize or inspect frame traces")
    tsub = t.add_subparsers(dest="trace_command", required=True)
    ts = tsub.add_parser("synth")
    ts.add_argument("--mean", type=float, required=True, help="mean payload bitrate, bits/s")
    ts.add_argument("--burstiness", type=float, default=4.0)
    ts.add_argument("--duration", type=float, default=30.0)
    ts.add_argument("--fps", type=float, default=30.0)
    ts.add_argument("--gop", type=int, default=30)
    ts.add_argument("--seed", type=int, default=0)
    ts.add_argument("--scene-sigma", type=float, default=0.0)
    ts.add_argument("--scene-peak", type=float, default=1.0)
    ts.add_argument("-o", "--output")
    ts.set_defaults(func=cmd_trace_synth)
    ti = tsub.add_parser("inspect")
    ti.add_argument("file")
    ti.add_argument("--fps", type=float, default=30.0)
    ti.add_argument("--gop", type=int, default=30)
    ti.set_defaults(func=cmd_trace_inspect)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
