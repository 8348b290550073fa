"""Command line entry point: predict, simulate, analyze, geometry, paradox."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .errors import CountsParseError, DegenerateInputError, NullResultError, ValidationError
from .model import parse_hypothesis
from .report import analyze_report, geometry_report, predict_report, simulate
from .scenario import (
    Scenario,
    counts_to_csv,
    counts_to_json,
    dump_scenario,
    load_scenario,
    read_counts,
    write_text,
)
from .signaling import SignalScenario, paradox_region_scan, paradox_threshold, parse_mode, round_trip
from .spacetime import GEOMETRY_PRESETS, velocity_grid

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PARSE = 3
EXIT_DEGENERATE = 4
EXIT_IO = 5

_APPARATUS_FLAGS = {"tpar": "t_par", "tperp": "t_perp", "eta": "eta", "f": "f", "g": "g", "bigF": "big_f"}


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario JSON file; other flags override its fields")
    p.add_argument("--model", help="qm, no-nr, uncorrelated or local (optionally with :<alpha>)")
    p.add_argument("--alpha", help="const:<c>, cos2, sawtooth or table:<deg>=<v>;...")
    p.add_argument("--angle-deg", type=float, help="relative analyzer angle in degrees")
    p.add_argument("--angles", type=float, nargs=4, metavar=("A", "A_PRIME", "B", "B_PRIME"),
                   help="four analyzer orientations in degrees for CHSH")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--apparatus", help="apparatus preset: ideal or aspect")
    p.add_argument("--tpar", type=float)
    p.add_argument("--tperp", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--f", type=float)
    p.add_argument("--g", type=float)
    p.add_argument("--bigF", type=float)
    p.add_argument("--geometry", help="'lightlike', 'default', 'd_pol1,d_pol2,detour1,detour2' or a JSON file")
    p.add_argument("--chunk-size", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--absorption", choices=("ordinary", "null"),
                   help="treat ν1 absorbed in its polarizer as an ordinary or a null-result event")
    p.add_argument("--out", help="output path prefix")
    p.add_argument("--format", choices=("json", "csv"), default="json")


def _parse_geometry(text: str):
    if text in GEOMETRY_PRESETS:
        return text
    parts = text.split(",")
    if len(parts) == 4:
        try:
            vals = [float(x) for x in parts]
        except ValueError:
            raise ValidationError(f"cannot parse geometry {text!r}", "geometry") from None
        return dict(zip(("d_pol1", "d_pol2", "detour1", "detour2"), vals))
    path = Path(text)
    if path.exists():
        data = json.loads(path.read_text())
        return data.get("geometry", data)
    raise ValidationError(f"unknown geometry {text!r}", "geometry")


def build_scenario(args: argparse.Namespace) -> Scenario:
    base = load_scenario(args.scenario) if args.scenario else Scenario()
    d = base.to_dict()
    if args.model is not None or args.alpha is not None:
        model = args.model if args.model is not None else d["hypothesis"].partition(":")[0]
        d["hypothesis"] = parse_hypothesis(model, args.alpha).label
    if args.angles is not None:
        d["angles_deg"] = list(args.angles)
        d["angle_deg"] = args.angle_deg
    elif args.angle_deg is not None:
        d["angle_deg"] = args.angle_deg
    for flag, key in (("trials", "trials"), ("seed", "seed"), ("chunk_size", "chunk_size"), ("workers", "workers")):
        value = getattr(args, flag)
        if value is not None:
            d[key] = value
    if args.apparatus is not None:
        d["apparatus"] = args.apparatus
        d = Scenario.from_dict(d).to_dict()
    for flag, key in _APPARATUS_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            d["apparatus"][key] = value
    if args.geometry is not None:
        d["geometry"] = _parse_geometry(args.geometry)
    if args.absorption is not None:
        d["absorption_is_ordinary"] = args.absorption == "ordinary"
    if args.out is not None:
        d["output"] = args.out
    return Scenario.from_dict(d)


def _emit(text: str, out: str | None = None, suffix: str = "") -> None:
    if out:
        write_text(out + suffix, text)
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2)


def _tables_csv(rep: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["setting", "angle_deg", "table", "p_ab", "p_ab_perp", "p_aperp_b", "p_aperp_bperp"])
    for s in rep["settings"]:
        for kind in ("ideal_table", "real_table"):
            t = s[kind]
            w.writerow([s["setting"] or "", repr(s["angle_deg"]), kind.split("_")[0],
                        t["p_ab"], t["p_ab_perp"], t["p_aperp_b"], t["p_aperp_bperp"]])
    return buf.getvalue()


def cmd_predict(args) -> int:
    s = build_scenario(args)
    rep = predict_report(s)
    if args.format == "csv":
        _emit(_tables_csv(rep), s.output, ".predict.csv")
    else:
        _emit(_json(rep), s.output, ".predict.json")
    return EXIT_OK


def cmd_simulate(args) -> int:
    s = build_scenario(args)
    counts, rep = simulate(s)
    if s.output:
        files = {
            "counts_json": str(write_text(s.output + ".counts.json", counts_to_json(counts))),
            "counts_csv": str(write_text(s.output + ".counts.csv", counts_to_csv(counts))),
            "report": s.output + ".report.json",
            "scenario": str(write_text(s.output + ".scenario.json", dump_scenario(s))),
        }
        rep["files"] = files
        write_text(files["report"], _json(rep))
    if args.format == "csv":
        sys.stdout.write(counts_to_csv(counts))
    else:
        sys.stdout.write(_json(rep) + "\n")
    return EXIT_OK


def cmd_analyze(args) -> int:
    counts = read_counts(args.counts_file)
    rep = analyze_report(counts)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setting", "angle_deg", "ratio", "ratio_stderr", "singles_asymmetry", "singles_stderr",
                    "correlation", "correlation_stderr"])
        for e in rep["estimates"]["settings"]:
            w.writerow([e["setting"] or "", "" if e["angle_deg"] is None else repr(e["angle_deg"]),
                        e["ratio"]["value"], e["ratio"]["stderr"], e["singles_asymmetry"]["value"],
                        e["singles_asymmetry"]["stderr"], e["correlation"]["value"], e["correlation"]["stderr"]])
        _emit(buf.getvalue(), args.out, ".analyze.csv")
    else:
        _emit(_json(rep), args.out, ".analyze.json")
    return EXIT_OK


def cmd_geometry(args) -> int:
    s = build_scenario(args)
    rep = geometry_report(s, velocity_grid(args.n_velocities, args.v_max))
    _emit(_json(rep), s.output, ".geometry.json")
    for w in rep["ordering"]["warnings"]:
        print(f"warning: {w}", file=sys.stderr)
    return EXIT_OK


def _grid(text: str) -> np.ndarray:
    """'start:stop:n' → linspace, otherwise a comma-separated list."""
    parts = text.split(":")
    try:
        if len(parts) == 3:
            return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise ValidationError(f"cannot parse grid {text!r}", "grid") from None


def cmd_paradox(args) -> int:
    mode = parse_mode(args.mode)
    if args.sweep or args.u_grid or args.v_grid:
        u = _grid(args.u_grid or "1.5,2,5")
        v = _grid(args.v_grid or "0.1:0.99:90")
        for x in u:
            paradox_threshold(float(x))
        flags = paradox_region_scan(u, v, mode, args.x1)
        if args.format == "json":
            text = _json({"mode": mode, "u_bar": u.tolist(), "v": v.tolist(), "paradox": flags.tolist(),
                          "n_paradox": int(flags.sum())})
            _emit(text, args.out, ".paradox.json")
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["u_bar\\v"] + [repr(float(x)) for x in v])
            for ub, row in zip(u, flags):
                w.writerow([repr(float(ub))] + [int(x) for x in row])
            _emit(buf.getvalue(), args.out, ".paradox.csv")
        return EXIT_OK
    if args.u_bar is None or args.v is None:
        raise ValidationError("--u-bar and --v are required unless --sweep is given", "paradox")
    thr = paradox_threshold(args.u_bar)
    rep = round_trip(SignalScenario(args.u_bar, args.v, args.x1, mode))
    out = {"mode": mode, "u_bar": args.u_bar, "v": args.v, "x1": args.x1, "threshold": thr, **rep.to_dict()}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(out), lineterminator="\n")
        w.writeheader()
        w.writerow(out)
        _emit(buf.getvalue(), args.out, ".paradox.csv")
    else:
        _emit(_json(out), args.out, ".paradox.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nullresult", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("predict", help="analytic tables, CHSH and bounds")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("simulate", help="Monte Carlo run; writes counts as CSV and JSON")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="estimators from a persisted counts file")
    p.add_argument("counts_file")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("geometry", help="event ordering across Lorentz frames")
    _add_scenario_args(p)
    p.add_argument("--n-velocities", type=int, default=1999)
    p.add_argument("--v-max", type=float, default=0.999)
    p.set_defaults(func=cmd_geometry)

    p = sub.add_parser("paradox", help="superluminal round-trip causality test")
    p.add_argument("--u-bar", type=float)
    p.add_argument("--v", type=float)
    p.add_argument("--x1", type=float, default=1.0)
    p.add_argument("--mode", default="sr", help="sr (special relativity) or aether (preferred frame)")
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--u-grid", help="start:stop:n or comma list of signal speeds")
    p.add_argument("--v-grid", help="start:stop:n or comma list of frame velocities")
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.set_defaults(func=cmd_paradox)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "paradox" and args.format is None:
        args.format = "csv" if (args.sweep or args.u_grid or args.v_grid) else "json"
    try:
        return args.func(args)
    except CountsParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateInputError as exc:
        print(f"degenerate statistics: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NullResultError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
