"""Command-line front end.

Exit codes: 0 success, 2 usage/config error, 3 numerical failure. On
failure stderr carries one JSON diagnostic object.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .analytic import Thresholds
from .errors import BlockadeError, ConfigurationError, DomainError, NumericalError
from .fock import Truncation
from .params import FIG2, SystemParams, dump_params, load_params
from .spectrum import resonance_table
from .sweeps import (CSV_COLUMNS, FIGURES, ROUTES, SweepSpec, _fmt, evaluate, figure_specs,
                     run_sweep, to_csv, window_shifts, write_outputs)

PARAM_FLAGS = {
    "delta_c": "--delta-c", "g0": "--g0", "G": "--pump", "Omega": "--drive",
    "gamma_c": "--gamma-c", "gamma_m": "--gamma-m", "nbar_m": "--nbar", "omega_m": "--omega-m",
}


class UsageError(Exception):
    pass


def _routes(text: str) -> tuple:
    routes = tuple(r.strip() for r in text.split(",") if r.strip())
    bad = [r for r in routes if r not in ROUTES]
    if bad or not routes:
        raise argparse.ArgumentTypeError(f"routes must be a comma list from {ROUTES}")
    return routes


def _add_common(p: argparse.ArgumentParser, routes_default: str = "analytic,perturbative,master"):
    for field, flag in PARAM_FLAGS.items():
        p.add_argument(flag, dest=field, type=float, default=None)
    p.add_argument("--config", type=Path, help="JSON parameter file (inline flags override)")
    p.add_argument("--na", type=int, default=6)
    p.add_argument("--nb", type=int, default=12)
    p.add_argument("--m-max", dest="m_max", type=int, default=8)
    p.add_argument("--routes", type=_routes, default=_routes(routes_default))
    p.add_argument("--out", type=Path)
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("auto", "direct", "krylov"), default="auto")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optoblockade",
                                     description="Photon blockade in a pumped optomechanical cavity")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("point", help="correlations at one parameter point"))

    sw = sub.add_parser("sweep", help="sweep detuning or pump strength")
    _add_common(sw, "analytic")
    sw.add_argument("--axis", choices=("delta_c", "pump_G"), default="delta_c")
    sw.add_argument("--from", dest="start", type=float, default=-1.0)
    sw.add_argument("--to", dest="stop", type=float, default=1.0)
    sw.add_argument("--points", type=int, default=201)

    _add_common(sub.add_parser("resonances", help="resonance detunings as CSV"))

    fig = sub.add_parser("figure", help="sweeps behind a figure preset")
    fig.add_argument("name", choices=FIGURES)
    fig.add_argument("--out", type=Path, default=Path("."))
    fig.add_argument("--points", type=int, default=None)
    fig.add_argument("--routes", type=_routes, default=None)
    fig.add_argument("--threads", type=int, default=None)

    _add_common(sub.add_parser("convergence", help="g2/g3 versus master-equation truncation"), "master")

    val = sub.add_parser("validate", help="run the cross-route invariant suite")
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--as-printed", action="store_true",
                     help="swap in the alternative g3 numerator (negative control)")
    return parser


def resolve_params(args) -> SystemParams:
    base = load_params(args.config) if getattr(args, "config", None) else FIG2
    overrides = {f: getattr(args, f) for f in PARAM_FLAGS if getattr(args, f, None) is not None}
    return base.replace(**overrides)


def _truncation(args) -> Truncation:
    return Truncation(n_a=args.na, n_b=args.nb, m_max=args.m_max)


def _emit(text: str, out: Path | None):
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _echo(p: SystemParams):
    print("# params: " + dump_params(p), file=sys.stderr)


def cmd_point(args) -> int:
    p = resolve_params(args)
    _echo(p)
    t = _truncation(args)
    rows = []
    for route in args.routes:
        pt = evaluate(route, p, t, Thresholds(), args.method)
        rows.append(["delta_c", _fmt(p.delta_c), route, _fmt(pt.P1), _fmt(pt.P2), _fmt(pt.P3),
                     _fmt(pt.mean_n), _fmt(pt.g2), _fmt(pt.g3), str(pt.label)])
    lines = [",".join(CSV_COLUMNS)] + [",".join(r) for r in rows]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    p = resolve_params(args)
    _echo(p)
    spec = SweepSpec(args.axis, args.start, args.stop, args.points, args.routes, p,
                     _truncation(args), Thresholds(), args.method)
    result = run_sweep(spec, args.threads)
    if args.out is None:
        sys.stdout.write(to_csv(result))
    else:
        write_outputs(result, args.out)
    return 0


def cmd_resonances(args) -> int:
    p = resolve_params(args)
    _echo(p)
    lines = ["kind,m,delta_c"] + [f"{k},{m},{_fmt(v)}" for k, m, v in resonance_table(p).rows()]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_figure(args) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    summary = {}
    for tag, spec in figure_specs(args.name, args.points, args.routes):
        result = run_sweep(spec, args.threads)
        path = args.out / f"{args.name}_{tag}.csv"
        write_outputs(result, path)
        summary[tag] = {"csv": str(path), "features": result.features}
        print(f"wrote {path}")
    if args.name == "fig5":
        tags = list(summary)
        for route in summary[tags[0]]["features"]:
            shifts = window_shifts(summary[tags[0]]["features"][route]["windows"],
                                   summary[tags[1]]["features"][route]["windows"])
            summary[f"window_shift_{route}"] = shifts
            print(f"{route} window shifts: " + ", ".join(f"{s:.4f}" for s in shifts))
    (args.out / f"{args.name}_summary.json").write_text(json.dumps(summary, indent=2))
    return 0


LADDER = ((4, 8), (6, 12), (8, 24))


def cmd_convergence(args) -> int:
    p = resolve_params(args)
    _echo(p)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["n_a", "n_b", "g2", "g3", "rel_delta_g2", "rel_delta_g3"])
    prev = None
    last = (0.0, 0.0)
    for na, nb in LADDER:
        pt = evaluate("master", p, Truncation(na, nb), Thresholds(), args.method)
        if prev is None:
            last = (0.0, 0.0)
        else:
            last = (abs(pt.g2 - prev.g2) / abs(pt.g2), abs(pt.g3 - prev.g3) / abs(pt.g3))
        writer.writerow([na, nb, _fmt(pt.g2), _fmt(pt.g3), _fmt(last[0]), _fmt(last[1])])
        prev = pt
    if max(last) > 0.01:
        print(json.dumps({"error": "NotConverged", "exit_code": 3,
                          "message": f"last truncation step changed g2/g3 by {max(last):.3%}"}),
              file=sys.stderr)
        return 3
    return 0


def cmd_validate(args) -> int:
    from .validation import run_all

    checks = run_all(seed=args.seed, as_printed=args.as_printed)
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.detail}")
    if all(c.passed for c in checks):
        return 0
    failed = [c.name for c in checks if not c.passed]
    print(json.dumps({"error": "ValidationFailed", "exit_code": 3, "failed": failed}), file=sys.stderr)
    return 3


COMMANDS = {"point": cmd_point, "sweep": cmd_sweep, "resonances": cmd_resonances,
            "figure": cmd_figure, "convergence": cmd_convergence, "validate": cmd_validate}


def _fail(exc: Exception, code: int) -> int:
    print(json.dumps({"error": type(exc).__name__, "exit_code": code, "message": str(exc)}),
          file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, ConfigurationError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(exc, 2)
    except (NumericalError, ArithmeticError) as exc:
        return _fail(exc, 3)
    except BlockadeError as exc:
        return _fail(exc, 3)


if __name__ == "__main__":
    sys.exit(main())
