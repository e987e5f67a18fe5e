"""Command-line interface.

Exit codes: 0 ok, 1 comparison above threshold, 2 bad input, 3 no oracle.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .channel import RoundSchedule, SharpnessRule, parse_schedule, read_schedule
from .closed_form import asymptote
from .horizon import (
    CSV_COLUMNS,
    NoOracleError,
    compare_closed_form,
    find_uniform_sharpness,
    rows_to_csv,
    run_sequence,
    steering_horizon,
    sweep,
)
from .states import (
    InvalidStateError,
    ParameterError,
    StateFamilySpec,
    make_state,
    read_state,
    is_entangled_ppt,
    state_from_json,
    state_to_json,
    to_bloch,
)
from .steering import cjwr_f3, maximize_f3, read_frame, steering_value

EXIT_OK, EXIT_COMPARE, EXIT_INPUT, EXIT_NO_ORACLE = 0, 1, 2, 3
FAMILY_PARAMS = ("alpha", "theta", "m", "m1", "m2", "m3")
_PI_RE = re.compile(r"^\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


class UsageError(Exception):
    pass


def parse_real(text: str) -> float:
    """Float, or a multiple of pi such as ``pi/4`` or ``3*pi/8``."""
    m = _PI_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def parse_list(text: str) -> list[float]:
    return [parse_real(t) for t in text.split(",") if t.strip()]


def parse_k_range(text: str) -> list[int]:
    """``5``, ``1..5`` or ``1,2,4``."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(t) for t in text.split(",") if t.strip()]


# -- argument plumbing ------------------------------------------------------

def _add_family_args(p: argparse.ArgumentParser, multi: bool = False):
    g = p.add_argument_group("initial state")
    g.add_argument("--family", help="bell, schmidt, gamma, tilde (tilde_gamma) or werner")
    conv = parse_list if multi else parse_real
    for name in FAMILY_PARAMS:
        g.add_argument(f"--{name}", type=conv, default=None)
    if not multi:
        g.add_argument("--state-file", help="JSON state file instead of a family")


def _family_params(args) -> dict:
    return {n: getattr(args, n) for n in FAMILY_PARAMS if getattr(args, n) is not None}


def _initial(args):
    if getattr(args, "state_file", None):
        if args.family:
            raise UsageError("give either --family or --state-file, not both")
        return read_state(args.state_file)
    if not args.family:
        raise UsageError("one of --family or --state-file is required")
    return StateFamilySpec(args.family, _family_params(args))


def _add_output_args(p: argparse.ArgumentParser, default: str = "table"):
    p.add_argument("--out", default=default,
                   help="csv, json, table, or a file path (format from its suffix)")


def _emit(args, rows: list[dict], payload: dict | list | None = None, text: str | None = None):
    out = args.out
    fmt, path = out, None
    if out not in ("csv", "json", "table"):
        path = Path(out)
        fmt = {".json": "json", ".csv": "csv"}.get(path.suffix, "table")
    if fmt == "csv":
        body = rows_to_csv(rows)
    elif fmt == "json":
        body = json.dumps(payload if payload is not None else rows, indent=2) + "\n"
    else:
        body = text if text is not None else _table(rows)
    if path is None:
        sys.stdout.write(body)
    else:
        path.write_text(body)


def _table(rows: list[dict]) -> str:
    if not rows:
        return ""
    cols = [c for c in CSV_COLUMNS if c in rows[0]] + [c for c in rows[0] if c not in CSV_COLUMNS]

    def cell(v):
        if v is None:
            return "-"
        if isinstance(v, bool):
            return "yes" if v else "no"
        if isinstance(v, float):
            return f"{v:.10g}"
        return str(v)

    cells = [[cell(r.get(c)) for c in cols] for r in rows]
    widths = [max(len(c), *(len(r[i]) for r in cells)) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(cols, widths))]
    lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)) for r in cells]
    return "\n".join(lines) + "\n"


def _schedule(args, k: int | None = None) -> RoundSchedule:
    k = k if k is not None else args.k
    return parse_schedule(args.schedule, k)


# -- subcommands ------------------------------------------------------------

def cmd_state(args) -> int:
    init = _initial(args)
    rho = make_state(init) if isinstance(init, StateFamilySpec) else init
    bf = to_bloch(rho)
    ent, pt_min = is_entangled_ppt(rho)
    sv = steering_value(rho)
    payload = {
        "family": init.family if isinstance(init, StateFamilySpec) else "state",
        "params": init.params if isinstance(init, StateFamilySpec) else {},
        **state_to_json(rho),
        "bloch": {"a": bf.a.tolist(), "b": bf.b.tolist(), "T": bf.T.tolist()},
        "entangled": ent,
        "pt_min_eigenvalue": pt_min,
        "s_squared": sv.s_squared,
        "s": sv.s,
        "violating": sv.violating,
    }
    with np.printoptions(precision=6, suppress=True):
        text = (
            f"state: {payload['family']} {payload['params']}\n"
            f"matrix:\n{rho}\n"
            f"a = {bf.a}\nb = {bf.b}\nT =\n{bf.T}\n"
            f"entangled = {str(ent).lower()} (min PT eigenvalue {pt_min:.6g})\n"
            f"s = {sv.s:.10g}  s_squared = {sv.s_squared:.10g}  violating = {str(sv.violating).lower()}\n"
        )
    row = {k: payload[k] for k in ("family", "s_squared", "s", "violating")}
    row.update(entangled=ent, pt_min_eigenvalue=pt_min)
    _emit(args, [row], payload, text)
    return EXIT_OK


def cmd_run(args) -> int:
    report = run_sequence(_initial(args), _schedule(args), observed=args.observed)
    _emit(args, report.rows(), report.to_json())
    return EXIT_OK


def _reports_for_compare(args):
    if args.report:
        obj = json.loads(Path(args.report).read_text())
        schedule = RoundSchedule.from_json(obj["schedule"])
        if obj.get("family") is None:
            return [run_sequence(state_from_json(obj["initial_state"]), schedule)]
        return [run_sequence(StateFamilySpec(obj["family"], obj["params"]), schedule)]
    init = _initial(args)
    if args.schedule.startswith("explicit:"):
        return [run_sequence(init, read_schedule(args.schedule.split(":", 1)[1]))]
    ks = parse_k_range(args.k) if args.k else list(range(1, 13))
    return [run_sequence(init, _schedule(args, k)) for k in ks]


def cmd_compare(args) -> int:
    reports = _reports_for_compare(args)
    rows = []
    try:
        for rep in reports:
            cmp = compare_closed_form(rep)
            rows.append({"k": rep.schedule.k, "schedule": rep.schedule.label(),
                         "s_squared_deviation": cmp.s_squared, "T_deviation": cmp.T,
                         "deviation": cmp.max})
    except NoOracleError as exc:
        print(f"no oracle: {exc}", file=sys.stderr)
        return EXIT_NO_ORACLE
    worst = max(r["deviation"] for r in rows)
    ok = worst <= args.threshold
    payload = {"rows": rows, "max_deviation": worst, "threshold": args.threshold, "pass": ok}
    text = _table(rows) + f"max deviation {worst:.3e} (threshold {args.threshold:.1e}): {'ok' if ok else 'FAIL'}\n"
    _emit(args, rows, payload, text)
    return EXIT_OK if ok else EXIT_COMPARE


def cmd_horizon(args) -> int:
    mode, _, rule = args.schedule.partition(":")
    mode = mode.replace("-", "_")
    init = _initial(args)
    h = steering_horizon(init, mode, SharpnessRule.parse(rule), args.cap)
    payload = {"schedule": args.schedule, "cap": args.cap, "horizon": h}
    if isinstance(init, StateFamilySpec) and mode == "uniform":
        try:
            payload["asymptote"] = asymptote(init, rule)
        except ParameterError:
            pass
    _emit(args, [payload], payload, f"{h}\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.family:
        raise UsageError("--family is required")
    grid = _family_params(args)
    scheds = []
    for text in args.schedule or ["uniform:pow10"]:
        mode, _, rule = text.partition(":")
        scheds.append((mode.replace("-", "_"), SharpnessRule.parse(rule)))
    rows = sweep(args.family, grid, scheds, parse_k_range(args.k), jobs=args.jobs)
    dicts = [r.as_dict() for r in rows]
    _emit(args, dicts, dicts)
    return EXIT_OK


def cmd_find_f(args) -> int:
    res = find_uniform_sharpness(_initial_spec(args), args.k)
    payload = {"k": res.k, "feasible": res.feasible, "f_star": res.f_star,
               "margin": res.margin, "method": res.method}
    if res.feasible:
        text = f"f* = {res.f_star:.12g}  (s_squared - 1 = {res.margin:.6g}, {res.method})\n"
    else:
        text = f"infeasible at k={res.k}: no f in (0,1) keeps every round violating\n"
    _emit(args, [payload], payload, text)
    return EXIT_OK


def _initial_spec(args) -> StateFamilySpec:
    init = _initial(args)
    if not isinstance(init, StateFamilySpec):
        raise UsageError("this subcommand needs a --family")
    return init


def cmd_maximize(args) -> int:
    init = _initial(args)
    rho = make_state(init) if isinstance(init, StateFamilySpec) else init
    res = maximize_f3(rho, restarts=args.restarts, tol=args.tol,
                      rng=np.random.default_rng(args.seed), method=args.method)
    canonical = steering_value(rho).s
    payload = {"value": res.value, "canonical_s": canonical, "converged": res.converged,
               "frame": res.frame.to_json()}
    if args.frame:
        payload["given_frame_f3"] = cjwr_f3(rho, read_frame(args.frame))
    if args.frame_out:
        Path(args.frame_out).write_text(json.dumps(res.frame.to_json()))
    text = (f"max F3 = {res.value:.12g}  canonical sqrt(Tr T^t T) = {canonical:.12g}  "
            f"converged = {str(res.converged).lower()}\n")
    if "given_frame_f3" in payload:
        text += f"F3 on given frame = {payload['given_frame_f3']:.12g}\n"
    _emit(args, [{k: v for k, v in payload.items() if k != "frame"}], payload, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steershare",
                                     description="Sequential steering sharing on two qubits.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="build a state and report Bloch form, PPT and steering")
    _add_family_args(p)
    _add_output_args(p)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("run", help="simulate a sequence of bilateral rounds")
    _add_family_args(p)
    p.add_argument("--schedule", required=True,
                   help="uniform:RULE, per_round:RULE or explicit:FILE; RULE is pow10, pow100, "
                        "geometric:R or constant:C")
    p.add_argument("--k", type=int, help="number of rounds for generated schedules")
    p.add_argument("--observed", action="store_true",
                   help="also score each round with the measuring pair's unsharp F3")
    _add_output_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="check simulation against the closed forms")
    _add_family_args(p)
    p.add_argument("--schedule", default="uniform:pow10")
    p.add_argument("--k", help="depths to check, e.g. 1..12 (default)")
    p.add_argument("--report", help="re-check a JSON report written by `run --out json`")
    p.add_argument("--threshold", type=float, default=1e-10)
    _add_output_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("horizon", help="steering horizon under a generated schedule")
    _add_family_args(p)
    p.add_argument("--schedule", default="uniform:pow10")
    p.add_argument("--cap", type=int, required=True)
    _add_output_args(p)
    p.set_defaults(func=cmd_horizon)

    p = sub.add_parser("sweep", help="grid of families x schedules x depths")
    _add_family_args(p, multi=True)
    p.add_argument("--schedule", action="append", help="repeatable; default uniform:pow10")
    p.add_argument("--k", required=True, help="e.g. 1..5 or 1,3,5")
    p.add_argument("--jobs", type=int, default=1)
    _add_output_args(p, default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("find-f", help="largest uniform f keeping all k rounds steerable")
    _add_family_args(p)
    p.add_argument("--k", type=int, required=True)
    _add_output_args(p)
    p.set_defaults(func=cmd_find_f)

    p = sub.add_parser("maximize", help="numerically maximize F3 over measurement frames")
    _add_family_args(p)
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("iterative", "analytic"), default="iterative")
    p.add_argument("--frame", help="also evaluate F3 on this JSON frame")
    p.add_argument("--frame-out", help="write the best frame as JSON")
    _add_output_args(p)
    p.set_defaults(func=cmd_maximize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoOracleError as exc:
        print(f"no oracle: {exc}", file=sys.stderr)
        return EXIT_NO_ORACLE
    except (UsageError, ParameterError, InvalidStateError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except KeyError as exc:
        print(f"error: missing field {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
