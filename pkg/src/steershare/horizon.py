"""Sequential runs, agreement with the closed forms, steering horizons,
sharpness search and parameter sweeps."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import RoundSchedule, SharpnessRule, _apply_side, schedule_expand
from .closed_form import cf_theorem1, closed_form, evolve_diag
from .states import (
    PAULIS,
    ParameterError,
    StateFamilySpec,
    check_density,
    make_state,
    state_to_json,
)
from .steering import MeasurementFrame, observed_cjwr, steering_value_from_T

CSV_COLUMNS = ("family", "params", "schedule", "k", "s_squared", "s",
               "violating", "horizon", "deviation")


class NoOracleError(LookupError):
    """No closed form exists for this initial state or schedule."""


def fingerprint(rho) -> str:
    arr = np.round(np.asarray(rho, dtype=complex), 12) + 0.0  # +0.0 folds -0.0
    return hashlib.sha256(arr.tobytes()).hexdigest()[:16]


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _params_label(params: dict) -> str:
    return ";".join(f"{k}={v:.17g}" for k, v in sorted(params.items()))


def _correlations(rho) -> np.ndarray:
    return np.array([[np.trace(rho @ np.kron(a, b)).real for b in PAULIS] for a in PAULIS])


@dataclass(frozen=True)
class RoundRecord:
    k: int
    fingerprint: str
    T: np.ndarray
    s_squared: float
    s: float
    violating: bool
    observed: float | None = None


@dataclass
class RunReport:
    """Steering values of the state left after each of rounds 1..k.

    Record k holds the state shared once k pairs have measured, which is the
    state handed on to pair k + 1.
    """

    spec: StateFamilySpec | None
    initial_state: np.ndarray
    schedule: RoundSchedule
    initial_s_squared: float
    records: list[RoundRecord]
    final_state: np.ndarray
    deviation: float | None = None

    @property
    def horizon(self) -> int:
        n = 0
        for r in self.records:
            if not r.violating:
                break
            n += 1
        return n

    @property
    def s_squared(self) -> list[float]:
        return [r.s_squared for r in self.records]

    def rows(self) -> list[dict]:
        family = self.spec.family if self.spec else "state"
        params = _params_label(self.spec.params) if self.spec else ""
        out = []
        for r in self.records:
            row = {
                "family": family,
                "params": params,
                "schedule": self.schedule.label(),
                "k": r.k,
                "s_squared": r.s_squared,
                "s": r.s,
                "violating": r.violating,
                "horizon": self.horizon,
                "deviation": self.deviation,
            }
            if r.observed is not None:
                row["observed_f3"] = r.observed
            out.append(row)
        return out

    def to_json(self) -> dict:
        return {
            "family": self.spec.family if self.spec else None,
            "params": dict(self.spec.params) if self.spec else None,
            "initial_state": None if self.spec else state_to_json(self.initial_state),
            "schedule": self.schedule.to_json(),
            "initial_s_squared": self.initial_s_squared,
            "horizon": self.horizon,
            "deviation": self.deviation,
            "rows": [
                {**row, "T": r.T.tolist(), "fingerprint": r.fingerprint}
                for row, r in zip(self.rows(), self.records)
            ],
            "final_state": state_to_json(self.final_state),
        }


def _resolve(initial) -> tuple[StateFamilySpec | None, np.ndarray]:
    if isinstance(initial, StateFamilySpec):
        return initial, make_state(initial)
    return None, check_density(initial)


def _observed_score(rho, T, alice, bob) -> float:
    signs = [1.0 if T[i, i] >= 0 else -1.0 for i in range(3)]
    return observed_cjwr(rho, MeasurementFrame.axis_aligned(signs), alice.values, bob.values)


def run_sequence(initial, schedule: RoundSchedule, observed: bool = False,
                 with_deviation: bool = True) -> RunReport:
    """Apply the round channels in order, recording every delivered state.

    With ``observed=True`` each record also carries the F3 value that the
    measuring pair of that round sees through its own unsharp observables on
    the state it received (axis frame, signs matched to T).
    """
    if not isinstance(schedule, RoundSchedule):
        raise ParameterError("schedule must be a RoundSchedule")
    spec, rho = _resolve(initial)
    initial_rho = rho
    records = []
    for k, (alice, bob) in enumerate(schedule.rounds, 1):
        obs = None
        if observed:
            obs = _observed_score(rho, _correlations(rho), alice, bob)
        rho = _apply_side(_apply_side(rho, "bob", bob), "alice", alice)
        T = _correlations(rho)
        sv = steering_value_from_T(T)
        records.append(RoundRecord(k, fingerprint(rho), T, sv.s_squared, sv.s, sv.violating, obs))
    initial_s2 = steering_value_from_T(_correlations(initial_rho)).s_squared
    report = RunReport(spec, initial_rho, schedule, initial_s2, records, rho)
    if with_deviation:
        try:
            report.deviation = compare_closed_form(report).max
        except NoOracleError:
            report.deviation = None
    return report


@dataclass(frozen=True)
class Comparison:
    s_squared: float
    T: float

    @property
    def max(self) -> float:
        return max(self.s_squared, self.T)


def closed_form_sequence(spec: StateFamilySpec, schedule: RoundSchedule, s_list=None):
    """Closed-form results for the states after rounds 1..k."""
    if s_list is not None:
        fs = [1 - s for s in s_list]
    else:
        fs = schedule.f_values()
        if fs is None:
            sym = schedule.symmetric_unsharpness()
            if sym is not None:
                fs = [1 - s for s in sym]
    if fs is not None:
        return [closed_form(spec, fs[:j]) for j in range(1, len(fs) + 1)]
    if spec.family == "bell" and schedule.k == 1:
        alice, bob = schedule.rounds[0]
        if alice.is_standard_form() and bob.is_standard_form():
            return [cf_theorem1(alice.unsharpness[0], bob.unsharpness[0])]
    raise NoOracleError("no closed form for an asymmetric or non-standard schedule")


def compare_closed_form(report: RunReport, s_list=None) -> Comparison:
    """Max abs deviation of simulated s_squared and T from the closed form.

    ``s_list`` overrides the per-round unsharpness fed to the formula.
    """
    if report.spec is None:
        raise NoOracleError("no oracle: initial state is not a named family")
    expected = closed_form_sequence(report.spec, report.schedule, s_list)
    if len(expected) != len(report.records):
        raise ParameterError("closed-form sequence length does not match the run")
    ds = max(abs(r.s_squared - e.s_squared) for r, e in zip(report.records, expected))
    dt = max(float(np.max(np.abs(r.T - e.T))) for r, e in zip(report.records, expected))
    return Comparison(ds, dt)


# -- horizons ---------------------------------------------------------------

def _depth_feasible(initial, mode: str, rule: SharpnessRule, depth: int) -> bool:
    if isinstance(initial, StateFamilySpec):
        f = rule(depth)
        return all(closed_form(initial, [f] * j).violating for j in range(1, depth + 1))
    report = run_sequence(initial, schedule_expand(mode, rule, depth), with_deviation=False)
    return report.horizon == depth


def steering_horizon(initial, mode: str, rule, cap: int) -> int:
    """Steering horizon under a generated schedule.

    ``uniform``: the largest depth k <= cap such that, with every round at
    s = 1 - f(k), all k delivered states violate. ``per_round``: the number
    of leading violating rounds of a single run of length cap. Family specs
    are scored with the closed form, raw states by dense simulation.
    """
    if cap < 1:
        raise ParameterError("cap must be >= 1")
    if isinstance(rule, str):
        rule = SharpnessRule.parse(rule)
    if mode == "uniform":
        feasible = [d for d in range(1, cap + 1) if _depth_feasible(initial, mode, rule, d)]
        return max(feasible, default=0)
    if mode == "per_round":
        if isinstance(initial, StateFamilySpec):
            fs = [rule(i) for i in range(1, cap + 1)]
            n = 0
            for j in range(1, cap + 1):
                if not closed_form(initial, fs[:j]).violating:
                    break
                n += 1
            return n
        return run_sequence(initial, schedule_expand(mode, rule, cap), with_deviation=False).horizon
    raise ParameterError(f"schedule mode must be 'uniform' or 'per_round', got {mode!r}")


def explicit_horizon(initial, schedule: RoundSchedule) -> int:
    return run_sequence(initial, schedule, with_deviation=False).horizon


@dataclass(frozen=True)
class SharpnessSearch:
    """Result of `find_uniform_sharpness`.

    ``f_star`` is the largest f (sharpest measurement) for which all k
    delivered states still violate; every smaller f also works.
    """

    feasible: bool
    f_star: float | None
    margin: float | None
    k: int
    method: str


def _uniform_margin(spec: StateFamilySpec, f: float, k: int) -> float:
    return evolve_diag(spec.t_diag, [f] * k).margin


def find_uniform_sharpness(spec: StateFamilySpec, k: int, resolution: float = 1e-9) -> SharpnessSearch:
    if k < 1:
        raise ParameterError("k must be >= 1")
    if _uniform_margin(spec, 0.0, k) <= 0:
        return SharpnessSearch(False, None, None, k, "limit")
    hi_edge = math.nextafter(1.0, 0.0)
    if _uniform_margin(spec, hi_edge, k) > 0:
        return SharpnessSearch(True, hi_edge, _uniform_margin(spec, hi_edge, k), k, "edge")

    grid = np.geomspace(1e-300, hi_edge, 400)
    margins = np.array([_uniform_margin(spec, f, k) for f in grid])
    if np.all(np.diff(margins) <= 0):
        lo, hi = 1e-300, hi_edge
        if margins[0] <= 0:
            # feasible only below the grid floor
            return SharpnessSearch(True, 0.0, _uniform_margin(spec, 0.0, k), k, "limit")
        while hi - lo > resolution * min(1.0, hi):
            mid = math.sqrt(lo * hi) if hi > 2 * lo else 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            if _uniform_margin(spec, mid, k) > 0:
                lo = mid
            else:
                hi = mid
        return SharpnessSearch(True, lo, _uniform_margin(spec, lo, k), k, "bisection")

    ok = grid[margins > 0]
    f = float(ok.max())
    return SharpnessSearch(True, f, _uniform_margin(spec, f, k), k, "grid")


# -- sweeps -----------------------------------------------------------------

@dataclass
class SweepRow:
    family: str
    params: dict
    schedule: str
    k: int
    s_squared: float | None = None
    s: float | None = None
    violating: bool | None = None
    horizon: int | None = None
    deviation: float | None = None
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "params": _params_label(self.params),
            "schedule": self.schedule,
            "k": self.k,
            "s_squared": self.s_squared,
            "s": self.s,
            "violating": self.violating,
            "horizon": self.horizon,
            "deviation": self.deviation,
            "error": self.error,
        }


def _sweep_cell(family: str, params: dict, schedule: tuple[str, SharpnessRule], k: int) -> SweepRow:
    mode, rule = schedule
    row = SweepRow(family, params, f"{mode}:{rule}", k)
    try:
        spec = StateFamilySpec(family, params)
        report = run_sequence(spec, schedule_expand(mode, rule, k))
    except (ParameterError, ValueError) as exc:
        row.error = str(exc)
        return row
    last = report.records[-1]
    row.s_squared, row.s, row.violating = last.s_squared, last.s, last.violating
    row.horizon, row.deviation = report.horizon, report.deviation
    return row


def sweep(family: str, param_grid: dict[str, Sequence[float]],
          schedules: Sequence[tuple[str, SharpnessRule | str]], ks: Sequence[int],
          jobs: int = 1) -> list[SweepRow]:
    """Evaluate every grid cell; rows come out in lexicographic grid order
    (parameters in sorted-name order, then schedule, then k) regardless of
    ``jobs``. Bad cells produce rows with ``error`` set."""
    names = sorted(param_grid)
    values = [list(param_grid[n]) for n in names]
    scheds = [(m, SharpnessRule.parse(r) if isinstance(r, str) else r) for m, r in schedules]
    ks = list(ks)
    if any(not v for v in values) or not scheds or not ks:
        raise ParameterError("sweep grid is empty")
    cells = [
        (family, dict(zip(names, combo)), sched, k)
        for combo in itertools.product(*values)
        for sched in scheds
        for k in ks
    ]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda c: _sweep_cell(*c), cells))
    return [_sweep_cell(*c) for c in cells]


def rows_to_csv(rows: Sequence[dict], columns: Sequence[str] | None = None) -> str:
    columns = list(columns or CSV_COLUMNS)
    extra = [c for r in rows for c in r if c not in columns]
    for c in extra:
        if c not in columns:
            columns.append(c)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def rows_to_json(rows: Sequence[dict]) -> str:
    return json.dumps(list(rows), indent=2, sort_keys=False)
