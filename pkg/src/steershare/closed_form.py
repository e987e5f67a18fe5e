"""Exact correlation matrices and steering values after k symmetric rounds.

Every supported family starts with a diagonal correlation matrix
diag(t1, t2, t3). One round in which both observers use the triple
(lam, lam, 1), with s = sqrt(1 - lam^2) = 1 - f, multiplies t1 and t2 by
((1 + s)/3)^2 and t3 by ((1 + 2s)/3)^2. Factors are accumulated as logs
of f so that k in the hundreds does not overflow or underflow, and so that
f far below machine epsilon still registers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import SharpnessRule
from .states import ParameterError, StateFamilySpec, family_spec

_SQRT2_2 = math.sqrt(2) / 2
# decimal literals such as 0.7853981634 overshoot pi/4 slightly
_PI_4_SLACK = math.pi / 4 + 1e-9


@dataclass(frozen=True)
class ClosedFormResult:
    T: np.ndarray
    s_squared: float
    k: int
    params: dict = field(default_factory=dict)
    margin: float = float("nan")  # s_squared - 1 without cancellation
    notes: tuple = ()

    @property
    def T_diag(self) -> list[float]:
        return [float(x) for x in np.diag(self.T)]

    @property
    def violating(self) -> bool:
        return self.margin > 0

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "T_diag": self.T_diag,
            "s_squared": self.s_squared,
            "family": self.params.get("family"),
            "params": {k: v for k, v in self.params.items() if k != "family"},
            "notes": list(self.notes),
        }


def _check_unsharpness(values: Sequence[float]) -> list[float]:
    out = [float(v) for v in values]
    for v in out:
        if not 0 <= v <= 1:
            raise ParameterError(f"unsharpness values must lie in [0,1], got {v!r}")
    return out


def _log_factors(f_list: Sequence[float]) -> tuple[float, float]:
    """Log of the accumulated scaling of (t1, t2) and of t3."""
    log12 = sum(2 * math.log((2 - f) / 3) for f in f_list)
    log3 = sum(2 * math.log1p(-2 * f / 3) for f in f_list)
    return log12, log3


def evolve_diag(t_diag, f_list: Sequence[float], params: dict | None = None,
                notes: tuple = ()) -> ClosedFormResult:
    """Diagonal correlation matrix after len(f_list) symmetric rounds."""
    t = np.asarray(t_diag, dtype=float)
    log12, log3 = _log_factors(f_list)
    logs = np.array([log12, log12, log3])
    T = np.diag(t * np.exp(logs))
    s2 = float(np.sum(np.diag(T) ** 2))
    # the (t1, t2) block may decay to nothing; keep it out of any "x - 1"
    t2 = t**2
    margin = math.fsum([t2[2] - 1, t2[2] * math.expm1(2 * log3),
                        t2[0] * math.exp(2 * log12), t2[1] * math.exp(2 * log12)])
    return ClosedFormResult(T, s2, len(f_list), dict(params or {}), margin, notes)


def _rounds(s_list, schedule) -> list[float]:
    """Per-round f values from either an unsharpness list or (rule, k)."""
    if (s_list is None) == (schedule is None):
        raise ParameterError("give exactly one of s_list or schedule=(rule, k)")
    if s_list is not None:
        return [1 - s for s in _check_unsharpness(s_list)]
    rule, k = schedule
    if isinstance(rule, str):
        rule = SharpnessRule.parse(rule)
    if k < 0:
        raise ParameterError("k must be >= 0")
    f = rule(k) if k else 0.0
    # vanishing rules underflow to exactly 0 for large k; that is the limit
    if k and not 0 <= f < 1:
        raise ParameterError(f"f(k) must lie in [0,1), got {f!r}")
    return [f] * k


def cf_theorem1(s1: float, t1: float) -> ClosedFormResult:
    """Maximally entangled start, one round with Alice at s1 and Bob at t1."""
    s1, t1 = _check_unsharpness([s1, t1])
    x = (s1 + 1) * (t1 + 1) / 9
    z = (2 * s1 + 1) * (2 * t1 + 1) / 9
    s2 = (2 * (s1 + 1) ** 2 * (t1 + 1) ** 2 + (2 * s1 + 1) ** 2 * (2 * t1 + 1) ** 2) / 81
    return ClosedFormResult(np.diag([x, -x, z]), s2, 1,
                            {"family": "bell", "s1": s1, "t1": t1}, s2 - 1)


def _check_alpha_half(alpha: float):
    if not 0 < alpha <= 0.5:
        raise ParameterError("alpha must lie in (0,1/2]")


def cf_pure(alpha: float, s_list=None, schedule=None) -> ClosedFormResult:
    """Schmidt state sqrt(a)|00> + sqrt(1-a)|11> after symmetric rounds."""
    _check_alpha_half(alpha)
    f_list = _rounds(s_list, schedule)
    spec = family_spec("schmidt", alpha=alpha)
    return evolve_diag(spec.t_diag, f_list, {"family": "schmidt", "alpha": alpha})


def cf_pure_schedule(alpha: float, rule, k: int) -> float:
    """s_squared at depth k when every round uses s = 1 - f(k)."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    return cf_pure(alpha, schedule=(rule, k)).s_squared


def cf_gamma(m1: float, alpha: float, s_list=None, schedule=None) -> ClosedFormResult:
    """Schmidt state mixed with |00> and |11>; only the weight m1 matters."""
    if not 0 < m1 <= 1:
        raise ParameterError("m1 must lie in (0,1]")
    _check_alpha_half(alpha)
    f_list = _rounds(s_list, schedule)
    c = 2 * math.sqrt(alpha * (1 - alpha)) * m1
    return evolve_diag([c, -c, 1.0], f_list, {"family": "gamma", "m1": m1, "alpha": alpha})


def cf_tilde(alpha: float, theta: float, s_list=None, schedule=None) -> ClosedFormResult:
    if not _SQRT2_2 < alpha <= 1:
        raise ParameterError("alpha must lie in (sqrt(2)/2,1]")
    if not 0 < theta <= _PI_4_SLACK:
        raise ParameterError("theta must lie in (0,pi/4]")
    spec = family_spec("tilde_gamma", alpha=alpha, theta=theta)
    return evolve_diag(spec.t_diag, _rounds(s_list, schedule),
                       {"family": "tilde_gamma", "alpha": alpha, "theta": theta})


WERNER_NOTE = ("uniform substitution s_i = 1 - f(k) applied to both products; "
               "the sin^2(2 theta) term scales as (2 - f(k))^(4k)")


def cf_werner(m: float, theta: float, s_list=None, schedule=None) -> ClosedFormResult:
    spec = family_spec("werner", m=m, theta=theta)
    notes = (WERNER_NOTE,) if schedule is not None else ()
    return evolve_diag(spec.t_diag, _rounds(s_list, schedule),
                       {"family": "werner", "m": m, "theta": theta}, notes)


def closed_form(spec: StateFamilySpec, f_list: Sequence[float]) -> ClosedFormResult:
    """Closed form for any supported family given exact per-round f values."""
    notes = (WERNER_NOTE,) if spec.family == "werner" and f_list else ()
    return evolve_diag(spec.t_diag, f_list, {"family": spec.family, **spec.params}, notes)


def asymptote(spec: StateFamilySpec, rule) -> float:
    """Limit of s_squared as the depth k grows under a uniform schedule.

    Requires k * f(k) -> 0, which holds for the vanishing rules. The (t1, t2)
    block decays like (4/9)^(2k) and only t3^2 survives.
    """
    if isinstance(rule, str):
        rule = SharpnessRule.parse(rule)
    if not rule.vanishes:
        raise ParameterError(f"rule {rule} does not vanish as k grows; no limit")
    return float(spec.t_diag[2] ** 2)
