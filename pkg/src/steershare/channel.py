"""Unsharp two-outcome Pauli measurements and the averaged Lueders channels
they induce on the shared two-qubit state.

Each observer picks one of three axes uniformly at random and measures the
effects (I +/- lam * sigma_i)/2. Averaging over axis and outcome gives a
fixed channel on that observer's qubit; these channels are what the
sequential pairs pass down the line.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .states import I2, PAULIS, ParameterError, check_density

ALICE = "alice"
BOB = "bob"


def _check_sharpness(lam: float, name: str = "sharpness") -> float:
    lam = float(lam)
    if not 0 < lam <= 1:
        raise ParameterError(f"{name} must lie in (0,1], got {lam!r}")
    return lam


def _check_axis(axis: int) -> int:
    if axis not in (1, 2, 3):
        raise ParameterError(f"axis must be 1, 2 or 3, got {axis!r}")
    return axis


@dataclass(frozen=True)
class SharpnessTriple:
    """Sharpness of the three measurement settings of one observer."""

    l1: float
    l2: float
    l3: float = 1.0

    def __post_init__(self):
        for i, lam in enumerate(self.values, 1):
            _check_sharpness(lam, f"sharpness lambda{i}")

    @property
    def values(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)

    @property
    def unsharpness(self) -> tuple[float, float, float]:
        """sqrt(1 - lam^2) for each setting."""
        return tuple(math.sqrt((1 - lam) * (1 + lam)) for lam in self.values)

    @classmethod
    def standard(cls, lam: float) -> "SharpnessTriple":
        """Unsharp on axes 1 and 2, projective on axis 3."""
        return cls(lam, lam, 1.0)

    @classmethod
    def from_f(cls, f: float) -> "SharpnessTriple":
        """Standard triple (lam, lam, 1) with unsharpness s = 1 - f.

        lam = sqrt(f (2 - f)) avoids the cancellation in sqrt(1 - s^2) when f
        is tiny, so the triple stays in range for f far below machine epsilon.
        """
        if not 0 < f < 1:
            raise ParameterError(f"f must lie in (0,1), got {f!r}")
        return cls.standard(math.sqrt(f * (2 - f)))

    @classmethod
    def from_unsharpness(cls, s: float) -> "SharpnessTriple":
        if not 0 <= s < 1:
            raise ParameterError(f"unsharpness must lie in [0,1), got {s!r}")
        return cls.standard(math.sqrt((1 - s) * (1 + s)))

    def is_standard_form(self) -> bool:
        return self.l1 == self.l2 and self.l3 == 1.0


def effect_operator(axis: int, lam: float) -> np.ndarray:
    """(I + lam * sigma_axis) / 2."""
    _check_axis(axis)
    lam = _check_sharpness(lam)
    return (I2 + lam * PAULIS[axis - 1]) / 2


def sqrt_effect(axis: int, lam: float, sign: int = +1) -> np.ndarray:
    """Closed-form square root of (I + sign * lam * sigma_axis) / 2."""
    _check_axis(axis)
    lam = _check_sharpness(lam)
    if sign not in (+1, -1):
        raise ParameterError(f"sign must be +1 or -1, got {sign!r}")
    p, q = math.sqrt(1 + lam), math.sqrt(1 - lam)
    c = (p + q) / (2 * math.sqrt(2))
    d = (p - q) / (2 * math.sqrt(2))
    return c * I2 + sign * d * PAULIS[axis - 1]


def _kraus(side: str, triple: SharpnessTriple):
    for axis, lam in enumerate(triple.values, 1):
        for sign in (+1, -1):
            k = sqrt_effect(axis, lam, sign)
            yield np.kron(k, I2) if side == ALICE else np.kron(I2, k)


def _apply_side(rho: np.ndarray, side: str, triple: SharpnessTriple) -> np.ndarray:
    out = np.zeros((4, 4), dtype=complex)
    for k in _kraus(side, triple):
        out += k @ rho @ k.conj().T
    return out / 3


def luders_side_channel(rho, side: str, triple: SharpnessTriple) -> np.ndarray:
    """Average Lueders update after one observer's random-setting measurement."""
    if side not in (ALICE, BOB):
        raise ParameterError(f"side must be 'alice' or 'bob', got {side!r}")
    return _apply_side(check_density(rho), side, triple)


def bloch_scaling(triple: SharpnessTriple) -> np.ndarray:
    """Diagonal G with the side channel acting as b -> G b, T -> T G (Bob)
    or a -> G a, T -> G T (Alice)."""
    s = triple.unsharpness
    g = [(1 + sum(s[i] for i in range(3) if i != j)) / 3 for j in range(3)]
    return np.diag(g)


def round_channel(rho, alice: SharpnessTriple, bob: SharpnessTriple) -> np.ndarray:
    rho = check_density(rho)
    return _apply_side(_apply_side(rho, BOB, bob), ALICE, alice)


# -- schedules --------------------------------------------------------------

@dataclass(frozen=True)
class SharpnessRule:
    """Rule k -> f(k) fixing the unsharpness s = 1 - f(k)."""

    name: str
    param: float | None = None

    def __post_init__(self):
        if self.name not in ("pow10", "pow100", "geometric", "constant"):
            raise ParameterError(f"unknown f(k) rule {self.name!r}")
        if self.name in ("geometric", "constant"):
            if self.param is None or not 0 < self.param < 1:
                raise ParameterError(f"{self.name} needs a parameter in (0,1)")
        elif self.param is not None:
            raise ParameterError(f"{self.name} takes no parameter")

    def __call__(self, k: int) -> float:
        if self.name == "pow10":
            return 10.0 ** (-k)
        if self.name == "pow100":
            return 100.0 ** (-k)
        if self.name == "geometric":
            return self.param ** k
        return self.param

    @property
    def vanishes(self) -> bool:
        return self.name != "constant"

    @classmethod
    def parse(cls, text: str) -> "SharpnessRule":
        name, _, value = text.partition(":")
        return cls(name, float(value) if value else None)

    def __str__(self):
        return self.name if self.param is None else f"{self.name}:{self.param:.17g}"


@dataclass(frozen=True)
class RoundSchedule:
    """Per-round (Alice, Bob) sharpness triples.

    ``mode`` is ``"uniform"`` (every round uses f at the target depth),
    ``"per_round"`` (round i uses f(i)) or ``"explicit"``.
    """

    rounds: tuple
    mode: str = "explicit"
    rule: SharpnessRule | None = None

    def __post_init__(self):
        rounds = tuple((a, b) for a, b in self.rounds)
        if not rounds:
            raise ParameterError("schedule must contain at least one round")
        for a, b in rounds:
            if not isinstance(a, SharpnessTriple) or not isinstance(b, SharpnessTriple):
                raise ParameterError("schedule rounds must be SharpnessTriple pairs")
        object.__setattr__(self, "rounds", rounds)

    def __len__(self):
        return len(self.rounds)

    @property
    def k(self) -> int:
        return len(self.rounds)

    def f_values(self) -> list[float] | None:
        """Exact f per round for generated schedules (None for explicit)."""
        if self.rule is None:
            return None
        if self.mode == "uniform":
            return [self.rule(self.k)] * self.k
        return [self.rule(i) for i in range(1, self.k + 1)]

    def symmetric_unsharpness(self) -> list[float] | None:
        """Per-round s when both sides use the same standard triple, else None."""
        out = []
        for a, b in self.rounds:
            if a != b or not a.is_standard_form():
                return None
            out.append(a.unsharpness[0])
        return out

    def label(self) -> str:
        if self.rule is None:
            return "explicit"
        return f"{self.mode}:{self.rule}"

    def to_json(self) -> dict:
        if self.rule is not None:
            params = {"rule": self.rule.name}
            if self.rule.param is not None:
                params["value"] = self.rule.param
            return {"family": f"{self.mode}_f", "k": self.k, "params": params}
        return {"explicit": [list(a.values) + list(b.values) for a, b in self.rounds]}

    @classmethod
    def explicit(cls, rows: Sequence[Sequence[float]]) -> "RoundSchedule":
        rounds = []
        for row in rows:
            if len(row) != 6:
                raise ParameterError("explicit rounds need 6 sharpness values")
            rounds.append((SharpnessTriple(*row[:3]), SharpnessTriple(*row[3:])))
        return cls(tuple(rounds))

    @classmethod
    def from_json(cls, obj: dict) -> "RoundSchedule":
        if "explicit" in obj:
            return cls.explicit(obj["explicit"])
        try:
            family, k, params = obj["family"], int(obj["k"]), dict(obj.get("params", {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParameterError(f"malformed schedule: {exc}") from None
        mode = family.removesuffix("_f")
        rule = SharpnessRule(params.get("rule", "pow10"), params.get("value"))
        return schedule_expand(mode, rule, k)


def schedule_expand(mode: str, rule: SharpnessRule, k: int) -> RoundSchedule:
    """Expand a rule into k rounds of symmetric (lam, lam, 1) triples.

    ``uniform``: every round has s = 1 - f(k).
    ``per_round``: round i has s = 1 - f(i).
    """
    if mode not in ("uniform", "per_round"):
        raise ParameterError(f"schedule mode must be 'uniform' or 'per_round', got {mode!r}")
    if k < 1:
        raise ParameterError("k must be >= 1")
    if isinstance(rule, str):
        rule = SharpnessRule.parse(rule)
    fs = [rule(k)] * k if mode == "uniform" else [rule(i) for i in range(1, k + 1)]
    rounds = []
    for f in fs:
        t = SharpnessTriple.from_f(f)
        rounds.append((t, t))
    return RoundSchedule(tuple(rounds), mode, rule)


def parse_schedule(text: str, k: int | None = None) -> RoundSchedule:
    """Parse ``uniform:pow10``, ``per_round:geometric:0.5`` or ``explicit:path.json``."""
    mode, _, rest = text.partition(":")
    if mode == "explicit":
        return read_schedule(rest)
    if k is None:
        raise ParameterError("k is required for generated schedules")
    return schedule_expand(mode.replace("-", "_"), SharpnessRule.parse(rest), k)


def read_schedule(path) -> RoundSchedule:
    return RoundSchedule.from_json(json.loads(Path(path).read_text()))


def write_schedule(path, schedule: RoundSchedule):
    Path(path).write_text(json.dumps(schedule.to_json()))
