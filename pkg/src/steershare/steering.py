"""CJWR linear steering functional, its canonical maximum and a numerical
maximizer over measurement frames."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.transform import Rotation

from .states import PAULIS, ParameterError, check_density

FRAME_TOL = 1e-12


@dataclass(frozen=True)
class MeasurementFrame:
    """n Alice directions (unit) and n Bob directions (orthonormal), n in {2, 3}."""

    a_dirs: np.ndarray
    b_dirs: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a_dirs, dtype=float)
        b = np.asarray(self.b_dirs, dtype=float)
        if a.ndim != 2 or a.shape[1] != 3 or a.shape != b.shape:
            raise ParameterError("frame needs matching n x 3 direction arrays")
        if a.shape[0] not in (2, 3):
            raise ParameterError(f"frame size must be 2 or 3, got {a.shape[0]}")
        if np.max(np.abs(np.linalg.norm(a, axis=1) - 1)) > FRAME_TOL:
            raise ParameterError("Alice directions must be unit vectors")
        if np.max(np.abs(b @ b.T - np.eye(len(b)))) > FRAME_TOL:
            raise ParameterError("Bob directions must be orthonormal")
        object.__setattr__(self, "a_dirs", a)
        object.__setattr__(self, "b_dirs", b)

    @property
    def n(self) -> int:
        return len(self.a_dirs)

    @classmethod
    def axis_aligned(cls, signs=(1, 1, 1)) -> "MeasurementFrame":
        """b_l = e_l, a_l = sign_l * e_l."""
        eye = np.eye(3)
        return cls(np.array([s * e for s, e in zip(signs, eye)]), eye)

    def to_json(self) -> dict:
        return {"a_dirs": self.a_dirs.tolist(), "b_dirs": self.b_dirs.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "MeasurementFrame":
        try:
            return cls(obj["a_dirs"], obj["b_dirs"])
        except KeyError as exc:
            raise ParameterError(f"frame file missing {exc}") from None


def read_frame(path) -> MeasurementFrame:
    return MeasurementFrame.from_json(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class SteeringValue:
    s_squared: float
    s: float
    violating: bool


def correlation_matrix(rho) -> np.ndarray:
    rho = check_density(rho)
    return np.array(
        [[np.trace(rho @ np.kron(si, sj)).real for sj in PAULIS] for si in PAULIS]
    )


def steering_value(rho) -> SteeringValue:
    """Canonical three-setting steering value sqrt(Tr(T^t T)).

    Violation is strict: s_squared == 1 does not violate.
    """
    return steering_value_from_T(correlation_matrix(rho))


def steering_value_from_T(T) -> SteeringValue:
    s2 = float(np.sum(np.asarray(T) ** 2))
    return SteeringValue(s2, math.sqrt(s2), s2 > 1)


def _pauli_dot(v) -> np.ndarray:
    return sum(c * s for c, s in zip(v, PAULIS))


def _correlators(rho, frame: MeasurementFrame) -> np.ndarray:
    return np.array(
        [
            np.trace(np.kron(_pauli_dot(a), _pauli_dot(b)) @ rho).real
            for a, b in zip(frame.a_dirs, frame.b_dirs)
        ]
    )


def cjwr_fn(rho, frame: MeasurementFrame) -> float:
    """F_n = |sum_l <A_l (x) B_l>| / sqrt(n) for an explicit frame."""
    rho = check_density(rho)
    return abs(_correlators(rho, frame).sum()) / math.sqrt(frame.n)


def cjwr_f3(rho, frame: MeasurementFrame) -> float:
    if frame.n != 3:
        raise ParameterError("F3 needs a three-setting frame")
    return cjwr_fn(rho, frame)


def observed_cjwr(rho, frame: MeasurementFrame, alice_lams, bob_lams) -> float:
    """F3 as seen through unsharp observables lam * sigma on each side."""
    if frame.n != 3:
        raise ParameterError("F3 needs a three-setting frame")
    la = np.array([float(x) for x in alice_lams])
    lb = np.array([float(x) for x in bob_lams])
    if la.shape != (3,) or lb.shape != (3,):
        raise ParameterError("need three sharpness values per side")
    if np.any(la <= 0) or np.any(la > 1) or np.any(lb <= 0) or np.any(lb > 1):
        raise ParameterError("sharpness values must lie in (0,1]")
    rho = check_density(rho)
    return abs(np.sum(la * lb * _correlators(rho, frame))) / math.sqrt(3)


# -- maximization -----------------------------------------------------------

@dataclass(frozen=True)
class MaximizeResult:
    value: float
    frame: MeasurementFrame
    converged: bool
    iterations: int


def _a_from_b(T: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Best Alice directions for Bob's frame (columns of B): a_l ~ T b_l."""
    A = T @ B
    norms = np.linalg.norm(A, axis=0)
    for l in range(3):
        if norms[l] < 1e-300:
            A[:, l] = B[:, l]
            norms[l] = 1.0
    return A / norms


def _givens(n: int, i: int, j: int, phi: float) -> np.ndarray:
    g = np.eye(n)
    c, s = math.cos(phi), math.sin(phi)
    g[i, i] = g[j, j] = c
    g[i, j], g[j, i] = -s, s
    return g


def optimal_frame(T) -> MeasurementFrame:
    """Frame attaining sqrt(Tr(T^t T)).

    F3 <= sum_l |T b_l| / sqrt(3) <= sqrt(Tr T^t T) with equality when all
    |T b_l|^2 are equal, so Bob's frame is rotated until the diagonal of
    T^t T in that frame is flat. Axis-aligned frames qualify only when the
    singular values of T coincide.
    """
    T = np.asarray(T, dtype=float)
    _, sv, vt = np.linalg.svd(T)
    d = sv**2
    mu = d.mean()
    D = np.diag(d)
    # rotate (0, 2) so that entry (0, 0) becomes mu; d is sorted descending
    spread = d[0] - d[2]
    phi = 0.0 if spread <= 0 else math.acos(math.sqrt(min(1.0, max(0.0, (mu - d[2]) / spread))))
    g1 = _givens(3, 0, 2, phi)
    M = g1.T @ D @ g1
    # rotate (1, 2) so that both remaining diagonal entries become mu
    p, r, q = M[1, 1], M[2, 2], M[1, 2]
    two_phi = 0.0 if abs(p - r) + abs(q) == 0 else math.atan2((p - r) / 2, -q)
    R = g1 @ _givens(3, 1, 2, two_phi / 2)
    B = vt.T @ R
    return MeasurementFrame(_a_from_b(T, B).T, B.T)


def _frame_objective(w: np.ndarray, T: np.ndarray, B0: np.ndarray) -> float:
    B = Rotation.from_rotvec(w).as_matrix() @ B0
    return -np.linalg.norm(T @ B, axis=0).sum()


def maximize_f3(
    rho,
    restarts: int = 32,
    tol: float = 1e-8,
    rng: np.random.Generator | None = None,
    method: str = "iterative",
) -> MaximizeResult:
    """Maximize F3 over Alice unit vectors and Bob orthonormal frames.

    ``method="iterative"`` eliminates Alice exactly (a_l ~ T b_l) and runs
    BFGS over a rotation-vector chart around each of ``restarts`` random
    Bob frames drawn from ``rng``; the best local optimum wins.
    ``method="analytic"`` returns `optimal_frame` directly.
    """
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")
    T = correlation_matrix(rho)
    if method == "analytic":
        frame = optimal_frame(T)
        return MaximizeResult(cjwr_f3(rho, frame), frame, True, 0)
    if method != "iterative":
        raise ParameterError(f"unknown method {method!r}")
    rng = np.random.default_rng(0) if rng is None else rng

    best = None
    converged = True
    iterations = 0
    for _ in range(restarts):
        B0 = Rotation.random(random_state=rng).as_matrix()
        res = minimize(_frame_objective, np.zeros(3), args=(T, B0), method="BFGS",
                       options={"gtol": tol * 1e-2})
        iterations += res.nit
        converged &= bool(res.success) or res.status == 2
        if best is None or res.fun < best[0]:
            best = (res.fun, Rotation.from_rotvec(res.x).as_matrix() @ B0)

    B = best[1]
    frame = MeasurementFrame(_a_from_b(T, B).T, B.T)
    return MaximizeResult(cjwr_f3(rho, frame), frame, converged, iterations)
