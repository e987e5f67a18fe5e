"""Two-qubit density matrices: dense and Bloch representations, the state
families used throughout the package, and a partial-transpose entanglement
check.

Basis order is |00>, |01>, |10>, |11> (Alice is the left factor) and the
Pauli matrices are sigma_1 = X, sigma_2 = Y, sigma_3 = Z.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = -1e-10


class InvalidStateError(ValueError):
    """Raised when a matrix is not a valid two-qubit density matrix."""


class ParameterError(ValueError):
    """Raised when a family or measurement parameter is out of range."""


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def projector(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def maximally_mixed() -> np.ndarray:
    return np.eye(4, dtype=complex) / 4


def bell_state() -> np.ndarray:
    """Projector onto (|00> + |11>)/sqrt(2)."""
    return projector(ket(1, 0, 0, 1) / math.sqrt(2))


@dataclass(frozen=True)
class Diagnostics:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float

    @property
    def passes(self) -> bool:
        return (
            self.hermiticity_defect <= HERMITIAN_TOL
            and self.trace_defect <= TRACE_TOL
            and self.min_eigenvalue >= PSD_TOL
        )


def _as_matrix(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise InvalidStateError(f"expected a 4x4 matrix, got shape {rho.shape}")
    return rho


def validate_density(rho) -> Diagnostics:
    """Report how far `rho` is from being a density matrix.

    Never raises on a 4x4 input; use `check_density` to enforce.
    """
    rho = _as_matrix(rho)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = float(abs(np.trace(rho) - 1))
    # eigvalsh reads only one triangle, so symmetrize first
    min_eig = float(np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0])
    return Diagnostics(herm, tr, min_eig)


def check_density(rho) -> np.ndarray:
    rho = _as_matrix(rho)
    diag = validate_density(rho)
    if not diag.passes:
        raise InvalidStateError(
            "not a density matrix: "
            f"hermiticity defect {diag.hermiticity_defect:.3g}, "
            f"trace defect {diag.trace_defect:.3g}, "
            f"min eigenvalue {diag.min_eigenvalue:.3g}"
        )
    return rho


@dataclass(frozen=True)
class BlochForm:
    """Local Bloch vectors and correlation matrix of a two-qubit operator."""

    a: np.ndarray
    b: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(3))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(3))
        object.__setattr__(self, "T", np.asarray(self.T, dtype=float).reshape(3, 3))


def to_bloch(rho) -> BlochForm:
    rho = check_density(rho)
    a = [np.trace(rho @ np.kron(s, I2)).real for s in PAULIS]
    b = [np.trace(rho @ np.kron(I2, s)).real for s in PAULIS]
    T = [[np.trace(rho @ np.kron(si, sj)).real for sj in PAULIS] for si in PAULIS]
    return BlochForm(np.array(a), np.array(b), np.array(T))


def from_bloch(bf: BlochForm) -> np.ndarray:
    """Assemble the 4x4 operator of a Bloch form. Positivity is not checked."""
    rho = np.kron(I2, I2).astype(complex)
    for i, s in enumerate(PAULIS):
        rho += bf.a[i] * np.kron(s, I2)
        rho += bf.b[i] * np.kron(I2, s)
        for j, t in enumerate(PAULIS):
            rho += bf.T[i, j] * np.kron(s, t)
    return rho / 4


def partial_transpose(rho) -> np.ndarray:
    """Transpose on Bob's (right) factor."""
    rho = _as_matrix(rho)
    return rho.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def is_entangled_ppt(rho) -> tuple[bool, float]:
    """Peres-Horodecki test, exact for two qubits."""
    rho = check_density(rho)
    pt = partial_transpose(rho)
    min_eig = float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])
    return min_eig < PSD_TOL, min_eig


# -- state families ---------------------------------------------------------

FAMILIES = ("bell", "schmidt", "gamma", "tilde_gamma", "werner")
_ALIASES = {"tilde": "tilde_gamma", "pure": "schmidt"}
_SQRT2_2 = math.sqrt(2) / 2
# decimal literals such as 0.7853981634 overshoot pi/4 slightly
_PI_4_SLACK = math.pi / 4 + 1e-9


@dataclass(frozen=True)
class StateFamilySpec:
    """A named state family plus its parameters, range-checked on creation.

    Parameters by family:

    - ``bell``: none
    - ``schmidt``: ``alpha`` in (0, 1)
    - ``gamma``: ``m1`` > 0, ``m2``, ``m3`` >= 0 summing to 1, ``alpha`` in (0, 1/2]
    - ``tilde_gamma``: ``alpha`` in (sqrt(2)/2, 1], ``theta`` in (0, pi/4]
    - ``werner``: ``m`` in [0, 1), ``theta`` in [0, pi/4]
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise ParameterError(
                f"unknown family {self.family!r}; expected one of {', '.join(FAMILIES)}"
            )
        object.__setattr__(self, "family", family)
        params = {k: float(v) for k, v in dict(self.params).items()}
        object.__setattr__(self, "params", params)
        _check_family(family, params)

    def __getitem__(self, name):
        return self.params[name]

    def __hash__(self):
        return hash((self.family, tuple(sorted(self.params.items()))))

    def label(self) -> str:
        inner = ",".join(f"{k}={v:.17g}" for k, v in sorted(self.params.items()))
        return f"{self.family}({inner})"

    @property
    def t_diag(self) -> np.ndarray:
        """Diagonal of the initial correlation matrix (all families are diagonal)."""
        p = self.params
        if self.family == "bell":
            return np.array([1.0, -1.0, 1.0])
        if self.family == "schmidt":
            c = 2 * math.sqrt(p["alpha"] * (1 - p["alpha"]))
            return np.array([c, -c, 1.0])
        if self.family == "gamma":
            c = 2 * math.sqrt(p["alpha"] * (1 - p["alpha"])) * p["m1"]
            return np.array([c, -c, 1.0])
        if self.family == "tilde_gamma":
            st = p["alpha"] * math.sin(p["theta"])
            return np.array([-math.cos(p["theta"]), -st, -st])
        c = p["m"] * math.sin(2 * p["theta"])
        return np.array([c, -c, p["m"]])


_REQUIRED = {
    "bell": (),
    "schmidt": ("alpha",),
    "gamma": ("m1", "m2", "m3", "alpha"),
    "tilde_gamma": ("alpha", "theta"),
    "werner": ("m", "theta"),
}


def _require(cond: bool, message: str):
    if not cond:
        raise ParameterError(message)


def _check_family(family: str, p: dict):
    required = _REQUIRED[family]
    missing = [k for k in required if k not in p]
    _require(not missing, f"{family} requires parameter(s): {', '.join(missing)}")
    extra = sorted(set(p) - set(required))
    _require(not extra, f"{family} does not take parameter(s): {', '.join(extra)}")
    if family == "schmidt":
        _require(0 < p["alpha"] < 1, "alpha must lie in (0,1)")
    elif family == "gamma":
        _require(p["m1"] > 0, "m1 must be > 0")
        _require(p["m2"] >= 0, "m2 must be >= 0")
        _require(p["m3"] >= 0, "m3 must be >= 0")
        _require(abs(p["m1"] + p["m2"] + p["m3"] - 1) <= 1e-12, "m1+m2+m3 must equal 1")
        _require(0 < p["alpha"] <= 0.5, "alpha must lie in (0,1/2]")
    elif family == "tilde_gamma":
        _require(_SQRT2_2 < p["alpha"] <= 1, "alpha must lie in (sqrt(2)/2,1]")
        _require(0 < p["theta"] <= _PI_4_SLACK, "theta must lie in (0,pi/4]")
    elif family == "werner":
        _require(0 <= p["m"] < 1, "m must lie in [0,1)")
        _require(0 <= p["theta"] <= _PI_4_SLACK, "theta must lie in [0,pi/4]")


def family_spec(family: str, **params) -> StateFamilySpec:
    return StateFamilySpec(family, params)


def _schmidt_ket(alpha: float) -> np.ndarray:
    return ket(math.sqrt(alpha), 0, 0, math.sqrt(1 - alpha))


def make_state(spec: StateFamilySpec) -> np.ndarray:
    p = spec.params
    if spec.family == "bell":
        return bell_state()
    if spec.family == "schmidt":
        return projector(_schmidt_ket(p["alpha"]))
    if spec.family == "gamma":
        return (
            p["m1"] * projector(_schmidt_ket(p["alpha"]))
            + p["m2"] * projector(ket(1, 0, 0, 0))
            + p["m3"] * projector(ket(0, 0, 0, 1))
        )
    if spec.family == "tilde_gamma":
        return from_bloch(BlochForm(np.zeros(3), np.zeros(3), np.diag(spec.t_diag)))
    th = p["theta"]
    phi = ket(math.cos(th), 0, 0, math.sin(th))
    return p["m"] * projector(phi) + (1 - p["m"]) * maximally_mixed()


# -- state file -------------------------------------------------------------

def state_to_json(rho) -> dict:
    rho = _as_matrix(rho)
    return {"matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho]}


def state_from_json(obj: dict) -> np.ndarray:
    try:
        rows = obj["matrix"]
        arr = np.array(rows, dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidStateError(f"malformed state file: {exc}") from None
    if arr.shape != (4, 4, 2):
        raise InvalidStateError(f"state matrix must be 4x4 of [re, im] pairs, got {arr.shape}")
    return check_density(arr[..., 0] + 1j * arr[..., 1])


def read_state(path) -> np.ndarray:
    return state_from_json(json.loads(Path(path).read_text()))


def write_state(path, rho):
    Path(path).write_text(json.dumps(state_to_json(rho)))
