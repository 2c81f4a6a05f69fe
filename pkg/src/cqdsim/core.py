"""Pure-state simulator for small polarization-qubit registers.

Conventions
-----------
* Qubit 0 is the most significant position of the amplitude index.
* ``|0> = |H>`` and ``|1> = |V>``; ``|+/-> = (|H> +/- |V>)/sqrt(2)``.
* Bell states use the *even/odd parity* naming, which is the reverse of most
  textbooks::

      psi(+/-) = (|00> +/- |11>)/sqrt(2)     parity 0
      phi(+/-) = (|01> +/- |10>)/sqrt(2)     parity 1

* ``iY`` is the real matrix ``[[0, 1], [-1, 0]]``; it flips the bit of all four
  BB84 states up to a global sign.

Global phases are never significant: :func:`equal_up_to_phase` is the only
state-equality notion used by the package.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotUnitaryError, QubitIndexError, SizeError

MAX_QUBITS = 12
NORM_TOL = 1e-9
OP_TOL = 1e-12
# Projections below this weight are treated as impossible.
ZERO_PROB = 1e-12

_SQRT1_2 = 1.0 / math.sqrt(2.0)

H_KET = np.array([1.0, 0.0], dtype=complex)
V_KET = np.array([0.0, 1.0], dtype=complex)
PLUS_KET = np.array([_SQRT1_2, _SQRT1_2], dtype=complex)
MINUS_KET = np.array([_SQRT1_2, -_SQRT1_2], dtype=complex)

_KETS = {"H": H_KET, "V": V_KET, "0": H_KET, "1": V_KET, "+": PLUS_KET, "-": MINUS_KET}


class Basis(enum.Enum):
    RECTILINEAR = "R"
    DIAGONAL = "D"

    @property
    def kets(self) -> tuple[np.ndarray, np.ndarray]:
        """The (bit 0, bit 1) eigenkets of this basis."""
        if self is Basis.RECTILINEAR:
            return H_KET, V_KET
        return PLUS_KET, MINUS_KET

    def ket(self, bit: int) -> np.ndarray:
        return self.kets[bit]


class PauliCode(enum.Enum):
    I = "I"
    X = "X"
    IY = "iY"
    Z = "Z"

    @property
    def matrix(self) -> np.ndarray:
        return _PAULI_MATRICES[self]

    @property
    def code(self) -> tuple[int, int]:
        """(x, z) exponents with ``U = Z**z @ X**x`` up to sign."""
        return _PAULI_XZ[self]

    @classmethod
    def from_code(cls, x: int, z: int) -> "PauliCode":
        return _XZ_PAULI[(x & 1, z & 1)]


_PAULI_MATRICES = {
    PauliCode.I: np.array([[1, 0], [0, 1]], dtype=complex),
    PauliCode.X: np.array([[0, 1], [1, 0]], dtype=complex),
    PauliCode.IY: np.array([[0, 1], [-1, 0]], dtype=complex),
    PauliCode.Z: np.array([[1, 0], [0, -1]], dtype=complex),
}
for _m in _PAULI_MATRICES.values():
    _m.setflags(write=False)
_PAULI_XZ = {PauliCode.I: (0, 0), PauliCode.X: (1, 0), PauliCode.IY: (1, 1), PauliCode.Z: (0, 1)}
_XZ_PAULI = {v: k for k, v in _PAULI_XZ.items()}

I2 = PauliCode.I.matrix
X = PauliCode.X.matrix
IY = PauliCode.IY.matrix
Z = PauliCode.Z.matrix


def rotation(theta: float) -> np.ndarray:
    """Real-plane rotation ``[[cos, -sin], [sin, cos]]``; these all commute."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]], dtype=complex)


class BellOutcome(enum.Enum):
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"
    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"

    @property
    def parity(self) -> int:
        """0 for the psi states (|00>, |11> support), 1 for phi."""
        return 0 if self in (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS) else 1

    @property
    def phase(self) -> int:
        return 0 if self in (BellOutcome.PSI_PLUS, BellOutcome.PHI_PLUS) else 1

    @property
    def ket(self) -> np.ndarray:
        return _BELL_KETS[self]

    @classmethod
    def from_bits(cls, parity: int, phase: int) -> "BellOutcome":
        return _BITS_BELL[(parity & 1, phase & 1)]


_BELL_KETS = {
    BellOutcome.PSI_PLUS: np.array([1, 0, 0, 1], dtype=complex) * _SQRT1_2,
    BellOutcome.PSI_MINUS: np.array([1, 0, 0, -1], dtype=complex) * _SQRT1_2,
    BellOutcome.PHI_PLUS: np.array([0, 1, 1, 0], dtype=complex) * _SQRT1_2,
    BellOutcome.PHI_MINUS: np.array([0, 1, -1, 0], dtype=complex) * _SQRT1_2,
}
for _k in _BELL_KETS.values():
    _k.setflags(write=False)
_BITS_BELL = {(b.parity, b.phase): b for b in BellOutcome}
BELL_ORDER = (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS, BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS)


@dataclass(frozen=True, eq=False)
class PureState:
    """Immutable, normalized amplitude vector over ``n_qubits`` qubits."""

    amps: np.ndarray

    def __post_init__(self) -> None:
        amps = np.array(self.amps, dtype=complex).reshape(-1)
        size = amps.shape[0]
        n = size.bit_length() - 1
        if size < 2 or (1 << n) != size:
            raise SizeError(f"amplitude vector length {size} is not 2**n with n >= 1")
        if n > MAX_QUBITS:
            raise SizeError(f"{n} qubits exceeds the {MAX_QUBITS}-qubit limit")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def _trusted(cls, amps: np.ndarray) -> "PureState":
        # internal results that are normalized by construction skip re-validation
        st = object.__new__(cls)
        amps = np.ascontiguousarray(amps, dtype=complex).reshape(-1)
        amps.setflags(write=False)
        object.__setattr__(st, "amps", amps)
        return st

    @property
    def n_qubits(self) -> int:
        return self.amps.shape[0].bit_length() - 1

    @property
    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amps, self.amps).real))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def tensor(self) -> np.ndarray:
        return self.amps.reshape((2,) * self.n_qubits)

    @classmethod
    def normalized(cls, amps) -> "PureState":
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        return cls(amps / np.linalg.norm(amps))

    @classmethod
    def from_label(cls, label: str) -> "PureState":
        """Product state from characters in ``HV01+-``, e.g. ``"H+V"``."""
        try:
            kets = [_KETS[ch] for ch in label]
        except KeyError as exc:
            raise ValueError(f"unknown ket symbol {exc.args[0]!r}") from None
        amps = kets[0]
        for k in kets[1:]:
            amps = np.kron(amps, k)
        return cls(amps)

    def __repr__(self) -> str:
        return f"PureState(n_qubits={self.n_qubits}, amps={np.round(self.amps, 6).tolist()})"


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_QUBITS:
        raise SizeError(f"qubit count must be in [1, {MAX_QUBITS}], got {n}")


def _check_index(state: PureState, q: int) -> None:
    if not 0 <= q < state.n_qubits:
        raise QubitIndexError(f"qubit {q} out of range for a {state.n_qubits}-qubit state")


def zero_state(n: int) -> PureState:
    """All-``|H>`` register of ``n`` qubits."""
    _check_n(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    return PureState(amps)


def basis_state(bits: Sequence[int]) -> PureState:
    """Computational basis state; ``bits[0]`` is qubit 0."""
    _check_n(len(bits))
    index = 0
    for b in bits:
        index = (index << 1) | (int(b) & 1)
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[index] = 1.0
    return PureState(amps)


def bell_state(outcome: BellOutcome) -> PureState:
    return PureState(outcome.ket)


def kron(a: PureState, b: PureState) -> PureState:
    """Tensor product with ``a``'s qubits first."""
    n = a.n_qubits + b.n_qubits
    if n > MAX_QUBITS:
        raise SizeError(f"combined register of {n} qubits exceeds {MAX_QUBITS}")
    return PureState._trusted(np.kron(a.amps, b.amps))


def is_unitary(u: np.ndarray, tol: float = NORM_TOL) -> bool:
    u = np.asarray(u)
    if u.shape != (2, 2):
        return False
    d = u.conj().T @ u - I2
    return float(np.abs(d).max()) <= tol


def apply_1q(state: PureState, u: np.ndarray, q: int) -> PureState:
    """Apply the 2x2 unitary ``u`` to qubit ``q``."""
    _check_index(state, q)
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise NotUnitaryError("gate is not a 2x2 unitary within 1e-9")
    psi = state.amps.reshape((1 << q, 2, -1))
    return PureState._trusted((u @ psi).reshape(-1))


def permute(state: PureState, order: Sequence[int]) -> PureState:
    """Reorder qubits: new qubit ``i`` is old qubit ``order[i]``."""
    n = state.n_qubits
    if sorted(order) != list(range(n)):
        raise QubitIndexError(f"{list(order)} is not a permutation of range({n})")
    return PureState._trusted(np.transpose(state.tensor(), order).reshape(-1))


def _project_vector(state: PureState, q: int, v: np.ndarray) -> tuple[float, np.ndarray]:
    psi = state.amps.reshape((1 << q, 2, -1))
    c = v.conj() @ psi
    prob = float(np.vdot(c, c).real)
    return prob, c


def project(state: PureState, q: int, basis: Basis, bit: int) -> tuple[float, PureState | None]:
    """Born probability of ``bit`` on qubit ``q`` and the renormalized post-state.

    The post-state is ``None`` when the probability is below 1e-12.
    """
    _check_index(state, q)
    v = basis.ket(bit)
    prob, c = _project_vector(state, q, v)
    if prob < ZERO_PROB:
        return prob, None
    post = v[None, :, None] * (c / math.sqrt(prob))[:, None, :]
    return prob, PureState._trusted(post.reshape(-1))


def measure(state: PureState, q: int, basis: Basis, rng: np.random.Generator) -> tuple[int, PureState]:
    """Projective measurement of qubit ``q`` in ``basis``; returns (bit, post-state)."""
    p0, post0 = project(state, q, basis, 0)
    if post0 is not None and rng.random() < p0:
        return 0, post0
    p1, post1 = project(state, q, basis, 1)
    if post1 is None:
        # p0 ~ 1 but the uniform draw landed in the <1e-12 sliver
        return 0, post0
    return 1, post1


def remove_qubit(state: PureState, q: int, basis: Basis, bit: int) -> PureState:
    """Drop qubit ``q``, which must be (close to) the product factor ``basis.ket(bit)``."""
    if state.n_qubits < 2:
        raise SizeError("cannot remove the only qubit of a register")
    prob, c = _project_vector(state, q, basis.ket(bit))
    if abs(prob - 1.0) > NORM_TOL:
        raise ValueError(f"qubit {q} is not in the requested product state (weight {prob:.3g})")
    return PureState.normalized(c.reshape(-1))


def _bell_frame(state: PureState, q1: int, q2: int) -> np.ndarray:
    _check_index(state, q1)
    _check_index(state, q2)
    if q1 == q2:
        raise QubitIndexError("Bell measurement needs two distinct qubits")
    t = np.moveaxis(state.tensor(), (q1, q2), (0, 1))
    return t.reshape(4, -1)


def _bell_unframe(frame: np.ndarray, n: int, q1: int, q2: int) -> np.ndarray:
    t = frame.reshape((2,) * n)
    return np.moveaxis(t, (0, 1), (q1, q2)).reshape(-1)


def bell_probabilities(state: PureState, q1: int, q2: int) -> dict[BellOutcome, float]:
    frame = _bell_frame(state, q1, q2)
    out = {}
    for b in BELL_ORDER:
        c = b.ket.conj() @ frame
        out[b] = float(np.vdot(c, c).real)
    return out


def project_bell(
    state: PureState, q1: int, q2: int, outcome: BellOutcome
) -> tuple[float, PureState | None]:
    """Born probability of ``outcome`` on (q1, q2) and the renormalized post-state."""
    frame = _bell_frame(state, q1, q2)
    ket = outcome.ket
    c = ket.conj() @ frame
    prob = float(np.vdot(c, c).real)
    if prob < ZERO_PROB:
        return prob, None
    post = np.outer(ket, c / math.sqrt(prob))
    return prob, PureState(_bell_unframe(post, state.n_qubits, q1, q2))


def measure_bell(
    state: PureState, q1: int, q2: int, rng: np.random.Generator
) -> tuple[BellOutcome, PureState]:
    """Complete Bell-basis measurement of (q1, q2) in the parity naming above."""
    probs = bell_probabilities(state, q1, q2)
    r = rng.random()
    acc = 0.0
    chosen = None
    for b in BELL_ORDER:
        p = probs[b]
        if p < ZERO_PROB:
            continue
        chosen = b
        acc += p
        if r < acc:
            break
    assert chosen is not None, "zero-norm state cannot reach measure_bell"
    _, post = project_bell(state, q1, q2, chosen)
    return chosen, post


def overlap(a: PureState, b: PureState) -> complex:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"cannot compare {a.n_qubits}- and {b.n_qubits}-qubit states")
    return complex(np.vdot(a.amps, b.amps))


def equal_up_to_phase(a: PureState, b: PureState, tol: float = NORM_TOL) -> bool:
    return abs(overlap(a, b)) >= 1.0 - tol
