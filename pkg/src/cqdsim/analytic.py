"""Closed-form resource states, written term by term from named kets.

These are the reference states the optical circuits are checked against, so
nothing here goes through the circuit code in :mod:`cqdsim.optics`.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .core import BELL_ORDER, Basis, BellOutcome, PureState

_K = {"H": Basis.RECTILINEAR.ket(0), "V": Basis.RECTILINEAR.ket(1),
      "+": Basis.DIAGONAL.ket(0), "-": Basis.DIAGONAL.ket(1)}

# Naming of the two-qubit kets used throughout; the textbook naming swaps psi and phi.
_BELL_NAMES = {
    "cqd": {"psi+": BellOutcome.PSI_PLUS.ket, "phi+": BellOutcome.PHI_PLUS.ket},
    "textbook": {"psi+": BellOutcome.PHI_PLUS.ket, "phi+": BellOutcome.PSI_PLUS.ket},
}


def _prod(*kets: np.ndarray) -> np.ndarray:
    out = np.array([1.0 + 0j])
    for k in kets:
        out = np.kron(out, k)
    return out


def _reorder(amps: np.ndarray, labels: str, target: str) -> np.ndarray:
    """Permute a tensor written in qubit order ``labels`` into order ``target``."""
    n = len(labels)
    t = amps.reshape((2,) * n)
    return np.transpose(t, [labels.index(ch) for ch in target]).reshape(-1)


def fused_pairs_before_pbs() -> PureState:
    """Both SPDC pairs after HWPs on photons 2 and 4, order (1, 2, 3, 4)."""
    a = 0.5 * (_prod(_K["H"], _K["+"], _K["H"], _K["+"]) + _prod(_K["H"], _K["+"], _K["V"], _K["-"])
               + _prod(_K["V"], _K["-"], _K["H"], _K["+"]) + _prod(_K["V"], _K["-"], _K["V"], _K["-"]))
    return PureState(a)


def post_pbs_state() -> PureState:
    """State after PBS postselection, order (1, 2', 3', 4); note the minus sign."""
    a = 0.5 * (_prod(_K["H"], _K["H"], _K["H"], _K["+"]) + _prod(_K["H"], _K["V"], _K["V"], _K["-"])
               + _prod(_K["V"], _K["H"], _K["H"], _K["+"]) - _prod(_K["V"], _K["V"], _K["V"], _K["-"]))
    return PureState(a)


def swap_resource() -> PureState:
    """Four-photon state on (1, 2', 3', 4) before 2' is measured.

    1/2 [ |+>_2' (|+>_3' psi+_14 + |->_3' phi+_14) + |->_2' (|+>_3' phi+_14 + |->_3' psi+_14) ]
    """
    psi, phi = BellOutcome.PSI_PLUS.ket, BellOutcome.PHI_PLUS.ket
    p, m = _K["+"], _K["-"]
    # written in order (2', 3', 1, 4)
    a = 0.5 * (_prod(p, p, psi) + _prod(p, m, phi) + _prod(m, p, phi) + _prod(m, m, psi))
    return PureState(_reorder(a, "bc14", "1bc4"))


def phi1_state() -> PureState:
    """(|+>_3' psi+_14 + |->_3' phi+_14)/sqrt(2) on (1, 3', 4)."""
    psi, phi = BellOutcome.PSI_PLUS.ket, BellOutcome.PHI_PLUS.ket
    a = (_prod(_K["+"], psi) + _prod(_K["-"], phi)) / math.sqrt(2)
    return PureState(_reorder(a, "c14", "1c4"))


def ghz_like_state() -> PureState:
    """(|psi+>|0> + |phi+>|1>)/sqrt(2) on (1, 2, 3), normalized."""
    psi, phi = BellOutcome.PSI_PLUS.ket, BellOutcome.PHI_PLUS.ket
    return PureState((_prod(psi, _K["H"]) + _prod(phi, _K["V"])) / math.sqrt(2))


def four_qubit_swap_state(convention: str = "cqd") -> PureState:
    """Controller's four-qubit state on abstract qubits (1, 2, 3, 4).

    1/2 { (psi+_12 |0>_3 + phi+_12 |1>_3)|0>_4 + (phi+_12 |0>_3 + psi+_12 |1>_3)|1>_4 }

    ``convention="textbook"`` reads the psi/phi names the other way round and
    exists only for fault-injection checks.
    """
    names = _BELL_NAMES[convention]
    psi, phi = names["psi+"], names["phi+"]
    h, v = _K["H"], _K["V"]
    a = 0.5 * (_prod(psi, h, h) + _prod(phi, v, h) + _prod(phi, h, v) + _prod(psi, v, v))
    return PureState(a)


def combined_swap_state(message_bit: int, convention: str = "cqd") -> PureState:
    """Alice's encoded pair times the four-qubit state, order (A1, A2, 1, 2, 3, 4).

    ``convention`` only affects the controller's resource. Relabeling Alice's
    pair as well would act as X on both halves of each measured pair, which
    leaves every Bell parity unchanged and so hides the fault.
    """
    pair = BellOutcome.PHI_PLUS.ket if message_bit else BellOutcome.PSI_PLUS.ket
    return PureState(np.kron(pair, four_qubit_swap_state(convention).amps))


# Branch tables of the swapped state: for (charlie c, message m), the eight
# surviving terms (Bell(A1,1), Bell(A2,2), bob b, sign), each of weight 1/8.
_PP, _PM, _FP, _FM = (BellOutcome.PSI_PLUS, BellOutcome.PSI_MINUS,
                      BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS)
SWAP_BRANCHES: dict[tuple[int, int], tuple[tuple[BellOutcome, BellOutcome, int, int], ...]] = {
    (0, 0): (
        (_PP, _PP, 0, +1), (_FP, _FP, 0, +1), (_FM, _FM, 0, +1), (_PM, _PM, 0, +1),
        (_PP, _FP, 1, +1), (_PM, _FM, 1, +1), (_FP, _PP, 1, +1), (_FM, _PM, 1, +1),
    ),
    (1, 1): (
        (_PP, _FP, 1, +1), (_FP, _PP, 1, +1), (_FM, _PM, 1, -1), (_PM, _FM, 1, -1),
        (_PP, _PP, 0, +1), (_PM, _PM, 0, -1), (_FP, _FP, 0, +1), (_FM, _FM, 0, -1),
    ),
    (0, 1): (
        (_PP, _PP, 1, +1), (_PM, _PM, 1, -1), (_FP, _FP, 1, +1), (_FM, _FM, 1, -1),
        (_PP, _FP, 0, +1), (_PM, _FM, 0, -1), (_FP, _PP, 0, +1), (_FM, _PM, 0, -1),
    ),
    (1, 0): (
        (_PP, _FP, 0, +1), (_PM, _FM, 0, +1), (_FP, _PP, 0, +1), (_FM, _PM, 0, +1),
        (_PP, _PP, 1, +1), (_PM, _PM, 1, +1), (_FP, _FP, 1, +1), (_FM, _FM, 1, +1),
    ),
}


def all_bell_pairs():
    return itertools.product(BELL_ORDER, BELL_ORDER)
