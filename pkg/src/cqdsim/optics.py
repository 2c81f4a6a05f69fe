"""Logical models of the optical elements and resource-state circuits.

Photon labels follow the optical figures: the two SPDC pairs are photons
(1, 2) and (3, 4); after the PBS the two output photons are called 2' (from
photon 2) and 3' (from photon 4), while photon 3 takes over the label "4".
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import core
from .core import Basis, BellOutcome, PureState
from .errors import QubitIndexError, ResourceExhaustedError

MAX_PREPARATION_ATTEMPTS = 10_000


@dataclass(frozen=True)
class WaveplateSetting:
    """Half-wave plate parameterized by the doubled fast-axis angle 2*theta (radians)."""

    two_theta: float

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.two_theta), math.sin(self.two_theta)
        return np.array([[c, s], [s, -c]], dtype=complex)

    @classmethod
    def from_degrees(cls, two_theta_deg: float) -> "WaveplateSetting":
        return cls(math.radians(two_theta_deg))


# 2*theta = 45 degrees in the figures; acts as H <-> +, V <-> -.
HWP_45 = WaveplateSetting(math.pi / 4)


class RoutingDecision(enum.Enum):
    TRANSMIT = "transmit"
    REFLECT = "reflect"


def hwp(state: PureState, q: int, setting: WaveplateSetting = HWP_45) -> PureState:
    return core.apply_1q(state, setting.matrix, q)


def spdc_bell_pair() -> PureState:
    """(|HH> + |VV>)/sqrt(2) on a fresh two-photon register."""
    return core.bell_state(BellOutcome.PSI_PLUS)


def pbs_postselect(state: PureState, qa: int, qb: int) -> tuple[float, PureState | None]:
    """Coincidence weight of a PBS fed by photons ``qa`` and ``qb``, and the kept state.

    A PBS transmitting H and reflecting V puts one photon in each output only
    for the |HH> and |VV> components; the port relabeling is the identity on
    that subspace.
    """
    n = state.n_qubits
    for q in (qa, qb):
        if not 0 <= q < n:
            raise QubitIndexError(f"qubit {q} out of range for a {n}-qubit state")
    if qa == qb:
        raise QubitIndexError("PBS needs two distinct input photons")
    t = np.moveaxis(state.tensor(), (qa, qb), (0, 1)).copy()
    t[0, 1] = 0.0
    t[1, 0] = 0.0
    prob = float(np.vdot(t, t).real)
    if prob < core.ZERO_PROB:
        return prob, None
    kept = np.moveaxis(t, (0, 1), (qa, qb)).reshape(-1) / math.sqrt(prob)
    return prob, PureState(kept)


def pbs_two_input(
    state: PureState, qa: int, qb: int, rng: np.random.Generator
) -> tuple[bool, PureState | None]:
    prob, kept = pbs_postselect(state, qa, qb)
    if kept is not None and rng.random() < prob:
        return True, kept
    return False, None


def bs_route(rng: np.random.Generator) -> RoutingDecision:
    """Symmetric 50:50 beamsplitter."""
    return RoutingDecision.REFLECT if rng.random() < 0.5 else RoutingDecision.TRANSMIT


class SwapResource(NamedTuple):
    state: PureState  # photons (1, 2', 3', 4)
    attempts: int


class GhzPreparation(NamedTuple):
    state: PureState  # photons (1, 3', 4)
    charlie_record: int  # diagonal outcome of photon 2': 0 for |+>, 1 for |->
    attempts: int


def _pairs_at_pbs() -> PureState:
    pairs = core.kron(spdc_bell_pair(), spdc_bell_pair())  # photons 1, 2, 3, 4
    return hwp(hwp(pairs, 1), 3)


def fused_pairs_postselected() -> tuple[float, PureState]:
    """RNG-free view of the fusion step: PBS coincidence probability and the kept
    state ordered (1, 2', 3', 4)."""
    prob, kept = pbs_postselect(_pairs_at_pbs(), 1, 3)
    assert kept is not None
    return prob, core.permute(kept, (0, 1, 3, 2))


def _fused_pairs(rng: np.random.Generator) -> tuple[PureState, int]:
    pairs = _pairs_at_pbs()
    for attempt in range(1, MAX_PREPARATION_ATTEMPTS + 1):
        ok, kept = pbs_two_input(pairs, 1, 3, rng)
        if ok:
            # register now holds (1, 2', "4", 3'); reorder to (1, 2', 3', 4)
            return core.permute(kept, (0, 1, 3, 2)), attempt
    raise ResourceExhaustedError(f"PBS postselection failed {MAX_PREPARATION_ATTEMPTS} times")


def prepare_swap_resource(rng: np.random.Generator) -> SwapResource:
    """Four-photon resource before photon 2' is analyzed, ordered (1, 2', 3', 4).

    Read with 2' and 3' in the diagonal basis this is
    1/2 [|+>_2'(|+>_3' psi+_14 + |->_3' phi+_14) + |->_2'(|+>_3' phi+_14 + |->_3' psi+_14)].
    """
    state, attempts = _fused_pairs(rng)
    return SwapResource(state, attempts)


def diagonal_analyzer(state: PureState, q: int, rng: np.random.Generator) -> tuple[int, PureState]:
    """HWP(2theta=45deg) followed by H/V detection, i.e. a diagonal measurement.

    Returns the bit (0 for |+>, 1 for |->) and the state with photon ``q``
    left in the corresponding diagonal ket.
    """
    after_plate = hwp(state, q)
    bit, detected = core.measure(after_plate, q, Basis.RECTILINEAR, rng)
    return bit, hwp(detected, q)


def prepare_ghz_like(rng: np.random.Generator) -> GhzPreparation:
    """GHZ-like triple on (1, 3', 4), equal to (|+>|psi+> + |->|phi+>)/sqrt(2).

    Photon 2' goes through the diagonal analyzer; on |-> a NOT on photon 1
    restores the |+> branch.
    """
    state, attempts = prepare_swap_resource(rng)
    bit, collapsed = diagonal_analyzer(state, 1, rng)
    triple = core.remove_qubit(collapsed, 1, Basis.DIAGONAL, bit)
    if bit:
        triple = core.apply_1q(triple, core.X, 0)
    return GhzPreparation(triple, bit, attempts)
