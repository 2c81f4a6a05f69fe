"""BB84 decoy checks on one link, shared by the single-photon and entangled drivers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channel import AnnouncementKind as K
from ..channel import PhotonSlot
from ..core import Basis
from .common import BB84, Session, random_basis


def measure_slot(slot: PhotonSlot, basis: Basis, rng: np.random.Generator) -> int | None:
    """Detector readout; ``None`` is a no-click on a lost photon."""
    if slot.is_lost:
        return None
    return slot.measure(basis, rng)


@dataclass
class Checkable:
    """Decoys on a link from the preparer's point of view, keyed by sent position."""

    positions: list[int]
    slots: list[PhotonSlot]
    states: list[BB84]


def check_random_bases(sess: Session, link: str, checker: str, preparer: str,
                       items: Checkable) -> None:
    """Checker measures in random bases and announces; preparer reveals its states."""
    rng = sess.rng
    measured: list[BB84 | None] = []
    for slot in items.slots:
        basis = random_basis(rng)
        bit = measure_slot(slot, basis, rng)
        measured.append(None if bit is None else (basis, bit))
    sess.say(checker, K.OUTCOME_REVEAL, link, tuple(
        (p, m[0].value, m[1]) for p, m in zip(items.positions, measured) if m is not None))
    sess.say(preparer, K.STATE_REVEAL, link, tuple(
        (p, s[0].value, s[1]) for p, s in zip(items.positions, items.states)))
    sess.judge(link, preparer, items.states, measured)


def check_revealed_bases(sess: Session, link: str, checker: str, preparer: str,
                         items: Checkable) -> None:
    """Preparer reveals the decoy bases first, checker measures in them and announces."""
    rng = sess.rng
    sess.say(preparer, K.BASIS_REVEAL, link, tuple(
        (p, s[0].value) for p, s in zip(items.positions, items.states)))
    measured: list[BB84 | None] = []
    for slot, (basis, _) in zip(items.slots, items.states):
        bit = measure_slot(slot, basis, rng)
        measured.append(None if bit is None else (basis, bit))
    sess.say(checker, K.OUTCOME_REVEAL, link, tuple(
        (p, m[1]) for p, m in zip(items.positions, measured) if m is not None))
    sess.say(preparer, K.STATE_REVEAL, link, tuple(
        (p, s[1]) for p, s in zip(items.positions, items.states)))
    sess.judge(link, preparer, items.states, measured)


def check_own_decoys(sess: Session, link: str, checker: str, items: Checkable) -> None:
    """The checker prepared these decoys itself and measures in the known bases."""
    rng = sess.rng
    measured: list[BB84 | None] = []
    for slot, (basis, _) in zip(items.slots, items.states):
        bit = measure_slot(slot, basis, rng)
        measured.append(None if bit is None else (basis, bit))
    sess.judge(link, checker, items.states, measured)


def split_check(sess: Session, items: Checkable, k: int) -> tuple[Checkable, Checkable]:
    """Pick ``k`` of the decoys uniformly at random for checking; return (checked, rest)."""
    n = len(items.positions)
    k = min(k, n)
    chosen = set(int(i) for i in sess.rng.choice(n, size=k, replace=False)) if k else set()
    pick = [i for i in range(n) if i in chosen]
    rest = [i for i in range(n) if i not in chosen]

    def sub(idx: Sequence[int]) -> Checkable:
        return Checkable([items.positions[i] for i in idx], [items.slots[i] for i in idx],
                         [items.states[i] for i in idx])

    return sub(pick), sub(rest)
