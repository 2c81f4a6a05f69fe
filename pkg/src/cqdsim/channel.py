"""Quantum channel with loss, depolarizing noise and intercept-resend eavesdropping,
plus the public authenticated classical log.

Carriers are :class:`PhotonSlot` handles into a :class:`Register`. Several slots
may point into one register when their photons are entangled; operations on a
slot update the shared register in place, so the session that owns the
registers must be single-threaded.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import core
from .core import Basis, PureState
from .errors import ConfigError


class Register:
    """Mutable holder of one :class:`PureState`, shared by the slots pointing into it."""

    __slots__ = ("state",)

    def __init__(self, state: PureState):
        self.state = state

    def __repr__(self) -> str:
        return f"Register({self.state!r})"


@dataclass(eq=False)
class PhotonSlot:
    """One transmissible carrier: a qubit of a register, or a lost photon."""

    register: Register | None
    qubit: int = 0

    @classmethod
    def single(cls, state: PureState) -> "PhotonSlot":
        return cls(Register(state), 0)

    @classmethod
    def prepare(cls, basis: Basis, bit: int) -> "PhotonSlot":
        return cls(Register(PureState._trusted(basis.ket(bit))), 0)

    @classmethod
    def lost(cls) -> "PhotonSlot":
        return cls(None, 0)

    @property
    def is_lost(self) -> bool:
        return self.register is None

    def apply(self, u: np.ndarray) -> None:
        reg = self.register
        if reg is None:
            raise ValueError("cannot act on a lost photon")
        reg.state = core.apply_1q(reg.state, u, self.qubit)

    def measure(self, basis: Basis, rng: np.random.Generator) -> int:
        reg = self.register
        if reg is None:
            raise ValueError("cannot measure a lost photon")
        bit, reg.state = core.measure(reg.state, self.qubit, basis, rng)
        return bit


class EveKind(enum.Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept-resend"


class BasisPolicy(enum.Enum):
    RANDOM = "random"
    RECTILINEAR = "rectilinear"
    DIAGONAL = "diagonal"

    def choose(self, rng: np.random.Generator) -> Basis:
        if self is BasisPolicy.RECTILINEAR:
            return Basis.RECTILINEAR
        if self is BasisPolicy.DIAGONAL:
            return Basis.DIAGONAL
        return Basis.RECTILINEAR if rng.random() < 0.5 else Basis.DIAGONAL


def _check_prob(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise ConfigError(name, f"must be a probability in [0, 1], got {value!r}")


@dataclass(frozen=True)
class EveStrategy:
    kind: EveKind = EveKind.NONE
    basis_policy: BasisPolicy = BasisPolicy.RANDOM
    fraction: float = 1.0

    def __post_init__(self) -> None:
        _check_prob("channel.eve.fraction", self.fraction)

    @property
    def active(self) -> bool:
        return self.kind is not EveKind.NONE and self.fraction > 0.0


@dataclass(frozen=True)
class ChannelModel:
    """Per-hop channel; each carrier is affected independently."""

    p_loss: float = 0.0
    p_depol: float = 0.0
    eve: EveStrategy = field(default_factory=EveStrategy)

    def __post_init__(self) -> None:
        _check_prob("channel.loss", self.p_loss)
        _check_prob("channel.depol", self.p_depol)

    @property
    def is_ideal(self) -> bool:
        return self.p_loss == 0.0 and self.p_depol == 0.0 and not self.eve.active


@dataclass(frozen=True)
class EveRecord:
    position: int
    basis: Basis
    bit: int


_DEPOLARIZING_PAULIS = (core.X, core.IY, core.Z)


def eve_intercept_resend(
    slot: PhotonSlot, policy: BasisPolicy, rng: np.random.Generator
) -> tuple[PhotonSlot, Basis, int]:
    """Measure ``slot`` in the policy basis and forward the measured eigenstate.

    A single-photon register is replaced by a freshly prepared photon. For a
    photon entangled with others the in-place collapse already leaves it in
    the measured eigenstate and product with its partners, which is the same
    thing as resending.
    """
    basis = policy.choose(rng)
    bit = slot.measure(basis, rng)
    if slot.register is not None and slot.register.state.n_qubits == 1:
        return PhotonSlot.prepare(basis, bit), basis, bit
    return slot, basis, bit


def transmit(
    slots: Sequence[PhotonSlot], ch: ChannelModel, rng: np.random.Generator
) -> tuple[list[PhotonSlot], list[EveRecord]]:
    """One hop: per live carrier, Eve (if selected), then depolarizing, then loss."""
    if ch.is_ideal:
        return list(slots), []
    out: list[PhotonSlot] = []
    eve_log: list[EveRecord] = []
    eve = ch.eve
    for pos, slot in enumerate(slots):
        if slot.is_lost:
            out.append(slot)
            continue
        if eve.active and rng.random() < eve.fraction:
            slot, basis, bit = eve_intercept_resend(slot, eve.basis_policy, rng)
            eve_log.append(EveRecord(pos, basis, bit))
        if ch.p_depol > 0.0 and rng.random() < ch.p_depol:
            slot.apply(_DEPOLARIZING_PAULIS[int(rng.integers(3))])
        if ch.p_loss > 0.0 and rng.random() < ch.p_loss:
            slot = PhotonSlot.lost()
        out.append(slot)
    return out, eve_log


# -- classical channel ---------------------------------------------------------


class AnnouncementKind(enum.Enum):
    BASIS_REVEAL = "basis-reveal"
    POSITIONS_REVEAL = "positions-reveal"
    OUTCOME_REVEAL = "outcome-reveal"
    ROTATION_REVEAL = "rotation-reveal"
    STATE_REVEAL = "state-reveal"
    ACK_RECEIPT = "ack-receipt"
    ABORT = "abort"


@dataclass(frozen=True)
class Announcement:
    """A public message. ``topic`` tells readers which step it belongs to."""

    sender: str
    kind: AnnouncementKind
    topic: str
    payload: tuple = ()

    def to_jsonable(self) -> dict[str, Any]:
        return {"sender": self.sender, "kind": self.kind.value, "topic": self.topic,
                "payload": _jsonable(self.payload)}


def _jsonable(value: Any) -> Any:
    if isinstance(value, (tuple, list)):
        return [_jsonable(v) for v in value]
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


class ClassicalLog:
    """Append-only broadcast log; every party and Eve read the same entries."""

    def __init__(self, entries: Iterable[Announcement] = ()):
        self._entries: list[Announcement] = list(entries)

    def broadcast(self, a: Announcement) -> "ClassicalLog":
        self._entries.append(a)
        return self

    @property
    def entries(self) -> tuple[Announcement, ...]:
        return tuple(self._entries)

    def view(self) -> tuple[Announcement, ...]:
        """What any reader (including the adversary) sees."""
        return self.entries

    def __len__(self) -> int:
        return len(self._entries)

    def find(self, sender: str | None = None, kind: AnnouncementKind | None = None,
             topic: str | None = None) -> Announcement | None:
        """Most recent matching announcement, or None."""
        for a in reversed(self._entries):
            if sender is not None and a.sender != sender:
                continue
            if kind is not None and a.kind is not kind:
                continue
            if topic is not None and a.topic != topic:
                continue
            return a
        return None

    def without(self, predicate: Callable[[Announcement], bool]) -> "ClassicalLog":
        """Copy of the log with matching entries dropped (for what-if decoding)."""
        return ClassicalLog(a for a in self._entries if not predicate(a))

    def to_jsonable(self) -> list[dict[str, Any]]:
        return [a.to_jsonable() for a in self._entries]

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), sort_keys=True, separators=(",", ":"))


def broadcast(log: ClassicalLog, a: Announcement) -> ClassicalLog:
    return log.broadcast(a)
