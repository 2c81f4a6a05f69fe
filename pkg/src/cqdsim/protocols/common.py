"""Shared protocol types: ids, decoy plans, sifting, session config and results."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..channel import (Announcement, AnnouncementKind, ChannelModel, ClassicalLog,
                       PhotonSlot, transmit)
from ..core import Basis
from ..errors import ConfigError, ProtocolError

ALICE, BOB, CHARLIE = "alice", "bob", "charlie"

# Decoded-string symbols for positions that carry no bit.
ERASED = "-"
UNDECIDABLE = "?"


class ProtocolId(enum.Enum):
    CQD_SINGLE = "cqd-sp"
    CQD_FIVE_STAGE = "cqd-5stage"
    CQD_ENTANGLED = "cqd-ent"
    CDSQC_SINGLE = "cdsqc-sp"
    CDSQC_ENTANGLED = "cdsqc-ent"
    CDSQC_SWAP = "cdsqc-swap"
    QD_SINGLE = "qd-sp"
    QSDC = "qsdc"
    DSQC = "dsqc"
    QKA = "qka"
    QKD_DECOY = "qkd-decoy"

    @classmethod
    def parse(cls, value: "str | ProtocolId") -> "ProtocolId":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            names = ", ".join(p.value for p in cls)
            raise ConfigError("protocol", f"unknown protocol {value!r} (expected one of {names})") from None

    @property
    def controlled(self) -> bool:
        return self in CONTROLLED

    @property
    def two_way(self) -> bool:
        """Both Alice and Bob contribute message bits."""
        return self in (ProtocolId.CQD_SINGLE, ProtocolId.CQD_FIVE_STAGE, ProtocolId.CQD_ENTANGLED,
                        ProtocolId.QD_SINGLE, ProtocolId.QKA)


CONTROLLED = frozenset({ProtocolId.CQD_SINGLE, ProtocolId.CQD_FIVE_STAGE, ProtocolId.CQD_ENTANGLED,
                        ProtocolId.CDSQC_SINGLE, ProtocolId.CDSQC_ENTANGLED, ProtocolId.CDSQC_SWAP})


class DecoyMode(enum.Enum):
    PERMUTATION = "permutation"
    BS_ROUTING = "bs"


@dataclass(frozen=True)
class DecoyPlan:
    """How each link is checked.

    ``fraction`` is the share of checking carriers in the string sent over a
    link; ``min_decoys`` is a floor on the number of check carriers per link.
    """

    mode: DecoyMode = DecoyMode.PERMUTATION
    fraction: float = 0.5
    min_decoys: int = 64

    def __post_init__(self) -> None:
        if not (0.0 < self.fraction < 1.0):
            raise ConfigError("decoy.fraction", f"must lie in (0, 1), got {self.fraction!r}")
        if self.min_decoys < 1:
            raise ConfigError("decoy.min_decoys", f"must be >= 1, got {self.min_decoys!r}")

    def decoys_for(self, n_message: int) -> int:
        return max(self.min_decoys, math.ceil(n_message * self.fraction / (1.0 - self.fraction)))


BB84 = tuple[Basis, int]


def random_basis(rng: np.random.Generator) -> Basis:
    return Basis.RECTILINEAR if rng.random() < 0.5 else Basis.DIAGONAL


def random_bb84(rng: np.random.Generator, k: int) -> list[BB84]:
    return [(random_basis(rng), int(rng.integers(2))) for _ in range(k)]


def message_tag(j: int) -> str:
    return f"m{j}"


def decoy_tag(j: int) -> str:
    return f"d{j}"


def parse_tag(tag: str) -> tuple[str, int]:
    return tag[0], int(tag[1:])


@dataclass
class DecoyString:
    """An enlarged string ready for transmission.

    ``permutation[i]`` is the original index of the carrier sent at position
    ``i``; originals are the messages followed by the decoys.
    """

    slots: list[PhotonSlot]
    permutation: list[int]
    n_message: int
    decoy_states: list[BB84]

    @property
    def tags(self) -> list[str]:
        n = self.n_message
        return [message_tag(o) if o < n else decoy_tag(o - n) for o in self.permutation]

    @property
    def decoy_positions(self) -> list[int]:
        return [i for i, o in enumerate(self.permutation) if o >= self.n_message]

    @property
    def message_positions(self) -> list[int]:
        """Sent positions of the message carriers, in message order."""
        pos = [0] * self.n_message
        for i, o in enumerate(self.permutation):
            if o < self.n_message:
                pos[o] = i
        return pos

    def restore(self, received: Sequence[PhotonSlot] | None = None) -> list[PhotonSlot]:
        """Undo the permutation on ``received`` (defaults to the sent slots)."""
        src = self.slots if received is None else list(received)
        if len(src) != len(self.permutation):
            raise ProtocolError("received string length differs from the sent one")
        out: list[PhotonSlot | None] = [None] * len(src)
        for i, o in enumerate(self.permutation):
            out[o] = src[i]
        return out  # type: ignore[return-value]


def build_decoy_string(
    message_slots: Sequence[PhotonSlot],
    plan: DecoyPlan,
    rng: np.random.Generator,
    *,
    n_decoys: int | None = None,
    decoys: Sequence[BB84] | None = None,
    decoy_slots: Sequence[PhotonSlot] | None = None,
    permutation: Sequence[int] | None = None,
) -> DecoyString:
    """Concatenate message carriers with BB84 decoys and permute the result.

    In BS-routing mode the string is sent as is; the receiver's beamsplitter
    makes the random split, so only explicitly passed decoys are appended.
    """
    msgs = list(message_slots)
    if decoys is None and plan.mode is DecoyMode.PERMUTATION:
        k = plan.decoys_for(len(msgs)) if n_decoys is None else n_decoys
        decoys = random_bb84(rng, k)
    decoys = list(decoys or [])
    if decoy_slots is None:
        extra = [PhotonSlot.prepare(b, bit) for b, bit in decoys]
    else:
        extra = list(decoy_slots)
        if len(extra) != len(decoys):
            raise ProtocolError("decoy_slots and decoys differ in length")
    total = len(msgs) + len(extra)
    if permutation is None:
        if plan.mode is DecoyMode.PERMUTATION:
            perm = [int(i) for i in rng.permutation(total)]
        else:
            perm = list(range(total))
    else:
        perm = [int(i) for i in permutation]
        if sorted(perm) != list(range(total)):
            raise ProtocolError("permutation is not a bijection on the enlarged string")
    originals = msgs + extra
    return DecoyString([originals[o] for o in perm], perm, len(msgs), decoys)


def estimate_qber(
    prepared: Sequence[BB84 | None], measured: Sequence[BB84 | None]
) -> tuple[float | None, int, int]:
    """Sifted error rate over same-basis pairs; ``None`` entries are no-clicks.

    Returns ``(qber, sifted_count, errors)``; ``qber`` is None when nothing sifts.
    """
    if len(prepared) != len(measured):
        raise ProtocolError(f"length mismatch: {len(prepared)} prepared vs {len(measured)} measured")
    sifted = errors = 0
    for p, m in zip(prepared, measured):
        if p is None or m is None or p[0] is not m[0]:
            continue
        sifted += 1
        errors += int(p[1] != m[1])
    if sifted == 0:
        return None, 0, 0
    return errors / sifted, sifted, errors


def decode_xor(s: int, r: int, own: int) -> int:
    """The dialogue decode rule other = s XOR r XOR own (an involution in ``own``)."""
    return s ^ r ^ own


def bits_to_str(bits: Sequence[int | None], erased: str = ERASED) -> str:
    return "".join(erased if b is None else str(int(b)) for b in bits)


def parse_bits(text: str, name: str) -> tuple[int, ...]:
    if any(ch not in "01" for ch in text):
        raise ConfigError(name, f"bit string may contain only 0 and 1, got {text!r}")
    return tuple(int(ch) for ch in text)


@dataclass(frozen=True)
class SessionConfig:
    protocol: ProtocolId
    alice_bits: tuple[int, ...]
    bob_bits: tuple[int, ...] = ()
    decoy: DecoyPlan = field(default_factory=DecoyPlan)
    channel: ChannelModel = field(default_factory=ChannelModel)
    abort_threshold: float = 0.05
    bell_efficiency: float = 1.0
    controller_approves: bool = True
    rotation_reveal_offset: float = 0.0
    min_detected_decoys: int = 8

    def __post_init__(self) -> None:
        object.__setattr__(self, "protocol", ProtocolId.parse(self.protocol))
        object.__setattr__(self, "alice_bits", tuple(int(b) for b in self.alice_bits))
        object.__setattr__(self, "bob_bits", tuple(int(b) for b in self.bob_bits))
        for name, bits in (("messages.alice", self.alice_bits), ("messages.bob", self.bob_bits)):
            if any(b not in (0, 1) for b in bits):
                raise ConfigError(name, "bits must be 0 or 1")
        if not (0.0 <= self.abort_threshold <= 1.0):
            raise ConfigError("decoy.threshold", f"must lie in [0, 1], got {self.abort_threshold!r}")
        if not (0.0 <= self.bell_efficiency <= 1.0):
            raise ConfigError("bell_efficiency", f"must lie in [0, 1], got {self.bell_efficiency!r}")


@dataclass
class SessionCounts:
    carriers_sent: int = 0
    carriers_detected: int = 0
    decoys_checked: int = 0
    delivered: bool = False  # message carriers reached their final receiver

    def to_dict(self) -> dict[str, int | bool]:
        return {"carriers_sent": self.carriers_sent, "carriers_detected": self.carriers_detected,
                "decoys_checked": self.decoys_checked, "delivered": self.delivered}


@dataclass
class SessionResult:
    """Outcome of one session.

    ``alice_decoded`` is what Alice recovered (Bob's message, or the agreed
    key); ``bob_decoded`` is what Bob recovered. ``*_expected`` hold the
    ideal values so error rates can be computed without protocol knowledge.
    """

    protocol: ProtocolId
    aborted: bool
    reason: str | None
    qber_per_link: dict[str, float | None]
    alice_decoded: str
    bob_decoded: str
    alice_expected: str
    bob_expected: str
    counts: SessionCounts
    transcript: ClassicalLog

    @property
    def detect_rate(self) -> float | None:
        """Fraction of message carriers detected by their final receiver; None if the
        session aborted before they got there."""
        c = self.counts
        if not c.delivered or not c.carriers_sent:
            return None
        return c.carriers_detected / c.carriers_sent

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol.value,
            "aborted": self.aborted,
            "reason": self.reason,
            "qber_per_link": dict(sorted(self.qber_per_link.items())),
            "alice_decoded": self.alice_decoded,
            "bob_decoded": self.bob_decoded,
            "alice_expected": self.alice_expected,
            "bob_expected": self.bob_expected,
            "counts": self.counts.to_dict(),
            "transcript": self.transcript.to_jsonable(),
        }


class SessionAbort(Exception):
    """Raised inside a driver to end the session; carries the abort reason."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class Session:
    """Mutable per-run bookkeeping shared by the drivers."""

    cfg: SessionConfig
    rng: np.random.Generator
    log: ClassicalLog = field(default_factory=ClassicalLog)
    qber: dict[str, float | None] = field(default_factory=dict)
    counts: SessionCounts = field(default_factory=SessionCounts)

    def say(self, sender: str, kind: AnnouncementKind, topic: str, payload: tuple = ()) -> None:
        self.log.broadcast(Announcement(sender, kind, topic, tuple(payload)))

    def send(self, slots: Sequence[PhotonSlot]) -> list[PhotonSlot]:
        out, _ = transmit(slots, self.cfg.channel, self.rng)
        return out

    def deliver(self, n_detected: int) -> None:
        self.counts.carriers_detected += n_detected
        self.counts.delivered = True

    def abort(self, sender: str, reason: str) -> None:
        self.say(sender, AnnouncementKind.ABORT, reason, (reason,))
        raise SessionAbort(reason)

    def judge(self, link: str, checker: str, prepared: Sequence[BB84 | None],
              measured: Sequence[BB84 | None]) -> None:
        """Record the link QBER and abort on too few detections or too many errors."""
        detected = sum(m is not None for m in measured)
        self.counts.decoys_checked += detected
        qber, sifted, _ = estimate_qber(prepared, measured)
        self.qber[link] = qber
        if detected < self.cfg.min_detected_decoys or sifted == 0:
            self.abort(checker, "insufficient-detections")
        if qber is not None and qber > self.cfg.abort_threshold:
            self.abort(checker, f"qber-exceeded-{link}")

    def result(self, alice: str, bob: str, alice_expected: str, bob_expected: str,
               reason: str | None = None) -> SessionResult:
        aborted = reason is not None
        return SessionResult(
            protocol=self.cfg.protocol, aborted=aborted, reason=reason,
            qber_per_link=dict(self.qber),
            alice_decoded="" if aborted else alice, bob_decoded="" if aborted else bob,
            alice_expected=alice_expected, bob_expected=bob_expected,
            counts=self.counts, transcript=self.log)


def xor_bits(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    if len(a) != len(b):
        raise ProtocolError("bit strings differ in length")
    return tuple(x ^ y for x, y in zip(a, b))
