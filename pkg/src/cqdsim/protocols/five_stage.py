"""Five-stage controlled dialogue with commuting rotation locks.

Charlie -> Alice -> Bob -> Charlie -> Alice -> Bob. Each party locks the
carriers with its own rotation on the first pass and unlocks on the second,
so after the last unlock Bob holds Alice's encoded computational state.

One decoy group is spent per hop. A checker undoes the rotations revealed
for the group, measures in the computational basis and compares with
Charlie's initial bits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import core
from ..channel import AnnouncementKind as K
from ..channel import ClassicalLog, PhotonSlot
from ..core import Basis
from .checks import measure_slot
from .common import (ALICE, BOB, CHARLIE, UNDECIDABLE, Session, SessionAbort, SessionConfig,
                     SessionResult, bits_to_str, decode_xor)
from ..errors import ConfigError

N_HOPS = 5
_HOPS = ((CHARLIE, ALICE), (ALICE, BOB), (BOB, CHARLIE), (CHARLIE, ALICE), (ALICE, BOB))
# who publishes the position of each hop's decoy group
_POSITION_REVEALER = (CHARLIE, CHARLIE, CHARLIE, CHARLIE, ALICE)
PAYLOAD = "payload"


@dataclass
class _Carrier:
    slot: PhotonSlot
    bit: int  # Charlie's initial computational bit
    group: int  # 0 for payload, j for the decoy group checked after hop j


def _rotate(c: _Carrier, theta: float) -> None:
    if not c.slot.is_lost:
        c.slot.apply(core.rotation(theta))


def _active_parties(hop: int) -> tuple[str, ...]:
    """Parties whose rotation is still on the carriers when hop ``hop`` (1-based) lands."""
    return ((CHARLIE,), (CHARLIE, ALICE), (CHARLIE, ALICE, BOB), (ALICE, BOB), (BOB,))[hop - 1]


def run_five_stage(cfg: SessionConfig, rng: np.random.Generator) -> SessionResult:
    a, b = cfg.alice_bits, cfg.bob_bits
    n = len(a)
    if n < 1:
        raise ConfigError("messages.alice", "needs at least one bit")
    if len(b) != n:
        raise ConfigError("messages.bob", f"needs {n} bits to match Alice's message, got {len(b)}")
    sess = Session(cfg, rng)
    exp_alice, exp_bob = bits_to_str(b), bits_to_str(a)
    k = cfg.decoy.decoys_for(n)

    groups = [0] * n + [g for g in range(1, N_HOPS + 1) for _ in range(k)]
    order = [int(i) for i in rng.permutation(len(groups))]
    carriers = []
    for idx in order:
        bit = int(rng.integers(2))
        carriers.append(_Carrier(PhotonSlot.prepare(Basis.RECTILINEAR, bit), bit, groups[idx]))
    payload_pos = [i for i, c in enumerate(carriers) if c.group == 0]
    theta = {p: np.zeros(len(carriers)) for p in (CHARLIE, ALICE, BOB)}

    def lock(party: str) -> None:
        angles = rng.uniform(0.0, 2.0 * math.pi, size=len(carriers))
        theta[party] = angles
        for i, c in enumerate(carriers):
            if c.group == 0 or c.group > hop:
                _rotate(c, angles[i])

    def unlock(party: str) -> None:
        for i, c in enumerate(carriers):
            if c.group == 0 or c.group > hop:
                _rotate(c, -theta[party][i])

    try:
        hop = 0
        lock(CHARLIE)
        sess.counts.carriers_sent += n
        for hop in range(1, N_HOPS + 1):
            sender, receiver = _HOPS[hop - 1]
            live = [i for i, c in enumerate(carriers) if c.group == 0 or c.group >= hop]
            sent = sess.send([carriers[i].slot for i in live])
            for i, s in zip(live, sent):
                carriers[i].slot = s
            if hop == N_HOPS:
                sess.deliver(sum(not carriers[p].slot.is_lost for p in payload_pos))
            sess.say(receiver, K.ACK_RECEIPT, f"link{hop}")
            _check_hop(sess, hop, receiver, carriers, theta)
            if hop == 1:
                lock(ALICE)
            elif hop == 2:
                lock(BOB)
            elif hop == 3:
                unlock(CHARLIE)
            elif hop == 4:
                unlock(ALICE)
                for j, p in enumerate(payload_pos):
                    # iY rather than X: it commutes with Bob's remaining rotation
                    if a[j] and not carriers[p].slot.is_lost:
                        carriers[p].slot.apply(core.IY)
    except SessionAbort as exc:
        return sess.result("", "", exp_alice, exp_bob, reason=exc.reason)

    # Bob unlocks, encodes with X and reads out computationally
    hop = N_HOPS + 1
    unlock(BOB)
    outcomes: list[int | None] = []
    for j, p in enumerate(payload_pos):
        slot = carriers[p].slot
        if b[j] and not slot.is_lost:
            slot.apply(core.X)
        outcomes.append(measure_slot(slot, Basis.RECTILINEAR, rng))
    sess.say(BOB, K.OUTCOME_REVEAL, PAYLOAD, tuple(outcomes))
    if cfg.controller_approves:
        sess.say(CHARLIE, K.STATE_REVEAL, PAYLOAD, tuple(carriers[p].bit for p in payload_pos))

    alice = decode_five_stage(sess.log, a, None)
    bob = decode_five_stage(sess.log, b, outcomes)
    return sess.result(_render(alice, n), _render(bob, n), exp_alice, exp_bob)


def _check_hop(sess: Session, hop: int, checker: str, carriers: list[_Carrier],
               theta: dict[str, np.ndarray]) -> None:
    cfg = sess.cfg
    link = f"link{hop}"
    pos = [i for i, c in enumerate(carriers) if c.group == hop]
    sess.say(_POSITION_REVEALER[hop - 1], K.POSITIONS_REVEAL, link, tuple(pos))
    undo = np.zeros(len(pos))
    first = True
    for party in _active_parties(hop):
        angles = theta[party][pos]
        if party != checker:
            if first:
                angles = angles + cfg.rotation_reveal_offset  # tampering hook for tests
                first = False
            sess.say(party, K.ROTATION_REVEAL, link, tuple(float(x) for x in angles))
        undo += angles
    measured = []
    for i, u in zip(pos, undo):
        c = carriers[i]
        if c.slot.is_lost:
            measured.append(None)
            continue
        c.slot.apply(core.rotation(-u))
        measured.append((Basis.RECTILINEAR, c.slot.measure(Basis.RECTILINEAR, sess.rng)))
    sess.say(checker, K.OUTCOME_REVEAL, link, tuple(m[1] if m else None for m in measured))
    if checker != CHARLIE:
        sess.say(CHARLIE, K.STATE_REVEAL, link, tuple(carriers[i].bit for i in pos))
    prepared = [(Basis.RECTILINEAR, carriers[i].bit) for i in pos]
    sess.judge(link, checker, prepared, measured)


def decode_five_stage(log: ClassicalLog, own, outcomes=None) -> list[int | None] | None:
    """other = s XOR r XOR own; needs Charlie's final reveal of the initial bits."""
    s = log.find(sender=CHARLIE, kind=K.STATE_REVEAL, topic=PAYLOAD)
    if s is None:
        return None
    if outcomes is None:
        r = log.find(sender=BOB, kind=K.OUTCOME_REVEAL, topic=PAYLOAD)
        if r is None:
            return None
        outcomes = r.payload
    return [None if r is None else decode_xor(int(si), int(r), o)
            for si, r, o in zip(s.payload, outcomes, own)]


def _render(bits, n: int) -> str:
    return UNDECIDABLE * n if bits is None else bits_to_str(bits)
