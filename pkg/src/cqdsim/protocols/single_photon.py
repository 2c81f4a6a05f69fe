"""Single-photon relay protocols: controlled dialogue and its reductions.

All of them share one skeleton. A preparer sends BB84 carriers (plus decoys)
to a middle party, who checks the link, encodes with I/iY and forwards to a
final party, who checks again, optionally encodes, and measures in the
preparation bases. What differs is who plays which role, who encodes and
what is announced at the end; :class:`RelayRoles` captures that.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import core
from ..channel import AnnouncementKind as K
from ..channel import ClassicalLog, PhotonSlot
from ..core import Basis
from ..optics import RoutingDecision, bs_route
from . import checks
from .checks import Checkable, measure_slot
from .common import (ALICE, BB84, BOB, CHARLIE, UNDECIDABLE, DecoyMode, ProtocolId, Session,
                     SessionAbort, SessionConfig, SessionResult, bits_to_str,
                     build_decoy_string, decode_xor, decoy_tag, message_tag,
                     random_basis, xor_bits)
from ..errors import ConfigError

PAYLOAD = "payload"


@dataclass(frozen=True)
class RelayRoles:
    preparer: str
    middle: str | None
    final: str
    middle_bits: str | None = None  # whose message the middle party encodes
    final_bits: str | None = None
    announce_result: bool = False  # final party publishes its outcomes
    reveal_states: bool = False  # preparer publishes the initial payload bits
    controlled: bool = False  # preparer's final announcements need controller approval
    permutation_only: bool = False

    @property
    def links(self) -> int:
        return 1 if self.middle is None else 2


ROLES: dict[ProtocolId, RelayRoles] = {
    ProtocolId.CQD_SINGLE: RelayRoles(CHARLIE, ALICE, BOB, ALICE, BOB, True, True, True),
    ProtocolId.CDSQC_SINGLE: RelayRoles(CHARLIE, ALICE, BOB, ALICE, None, False, True, True),
    ProtocolId.QD_SINGLE: RelayRoles(ALICE, BOB, ALICE, BOB, ALICE, True, True),
    ProtocolId.QSDC: RelayRoles(BOB, ALICE, BOB, ALICE, None),
    ProtocolId.QKA: RelayRoles(BOB, ALICE, BOB, ALICE, None),
    ProtocolId.DSQC: RelayRoles(ALICE, None, BOB, permutation_only=True),
}


@dataclass
class _Carriers:
    slots: list[PhotonSlot]
    states: list[BB84]


def _bits_of(cfg: SessionConfig, who: str | None) -> tuple[int, ...] | None:
    if who is None:
        return None
    return cfg.alice_bits if who == ALICE else cfg.bob_bits


def _encode_iy(slots: Sequence[PhotonSlot], bits: Sequence[int]) -> None:
    for slot, bit in zip(slots, bits):
        if bit and not slot.is_lost:
            slot.apply(core.IY)


def _first_hop_permutation(sess: Session, roles: RelayRoles, payload: _Carriers,
                           k: int) -> tuple[_Carriers, Checkable]:
    receiver = roles.middle or roles.final
    n = len(payload.slots)
    ds = build_decoy_string(payload.slots, sess.cfg.decoy, sess.rng, n_decoys=k * roles.links)
    received = sess.send(ds.slots)
    if roles.links == 1:
        sess.deliver(sum(not received[p].is_lost for p in ds.message_positions))
    sess.say(receiver, K.ACK_RECEIPT, "link1")
    sess.say(roles.preparer, K.POSITIONS_REVEAL, "link1", tuple(ds.tags))
    dpos = ds.decoy_positions
    decoys = Checkable(dpos, [received[p] for p in dpos],
                       [ds.decoy_states[ds.permutation[p] - n] for p in dpos])
    if roles.links == 2:
        checked, rest = checks.split_check(sess, decoys, k)
    else:
        checked, rest = decoys, Checkable([], [], [])
    checks.check_random_bases(sess, "link1", receiver, roles.preparer, checked)
    arrived = _Carriers([received[p] for p in ds.message_positions], payload.states)
    return arrived, rest


def _first_hop_bs(sess: Session, roles: RelayRoles, n: int, k: int) -> tuple[_Carriers, Checkable]:
    """Receiver's beamsplitter picks the check half; it then assigns payload among the rest."""
    rng = sess.rng
    receiver = roles.middle or roles.final
    total = 2 * (n + k)
    states = [(random_basis(rng), int(rng.integers(2))) for _ in range(total)]
    received = sess.send([PhotonSlot.prepare(b, bit) for b, bit in states])
    sess.say(receiver, K.ACK_RECEIPT, "link1")
    reflect = [bs_route(rng) is RoutingDecision.REFLECT for _ in range(total)]
    check_pos = [i for i in range(total) if reflect[i]]
    kept = [i for i in range(total) if not reflect[i]]
    checks.check_random_bases(sess, "link1", receiver, roles.preparer, Checkable(
        check_pos, [received[i] for i in check_pos], [states[i] for i in check_pos]))
    if len(kept) < n:
        sess.abort(receiver, "insufficient-detections")
    order = [kept[int(i)] for i in rng.permutation(len(kept))]
    payload_pos, rest_pos = order[:n], sorted(order[n:])
    tags = ["c"] * total
    for j, p in enumerate(payload_pos):
        tags[p] = message_tag(j)
    for j, p in enumerate(rest_pos):
        tags[p] = decoy_tag(j)
    sess.say(receiver, K.POSITIONS_REVEAL, "link1", tuple(tags))
    arrived = _Carriers([received[p] for p in payload_pos], [states[p] for p in payload_pos])
    rest = Checkable(rest_pos, [received[p] for p in rest_pos], [states[p] for p in rest_pos])
    return arrived, rest


def _second_hop(sess: Session, roles: RelayRoles, payload: _Carriers, rest: Checkable) -> _Carriers:
    mid, fin = roles.middle, roles.final
    assert mid is not None
    ds = build_decoy_string(payload.slots, sess.cfg.decoy, sess.rng,
                            decoys=rest.states, decoy_slots=rest.slots)
    received = sess.send(ds.slots)
    sess.deliver(sum(not received[p].is_lost for p in ds.message_positions))
    sess.say(fin, K.ACK_RECEIPT, "link2")
    sess.say(mid, K.POSITIONS_REVEAL, "link2", tuple(ds.tags))
    n = len(payload.slots)
    dpos = ds.decoy_positions
    decoys = Checkable(dpos, [received[p] for p in dpos],
                       [rest.states[ds.permutation[p] - n] for p in dpos])
    if fin == roles.preparer:
        checks.check_own_decoys(sess, "link2", fin, decoys)
    else:
        checks.check_revealed_bases(sess, "link2", fin, roles.preparer, decoys)
    return _Carriers([received[p] for p in ds.message_positions], payload.states)


@dataclass
class RelayOutcome:
    """Private data left with the parties once the quantum part is over."""

    preparer_states: list[BB84]
    final_outcomes: list[int | None]


def run_relay(sess: Session, roles: RelayRoles, n: int,
              payload_bits: Sequence[int] | None = None) -> RelayOutcome:
    cfg, rng = sess.cfg, sess.rng
    plan = cfg.decoy
    k = plan.decoys_for(n)
    use_bs = plan.mode is DecoyMode.BS_ROUTING and not roles.permutation_only
    if use_bs:
        payload, rest = _first_hop_bs(sess, roles, n, k)
    else:
        if payload_bits is None:
            payload_bits = [int(rng.integers(2)) for _ in range(n)]
        states = [(random_basis(rng), int(b)) for b in payload_bits]
        payload = _Carriers([PhotonSlot.prepare(b, bit) for b, bit in states], states)
        payload, rest = _first_hop_permutation(sess, roles, payload, k)
    sess.counts.carriers_sent += n

    if roles.middle is not None:
        mid_bits = _bits_of(cfg, roles.middle_bits)
        if mid_bits is not None:
            _encode_iy(payload.slots, mid_bits)
        payload = _second_hop(sess, roles, payload, rest)

    fin_bits = _bits_of(cfg, roles.final_bits)
    if fin_bits is not None:
        _encode_iy(payload.slots, fin_bits)

    approved = cfg.controller_approves or not roles.controlled
    if roles.final == roles.preparer:
        bases: list[Basis] | None = [b for b, _ in payload.states]
    elif approved:
        bases = [b for b, _ in payload.states]
        sess.say(roles.preparer, K.BASIS_REVEAL, PAYLOAD, tuple(b.value for b in bases))
    else:
        bases = None
    read_bases = bases or [Basis.RECTILINEAR] * n
    outcomes = [measure_slot(s, b, rng) for s, b in zip(payload.slots, read_bases)]
    if roles.announce_result:
        sess.say(roles.final, K.OUTCOME_REVEAL, PAYLOAD, tuple(outcomes))
    if roles.reveal_states and approved:
        sess.say(roles.preparer, K.STATE_REVEAL, PAYLOAD, tuple(s for _, s in payload.states))
    return RelayOutcome(list(payload.states), outcomes)


# -- decoders: pure functions of the public log and the decoder's private data --------


def _public(log: ClassicalLog, sender: str, kind: K, topic: str = PAYLOAD) -> tuple | None:
    a = log.find(sender=sender, kind=kind, topic=topic)
    return None if a is None else a.payload


def _xor_decode(s: Sequence[int] | None, r: Sequence[int | None] | None,
                own: Sequence[int], n: int) -> list[int | None] | None:
    if s is None or r is None:
        return None
    return [None if r[j] is None else decode_xor(int(s[j]), int(r[j]), own[j]) for j in range(n)]


def decode_cqd_alice(log: ClassicalLog, own: Sequence[int]) -> list[int | None] | None:
    """Alice recovers Bob's bits from Charlie's state reveal and Bob's outcomes."""
    return _xor_decode(_public(log, CHARLIE, K.STATE_REVEAL), _public(log, BOB, K.OUTCOME_REVEAL),
                       own, len(own))


def decode_cqd_bob(log: ClassicalLog, own: Sequence[int],
                   outcomes: Sequence[int | None]) -> list[int | None] | None:
    return _xor_decode(_public(log, CHARLIE, K.STATE_REVEAL), outcomes, own, len(own))


def decode_cdsqc_bob(log: ClassicalLog, outcomes: Sequence[int | None]) -> list[int | None] | None:
    n = len(outcomes)
    return _xor_decode(_public(log, CHARLIE, K.STATE_REVEAL), outcomes, [0] * n, n)


def decode_qd_bob(log: ClassicalLog, own: Sequence[int]) -> list[int | None]:
    out = _xor_decode(_public(log, ALICE, K.STATE_REVEAL), _public(log, ALICE, K.OUTCOME_REVEAL),
                      own, len(own))
    assert out is not None, "Alice's announcements are part of every completed dialogue"
    return out


def decode_private(states: Sequence[BB84], outcomes: Sequence[int | None],
                   own: Sequence[int]) -> list[int | None]:
    """Decoder that holds both the preparation and the measurement record."""
    return [None if r is None else decode_xor(s, r, o) for (_, s), r, o in zip(states, outcomes, own)]


def decode_dsqc_bob(log: ClassicalLog, outcomes: Sequence[int | None]) -> list[int | None] | None:
    # the measurement was only meaningful in the bases Alice announced
    if _public(log, ALICE, K.BASIS_REVEAL) is None:
        return None
    return list(outcomes)


def _render(bits: list[int | None] | None, n: int) -> str:
    if bits is None:
        return UNDECIDABLE * n
    return bits_to_str(bits)


def _check_lengths(cfg: SessionConfig, need_bob: bool) -> int:
    n = len(cfg.alice_bits)
    if n < 1:
        raise ConfigError("messages.alice", "needs at least one bit")
    if need_bob and len(cfg.bob_bits) != n:
        raise ConfigError("messages.bob", f"needs {n} bits to match Alice's message, got {len(cfg.bob_bits)}")
    return n


def run_single_photon(cfg: SessionConfig, rng: np.random.Generator) -> SessionResult:
    pid = cfg.protocol
    roles = ROLES[pid]
    need_bob = pid in (ProtocolId.CQD_SINGLE, ProtocolId.QD_SINGLE, ProtocolId.QKA)
    n = _check_lengths(cfg, need_bob)
    a, b = cfg.alice_bits, cfg.bob_bits
    sess = Session(cfg, rng)
    exp_alice, exp_bob = "", bits_to_str(a)
    if pid in (ProtocolId.CQD_SINGLE, ProtocolId.QD_SINGLE):
        exp_alice = bits_to_str(b)
    elif pid is ProtocolId.QKA:
        exp_alice = exp_bob = bits_to_str(xor_bits(a, b))
    try:
        out = run_relay(sess, roles, n, payload_bits=a if pid is ProtocolId.DSQC else None)
    except SessionAbort as exc:
        return sess.result("", "", exp_alice, exp_bob, reason=exc.reason)

    log = sess.log
    r = out.final_outcomes
    if pid is ProtocolId.CQD_SINGLE:
        alice = _render(decode_cqd_alice(log, a), n)
        bob = _render(decode_cqd_bob(log, b, r), n)
    elif pid is ProtocolId.CDSQC_SINGLE:
        alice, bob = "", _render(decode_cdsqc_bob(log, r), n)
    elif pid is ProtocolId.QD_SINGLE:
        alice = _render(decode_private(out.preparer_states, r, a), n)
        bob = _render(decode_qd_bob(log, b), n)
    elif pid is ProtocolId.QSDC:
        alice, bob = "", _render(decode_private(out.preparer_states, r, [0] * n), n)
    elif pid is ProtocolId.QKA:
        sess.say(BOB, K.STATE_REVEAL, "raw-key", tuple(b))
        alice = _render(decode_qka_alice(log, a), n)
        got = decode_private(out.preparer_states, r, [0] * n)
        bob = _render([None if x is None else x ^ y for x, y in zip(got, b)], n)
    else:  # DSQC
        alice, bob = "", _render(decode_dsqc_bob(log, r), n)
    return sess.result(alice, bob, exp_alice, exp_bob)


def decode_qka_alice(log: ClassicalLog, own_raw_key: Sequence[int]) -> list[int | None] | None:
    kb = _public(log, BOB, K.STATE_REVEAL, "raw-key")
    if kb is None:
        return None
    return [x ^ int(y) for x, y in zip(own_raw_key, kb)]


def run_qkd_decoy(cfg: SessionConfig, rng: np.random.Generator) -> SessionResult:
    """Prepare-and-measure key distribution: one hop, BS split into check and key halves.

    Alice is the sender and Bob the receiver; ``alice_bits`` are the sender's raw bits.
    """
    n = len(cfg.alice_bits)
    if n < 1:
        raise ConfigError("messages.alice", "needs at least one bit")
    sess = Session(cfg, rng)
    states = [(random_basis(rng), b) for b in cfg.alice_bits]
    try:
        received = sess.send([PhotonSlot.prepare(b, bit) for b, bit in states])
        sess.counts.carriers_sent += n
        sess.say(BOB, K.ACK_RECEIPT, "link1")
        measured: list[BB84 | None] = []
        route: list[RoutingDecision] = []
        for slot in received:
            route.append(bs_route(rng))
            basis = random_basis(rng)
            bit = measure_slot(slot, basis, rng)
            measured.append(None if bit is None else (basis, bit))
        sess.deliver(sum(m is not None for m in measured))
        check = [i for i in range(n) if route[i] is RoutingDecision.REFLECT]
        key = [i for i in range(n) if route[i] is RoutingDecision.TRANSMIT]
        sess.say(BOB, K.OUTCOME_REVEAL, "link1", tuple(
            (i, measured[i][0].value, measured[i][1]) for i in check if measured[i] is not None))
        sess.say(ALICE, K.STATE_REVEAL, "link1", tuple((i, states[i][0].value, states[i][1]) for i in check))
        sess.judge("link1", ALICE, [states[i] for i in check], [measured[i] for i in check])
        # sifting of the key half: Bob names his bases, Alice answers with hers
        sess.say(BOB, K.BASIS_REVEAL, "sift", tuple(
            (i, measured[i][0].value) for i in key if measured[i] is not None))
        sess.say(ALICE, K.BASIS_REVEAL, "sift", tuple((i, states[i][0].value) for i in key))
    except SessionAbort as exc:
        return sess.result("", "", "", "", reason=exc.reason)
    sifted = [i for i in key if measured[i] is not None and measured[i][0] is states[i][0]]
    alice_key = bits_to_str([states[i][1] for i in sifted])
    bob_key = bits_to_str([measured[i][1] for i in sifted])  # type: ignore[index]
    return sess.result(alice_key, bob_key, alice_key, alice_key)
