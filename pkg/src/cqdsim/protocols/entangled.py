"""Entangled-photon drivers: dense-coding dialogue on GHZ-like triples and the
entanglement-swapping direct communication scheme."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .. import core, optics
from ..channel import AnnouncementKind as K
from ..channel import ClassicalLog, PhotonSlot, Register
from ..core import Basis, BellOutcome, PauliCode
from . import checks
from .checks import Checkable
from .common import (ALICE, BOB, CHARLIE, UNDECIDABLE, ProtocolId, Session, SessionAbort,
                     SessionConfig, SessionResult, bits_to_str, build_decoy_string, random_bb84)
from ..errors import ConfigError

PAYLOAD = "payload"

# two message bits per Pauli, first bit most significant
BITS_TO_PAULI = {(0, 0): PauliCode.I, (0, 1): PauliCode.X, (1, 0): PauliCode.IY, (1, 1): PauliCode.Z}
PAULI_TO_BITS = {v: k for k, v in BITS_TO_PAULI.items()}


def _send_with_decoys(sess: Session, link: str, sender: str, receiver: str,
                      carriers: Sequence[PhotonSlot]) -> list[PhotonSlot]:
    """One checked hop: interleave fresh BB84 decoys, transmit, check, return the carriers."""
    rng = sess.rng
    k = sess.cfg.decoy.decoys_for(len(carriers))
    decoys = random_bb84(rng, k)
    total = len(carriers) + k
    ds = build_decoy_string(carriers, sess.cfg.decoy, rng, decoys=decoys,
                            permutation=[int(i) for i in rng.permutation(total)])
    received = sess.send(ds.slots)
    sess.say(receiver, K.ACK_RECEIPT, link)
    sess.say(sender, K.POSITIONS_REVEAL, link, tuple(ds.tags))
    n = len(carriers)
    dpos = ds.decoy_positions
    checks.check_random_bases(sess, link, receiver, sender, Checkable(
        dpos, [received[p] for p in dpos], [decoys[ds.permutation[p] - n] for p in dpos]))
    return [received[p] for p in ds.message_positions]


def _bell_measure(sess: Session, s1: PhotonSlot, s2: PhotonSlot) -> BellOutcome | None:
    """Bell analyzer on two photons of one register; ``None`` on loss or analyzer failure."""
    if s1.is_lost or s2.is_lost:
        return None
    if sess.cfg.bell_efficiency < 1.0 and sess.rng.random() >= sess.cfg.bell_efficiency:
        return None
    reg = s1.register
    assert reg is not None and reg is s2.register
    outcome, reg.state = core.measure_bell(reg.state, s1.qubit, s2.qubit, sess.rng)
    return outcome


def _diagonal_readout(sess: Session, slot: PhotonSlot) -> int:
    reg = slot.register
    assert reg is not None
    bit, reg.state = optics.diagonal_analyzer(reg.state, slot.qubit, sess.rng)
    return bit


def combine_codes(*codes: tuple[int, int]) -> tuple[int, int]:
    x = z = 0
    for cx, cz in codes:
        x ^= cx
        z ^= cz
    return x, z


def outcome_code(o: BellOutcome) -> tuple[int, int]:
    return o.parity, o.phase


# -- dense-coding dialogue ----------------------------------------------------------


def decode_dense(log: ClassicalLog, own: Sequence[int],
                 outcomes: Sequence[BellOutcome | None] | None = None) -> list[int | None] | None:
    """Recover the other party's bit pairs; needs Charlie's home-qubit outcomes."""
    ann = log.find(sender=CHARLIE, kind=K.OUTCOME_REVEAL, topic=PAYLOAD)
    if ann is None:
        return None
    c = ann.payload
    if outcomes is None:
        o_ann = log.find(sender=BOB, kind=K.OUTCOME_REVEAL, topic=PAYLOAD)
        if o_ann is None:
            return None
        outcomes = [None if v is None else BellOutcome(v) for v in o_ann.payload]
    out: list[int | None] = []
    for t, o in enumerate(outcomes):
        if o is None:
            out += [None, None]
            continue
        own_code = BITS_TO_PAULI[(own[2 * t], own[2 * t + 1])].code
        other = PauliCode.from_code(*combine_codes(outcome_code(o), own_code, (int(c[t]), 0)))
        out += list(PAULI_TO_BITS[other])
    return out


def run_dense_dialogue(cfg: SessionConfig, rng: np.random.Generator) -> SessionResult:
    pid = cfg.protocol
    dialogue = pid is ProtocolId.CQD_ENTANGLED
    a = cfg.alice_bits
    b = cfg.bob_bits if dialogue else (0,) * len(a)
    n = len(a)
    if n < 2 or n % 2:
        raise ConfigError("messages.alice", f"needs an even, nonzero number of bits, got {n}")
    if len(b) != n:
        raise ConfigError("messages.bob", f"needs {n} bits to match Alice's message, got {len(b)}")
    sess = Session(cfg, rng)
    exp_alice = bits_to_str(b) if dialogue else ""
    exp_bob = bits_to_str(a)
    triples = n // 2
    try:
        regs = [Register(optics.prepare_ghz_like(rng).state) for _ in range(triples)]
        sess.counts.carriers_sent += triples
        home = [PhotonSlot(r, 1) for r in regs]
        to_alice = _send_with_decoys(sess, "link1", CHARLIE, ALICE, [PhotonSlot(r, 0) for r in regs])
        to_bob = _send_with_decoys(sess, "link2", CHARLIE, BOB, [PhotonSlot(r, 2) for r in regs])
        for t, slot in enumerate(to_alice):
            if not slot.is_lost:
                slot.apply(BITS_TO_PAULI[(a[2 * t], a[2 * t + 1])].matrix)
        # fresh decoys from Alice; she alone reveals their positions and states
        at_bob = _send_with_decoys(sess, "link3", ALICE, BOB, to_alice)
    except SessionAbort as exc:
        return sess.result("", "", exp_alice, exp_bob, reason=exc.reason)

    outcomes: list[BellOutcome | None] = []
    for t in range(triples):
        if not to_bob[t].is_lost:
            to_bob[t].apply(BITS_TO_PAULI[(b[2 * t], b[2 * t + 1])].matrix)
        outcomes.append(_bell_measure(sess, at_bob[t], to_bob[t]))
    sess.deliver(sum(o is not None for o in outcomes))
    if dialogue:
        sess.say(BOB, K.OUTCOME_REVEAL, PAYLOAD, tuple(None if o is None else o.value for o in outcomes))
    c = [_diagonal_readout(sess, h) for h in home]
    if cfg.controller_approves:
        sess.say(CHARLIE, K.OUTCOME_REVEAL, PAYLOAD, tuple(c))

    bob = decode_dense(sess.log, b, outcomes)
    alice = decode_dense(sess.log, a) if dialogue else None
    return sess.result(_render(alice, n) if dialogue else "", _render(bob, n), exp_alice, exp_bob)


# -- entanglement swapping ------------------------------------------------------------


def swap_parity(o1: BellOutcome, o2: BellOutcome) -> int:
    return o1.parity ^ o2.parity


def decode_swap(log: ClassicalLog, bob_bits: Sequence[int | None]) -> list[int | None] | None:
    """m = b XOR p XOR c, with p from Alice's announced Bell pairs and c from Charlie."""
    c_ann = log.find(sender=CHARLIE, kind=K.OUTCOME_REVEAL, topic=PAYLOAD)
    p_ann = log.find(sender=ALICE, kind=K.OUTCOME_REVEAL, topic=PAYLOAD)
    if c_ann is None or p_ann is None:
        return None
    out: list[int | None] = []
    for b, pair, c in zip(bob_bits, p_ann.payload, c_ann.payload):
        if b is None or pair is None:
            out.append(None)
            continue
        p = swap_parity(BellOutcome(pair[0]), BellOutcome(pair[1]))
        out.append(b ^ p ^ int(c))
    return out


def run_swap(cfg: SessionConfig, rng: np.random.Generator) -> SessionResult:
    a = cfg.alice_bits
    n = len(a)
    if n < 1:
        raise ConfigError("messages.alice", "needs at least one bit")
    sess = Session(cfg, rng)
    exp_bob = bits_to_str(a)
    try:
        regs = []
        for _ in range(n):
            state = optics.prepare_swap_resource(rng).state  # (1, 2', 3', 4)
            regs.append(Register(optics.hwp(state, 2)))
        sess.counts.carriers_sent += n
        # Alice gets photons 1 and 4, Bob gets 3', Charlie keeps 2'
        alice_in = [PhotonSlot(r, q) for r in regs for q in (0, 3)]
        got = _send_with_decoys(sess, "link1", CHARLIE, ALICE, alice_in)
        at_bob = _send_with_decoys(sess, "link2", CHARLIE, BOB, [PhotonSlot(r, 2) for r in regs])
    except SessionAbort as exc:
        return sess.result("", "", "", exp_bob, reason=exc.reason)

    pairs: list[tuple[BellOutcome, BellOutcome] | None] = []
    for j, reg in enumerate(regs):
        p1, p4 = got[2 * j], got[2 * j + 1]
        base = reg.state.n_qubits
        encoded = core.bell_state(BellOutcome.PSI_PLUS)
        if a[j]:
            encoded = core.apply_1q(encoded, core.X, 0)
        reg.state = core.kron(reg.state, encoded)
        a1, a2 = PhotonSlot(reg, base), PhotonSlot(reg, base + 1)
        o1 = _bell_measure(sess, a1, p1)
        o2 = _bell_measure(sess, a2, p4) if o1 is not None else None
        pairs.append(None if o1 is None or o2 is None else (o1, o2))
    sess.say(ALICE, K.OUTCOME_REVEAL, PAYLOAD,
             tuple(None if p is None else (p[0].value, p[1].value) for p in pairs))
    bob_bits = [checks.measure_slot(s, Basis.RECTILINEAR, rng) for s in at_bob]
    sess.deliver(sum(1 for p, bb in zip(pairs, bob_bits) if p is not None and bb is not None))
    c = [_diagonal_readout(sess, PhotonSlot(r, 1)) for r in regs]
    if cfg.controller_approves:
        sess.say(CHARLIE, K.OUTCOME_REVEAL, PAYLOAD, tuple(c))
    return sess.result("", _render(decode_swap(sess.log, bob_bits), n), "", exp_bob)


def _render(bits, n: int) -> str:
    return UNDECIDABLE * n if bits is None else bits_to_str(bits)

