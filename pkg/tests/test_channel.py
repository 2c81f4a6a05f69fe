import math

import numpy as np
import pytest

from cqdsim import core
from cqdsim.channel import (Announcement, AnnouncementKind, BasisPolicy, ChannelModel, ClassicalLog,
                            EveKind, EveStrategy, PhotonSlot, Register, broadcast,
                            eve_intercept_resend, transmit)
from cqdsim.core import Basis, BellOutcome
from cqdsim.errors import ConfigError
from cqdsim.protocols.common import estimate_qber, random_bb84


def sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


def eve(fraction=1.0, policy=BasisPolicy.RANDOM):
    return EveStrategy(EveKind.INTERCEPT_RESEND, policy, fraction)


def test_identity_channel():
    rng = np.random.default_rng(0)
    slots = [PhotonSlot.prepare(Basis.DIAGONAL, 1) for _ in range(10)]
    before = [s.register.state for s in slots]
    out, log = transmit(slots, ChannelModel(), rng)
    assert log == []
    for s, b in zip(out, before):
        assert core.equal_up_to_phase(s.register.state, b, 1e-12)


def test_zero_parameter_slow_path_is_identity():
    # Eve configured but fraction 0 still takes the full per-carrier path
    rng = np.random.default_rng(0)
    ch = ChannelModel(0.0, 0.0, eve(0.0))
    slots = [PhotonSlot.prepare(*bb) for bb in random_bb84(rng, 20)]
    before = [s.register.state for s in slots]
    out, log = transmit(slots, ch, rng)
    assert log == []
    assert all(core.equal_up_to_phase(s.register.state, b, 1e-12) for s, b in zip(out, before))


def test_loss_fraction():
    rng = np.random.default_rng(1)
    n = 10_000
    out, _ = transmit([PhotonSlot.prepare(Basis.RECTILINEAR, 0) for _ in range(n)], ChannelModel(0.3), rng)
    lost = sum(s.is_lost for s in out)
    assert abs(lost / n - 0.3) <= 3 * sigma(0.3, n)


def test_lost_slots_stay_lost():
    out, _ = transmit([PhotonSlot.lost()], ChannelModel(0.0, 0.5, eve()), np.random.default_rng(0))
    assert out[0].is_lost


def _eve_qber(fraction, n, seed):
    rng = np.random.default_rng(seed)
    prepared = random_bb84(rng, n)
    slots = [PhotonSlot.prepare(b, bit) for b, bit in prepared]
    out, _ = transmit(slots, ChannelModel(eve=eve(fraction)), rng)
    measured = []
    for s in out:
        b = Basis.RECTILINEAR if rng.random() < 0.5 else Basis.DIAGONAL
        measured.append((b, s.measure(b, rng)))
    return estimate_qber(prepared, measured)


@pytest.mark.parametrize("f", [0.25, 0.5, 1.0])
def test_eve_qber_f_over_4(f):
    qber, sifted, _ = _eve_qber(f, 20_000, 17)
    assert abs(qber - f / 4) <= 3 * sigma(f / 4, sifted)


def test_eve_rectilinear_on_h_is_silent():
    rng = np.random.default_rng(0)
    for _ in range(20):
        slot, basis, bit = eve_intercept_resend(PhotonSlot.prepare(Basis.RECTILINEAR, 0),
                                                BasisPolicy.RECTILINEAR, rng)
        assert basis is Basis.RECTILINEAR and bit == 0
        assert slot.measure(Basis.RECTILINEAR, rng) == 0


def test_eve_rectilinear_on_plus_randomizes_diagonal():
    rng = np.random.default_rng(2)
    n = 4000
    errs = 0
    for _ in range(n):
        slot, _, _ = eve_intercept_resend(PhotonSlot.prepare(Basis.DIAGONAL, 0), BasisPolicy.RECTILINEAR, rng)
        assert core.project(slot.register.state, 0, Basis.RECTILINEAR, 0)[0] in (pytest.approx(0), pytest.approx(1))
        errs += slot.measure(Basis.DIAGONAL, rng)
    assert abs(errs / n - 0.5) <= 3 * sigma(0.5, n)


def test_eve_on_half_of_bell_pair():
    rng = np.random.default_rng(3)
    n = 4000
    hits = 0
    for _ in range(n):
        reg = Register(core.bell_state(BellOutcome.PSI_PLUS))
        eve_intercept_resend(PhotonSlot(reg, 0), BasisPolicy.RANDOM, rng)
        o, _ = core.measure_bell(reg.state, 0, 1, rng)
        hits += o is BellOutcome.PSI_PLUS
    assert abs(hits / n - 0.5) <= 3 * sigma(0.5, n)


def test_depolarizing_bell_distribution():
    rng = np.random.default_rng(4)
    n = 10_000
    counts = {o: 0 for o in BellOutcome}
    ch = ChannelModel(p_depol=1.0)
    for _ in range(n):
        reg = Register(core.bell_state(BellOutcome.PSI_PLUS))
        transmit([PhotonSlot(reg, 0)], ch, rng)
        o, _ = core.measure_bell(reg.state, 0, 1, rng)
        counts[o] += 1
    assert counts[BellOutcome.PSI_PLUS] == 0
    for o in (BellOutcome.PSI_MINUS, BellOutcome.PHI_PLUS, BellOutcome.PHI_MINUS):
        assert abs(counts[o] / n - 1 / 3) <= 3 * sigma(1 / 3, n)


def test_eve_log_records_measurements():
    rng = np.random.default_rng(5)
    slots = [PhotonSlot.prepare(Basis.RECTILINEAR, 1) for _ in range(8)]
    _, log = transmit(slots, ChannelModel(eve=eve(1.0, BasisPolicy.RECTILINEAR)), rng)
    assert [r.position for r in log] == list(range(8))
    assert all(r.bit == 1 and r.basis is Basis.RECTILINEAR for r in log)


@pytest.mark.parametrize("kwargs", [{"p_loss": -0.1}, {"p_loss": 1.5}, {"p_depol": 2.0}])
def test_channel_validation(kwargs):
    with pytest.raises(ConfigError):
        ChannelModel(**kwargs)
    with pytest.raises(ConfigError):
        EveStrategy(fraction=1.1)


def test_broadcast_append_only():
    log = ClassicalLog([])
    a = Announcement("alice", AnnouncementKind.BASIS_REVEAL, "link1", ("R", "D"))
    n0 = len(log)
    broadcast(log, a)
    assert len(log) == n0 + 1
    assert log.entries[-1].payload == ("R", "D")
    broadcast(log, Announcement("bob", AnnouncementKind.ACK_RECEIPT, "link1"))
    assert len(log) == n0 + 2
    assert log.view() == log.entries
    assert log.find(sender="alice", kind=AnnouncementKind.BASIS_REVEAL).payload == ("R", "D")
    assert log.find(sender="carol") is None


def test_log_without_and_json():
    log = ClassicalLog()
    log.broadcast(Announcement("charlie", AnnouncementKind.STATE_REVEAL, "payload", (0, 1)))
    log.broadcast(Announcement("bob", AnnouncementKind.OUTCOME_REVEAL, "payload", (1, None)))
    trimmed = log.without(lambda a: a.sender == "charlie")
    assert len(trimmed) == 1 and len(log) == 2
    assert log.to_json() == ClassicalLog(log.entries).to_json()
    assert '"payload":[1,null]' in log.to_json()
