import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cqdsim import analytic, core
from cqdsim.core import BELL_ORDER, Basis, BellOutcome, PauliCode, PureState
from cqdsim.errors import DimensionError, NotUnitaryError, QubitIndexError, SizeError

S2 = 1 / math.sqrt(2)


def random_state(seed, n):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return PureState.normalized(v)


def random_unitary(seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, r = np.linalg.qr(m)
    return q * (np.diag(r) / np.abs(np.diag(r)))


states = st.builds(random_state, st.integers(0, 2**32 - 1), st.integers(1, 5))
seeds = st.integers(0, 2**32 - 1)
angles = st.floats(-4 * math.pi, 4 * math.pi, allow_nan=False)


# -- examples -----------------------------------------------------------------

def test_zero_state():
    assert np.allclose(core.zero_state(1).amps, [1, 0])
    assert np.allclose(core.zero_state(2).amps, [1, 0, 0, 0])
    with pytest.raises(SizeError):
        core.zero_state(13)
    with pytest.raises(SizeError):
        core.zero_state(0)


def test_pure_state_rejects_bad_vectors():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        PureState(np.array([np.nan, 1.0]))
    with pytest.raises(SizeError):
        PureState(np.array([1.0, 0.0, 0.0]))


def test_apply_examples():
    assert np.allclose(core.apply_1q(core.zero_state(1), core.X, 0).amps, [0, 1])
    plus = PureState(core.PLUS_KET)
    out = core.apply_1q(plus, core.IY, 0)
    assert core.equal_up_to_phase(out, PureState(core.MINUS_KET))
    s = random_state(3, 2)
    back = core.apply_1q(core.apply_1q(s, core.rotation(math.pi / 4), 1), core.rotation(-math.pi / 4), 1)
    assert np.allclose(back.amps, s.amps, atol=1e-12)


def test_apply_errors():
    with pytest.raises(NotUnitaryError):
        core.apply_1q(core.zero_state(1), np.array([[1, 1], [0, 1]]), 0)
    with pytest.raises(QubitIndexError):
        core.apply_1q(core.zero_state(2), core.X, 2)


def test_qubit_zero_is_most_significant():
    s = core.apply_1q(core.zero_state(3), core.X, 0)
    assert s.amps[4] == 1


def test_measure_eigenstate_and_unbiased():
    rng = np.random.default_rng(7)
    h = PureState(core.H_KET)
    assert all(core.measure(h, 0, Basis.RECTILINEAR, rng)[0] == 0 for _ in range(50))
    n = 10_000
    ones = sum(core.measure(h, 0, Basis.DIAGONAL, rng)[0] for _ in range(n))
    assert abs(ones / n - 0.5) <= 3 * math.sqrt(0.25 / n)


def test_four_qubit_state_has_uniform_third_qubit():
    s = analytic.four_qubit_swap_state()
    p0, _ = core.project(s, 2, Basis.RECTILINEAR, 0)
    p1, _ = core.project(s, 2, Basis.RECTILINEAR, 1)
    assert p0 == pytest.approx(0.5, abs=1e-12)
    assert p1 == pytest.approx(0.5, abs=1e-12)


def test_bell_examples():
    rng = np.random.default_rng(0)
    psi = core.bell_state(BellOutcome.PSI_PLUS)
    assert np.allclose(psi.amps, np.array([1, 0, 0, 1]) * S2)
    assert core.measure_bell(psi, 0, 1, rng)[0] is BellOutcome.PSI_PLUS
    flipped = core.apply_1q(psi, core.X, 0)
    assert core.bell_probabilities(flipped, 0, 1)[BellOutcome.PHI_PLUS] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(QubitIndexError):
        core.measure_bell(psi, 1, 1, rng)


def test_bell_on_encoded_swap_state_gives_eighths():
    # (A1, 1) of the combined six-qubit state; the four outcomes share evenly
    s = analytic.combined_swap_state(0)
    probs = core.bell_probabilities(s, 0, 2)
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)
    for o1 in BELL_ORDER:
        p1, post = core.project_bell(s, 0, 2, o1)
        for o2 in BELL_ORDER:
            p2, _ = core.project_bell(post, 1, 3, o2)
            assert p1 * p2 in (pytest.approx(0.0, abs=1e-12), pytest.approx(0.125, abs=1e-12))


def test_project_examples():
    h = PureState(core.H_KET)
    p, post = core.project(h, 0, Basis.RECTILINEAR, 0)
    assert p == 1.0 and core.equal_up_to_phase(post, h)
    p, post = core.project(h, 0, Basis.RECTILINEAR, 1)
    assert p == 0.0 and post is None


def test_project_2prime_of_swap_resource():
    p, post = core.project(analytic.swap_resource(), 1, Basis.DIAGONAL, 0)
    assert p == pytest.approx(0.5, abs=1e-12)
    triple = core.remove_qubit(post, 1, Basis.DIAGONAL, 0)
    assert core.equal_up_to_phase(triple, analytic.phi1_state(), 1e-12)


def test_equal_up_to_phase_examples():
    h, v = PureState(core.H_KET), PureState(core.V_KET)
    assert core.equal_up_to_phase(h, PureState(-core.H_KET))
    assert not core.equal_up_to_phase(h, v)
    with pytest.raises(DimensionError):
        core.equal_up_to_phase(h, core.zero_state(2))


def test_kron_examples():
    hv = core.kron(PureState(core.H_KET), PureState(core.V_KET))
    assert np.allclose(hv.amps, [0, 1, 0, 0])
    psi = core.bell_state(BellOutcome.PSI_PLUS)
    assert np.allclose(core.kron(psi, core.zero_state(1)).amps, np.array([1, 0, 0, 0, 0, 0, 1, 0]) * S2)
    six = core.kron(psi, analytic.four_qubit_swap_state())
    assert six.n_qubits == 6
    assert core.equal_up_to_phase(six, analytic.combined_swap_state(0), 1e-12)
    with pytest.raises(SizeError):
        core.kron(core.zero_state(7), core.zero_state(6))


def test_from_label():
    s = PureState.from_label("H+")
    assert np.allclose(s.amps, [S2, S2, 0, 0])


# -- frozen literal oracles ----------------------------------------------------

def test_swap_resource_literal_amplitudes():
    c = 1 / (2 * math.sqrt(2))
    want = np.zeros(16)
    want[[0, 1, 8, 9, 6, 15]] = c
    want[[7, 14]] = -c
    assert np.allclose(analytic.swap_resource().amps, want, atol=1e-12)


def test_phi1_literal_amplitudes():
    c = 1 / (2 * math.sqrt(2))
    want = np.zeros(8)
    want[[0, 1, 4, 5, 2, 7]] = c
    want[[3, 6]] = -c
    assert np.allclose(analytic.phi1_state().amps, want, atol=1e-12)


def test_ghz_like_state_literal():
    want = np.zeros(8)
    want[[0, 6, 3, 5]] = 0.5
    assert np.allclose(analytic.ghz_like_state().amps, want)


# -- properties --------------------------------------------------------------

def test_pauli_matrices_unitary():
    for p in PauliCode:
        assert core.is_unitary(p.matrix, 1e-15)
    assert np.isrealobj(core.IY.real) and np.all(core.IY.imag == 0)


@given(states, seeds)
def test_gate_preserves_norm(s, seed):
    q = seed % s.n_qubits
    out = core.apply_1q(s, random_unitary(seed), q)
    assert abs(out.norm - 1.0) <= 1e-9


@given(states, seeds, st.sampled_from(list(Basis)))
def test_born_completeness(s, seed, basis):
    q = seed % s.n_qubits
    p0, _ = core.project(s, q, basis, 0)
    p1, _ = core.project(s, q, basis, 1)
    assert abs(p0 + p1 - 1.0) <= 1e-9


@given(st.builds(random_state, seeds, st.integers(2, 5)), seeds)
def test_bell_completeness(s, seed):
    q1 = seed % s.n_qubits
    q2 = (q1 + 1 + (seed >> 8) % (s.n_qubits - 1)) % s.n_qubits
    assert abs(sum(core.bell_probabilities(s, q1, q2).values()) - 1.0) <= 1e-9


@given(states, seeds, st.sampled_from(list(Basis)))
def test_measurement_idempotent(s, seed, basis):
    rng = np.random.default_rng(seed)
    q = seed % s.n_qubits
    bit, post = core.measure(s, q, basis, rng)
    for _ in range(3):
        again, post = core.measure(post, q, basis, rng)
        assert again == bit


@pytest.mark.parametrize("basis", list(Basis))
@pytest.mark.parametrize("bit", [0, 1])
def test_iy_flips_in_both_bases(basis, bit):
    s = core.apply_1q(PureState(basis.ket(bit)), core.IY, 0)
    assert core.project(s, 0, basis, 1 - bit)[0] == pytest.approx(1.0, abs=1e-12)


def test_x_flips_only_rectilinear():
    s = core.apply_1q(PureState(core.PLUS_KET), core.X, 0)
    assert core.project(s, 0, Basis.DIAGONAL, 0)[0] == pytest.approx(1.0)


@settings(max_examples=100)
@given(angles, angles)
def test_rotation_group(a, b):
    ra, rb = core.rotation(a), core.rotation(b)
    assert np.abs(ra @ rb - core.rotation(a + b)).max() <= 1e-12
    assert np.abs(ra @ rb - rb @ ra).max() <= 1e-12
    assert np.abs(ra @ core.rotation(-a) - core.I2).max() <= 1e-12


@given(angles)
def test_rotation_commutes_with_iy(a):
    r = core.rotation(a)
    assert np.abs(r @ core.IY - core.IY @ r).max() <= 1e-12


@pytest.mark.parametrize("label", list(BellOutcome))
def test_bell_convention_lock(label):
    probs = core.bell_probabilities(core.bell_state(label), 0, 1)
    assert probs[label] == pytest.approx(1.0, abs=1e-12)


def test_bell_parity_naming():
    assert BellOutcome.PSI_PLUS.ket[0] != 0 and BellOutcome.PSI_PLUS.ket[1] == 0
    assert BellOutcome.PHI_PLUS.ket[1] != 0 and BellOutcome.PHI_PLUS.ket[0] == 0
    assert [b.parity for b in BELL_ORDER] == [0, 0, 1, 1]
    g = np.array([b.ket for b in BELL_ORDER])
    assert np.allclose(g @ g.conj().T, np.eye(4))


@pytest.mark.parametrize("code,target", [
    (PauliCode.I, BellOutcome.PSI_PLUS), (PauliCode.X, BellOutcome.PHI_PLUS),
    (PauliCode.IY, BellOutcome.PHI_MINUS), (PauliCode.Z, BellOutcome.PSI_MINUS),
])
def test_dense_coding_map(code, target):
    s = core.apply_1q(core.bell_state(BellOutcome.PSI_PLUS), code.matrix, 0)
    assert abs(core.bell_probabilities(s, 0, 1)[target] - 1.0) <= 1e-12


@pytest.mark.parametrize("x,z", [(0, 0), (1, 0), (1, 1), (0, 1)])
def test_pauli_code_round_trip(x, z):
    assert PauliCode.from_code(x, z).code == (x, z)


@given(st.builds(random_state, seeds, st.integers(2, 4)), seeds)
def test_permute_round_trip(s, seed):
    order = list(np.random.default_rng(seed).permutation(s.n_qubits))
    inv = list(np.argsort(order))
    assert np.allclose(core.permute(core.permute(s, order), inv).amps, s.amps)


def test_project_bell_post_state():
    s = random_state(11, 3)
    p, post = core.project_bell(s, 0, 2, BellOutcome.PHI_MINUS)
    assert p > 0
    assert core.bell_probabilities(post, 0, 2)[BellOutcome.PHI_MINUS] == pytest.approx(1.0)
