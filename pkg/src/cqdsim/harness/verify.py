"""RNG-free analytic checks of the simulator against closed-form states and tables."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .. import analytic, core, optics
from ..core import BELL_ORDER, Basis, BellOutcome, PauliCode

TOL = 1e-9
OP_TOL = 1e-12


@dataclass
class Check:
    name: str
    passed: bool
    observed: str
    expected: str
    failures: list[str] = field(default_factory=list)

    def lines(self) -> list[str]:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: observed {self.observed}; expected {self.expected}"
        return [head] + [f"    {f}" for f in self.failures]


def swap_probability_table(convention: str = "cqd") -> dict[tuple[int, int, BellOutcome, BellOutcome, int], float]:
    """P(o1, o2, b | c, m) for the swapped state on (A1, A2, 1, 2, 3, 4).

    Charlie's qubit 4 and Bob's qubit 3 are read computationally; Alice's
    Bell measurements are on (A1, 1) and (A2, 2).
    """
    table = {}
    for m in (0, 1):
        state = analytic.combined_swap_state(m, convention)
        for c in (0, 1):
            pc, post_c = core.project(state, 5, Basis.RECTILINEAR, c)
            for o1 in BELL_ORDER:
                p1, post1 = core.project_bell(post_c, 0, 2, o1) if post_c is not None else (0.0, None)
                for o2 in BELL_ORDER:
                    p2, post2 = core.project_bell(post1, 1, 3, o2) if post1 is not None else (0.0, None)
                    for b in (0, 1):
                        pb = core.project(post2, 4, Basis.RECTILINEAR, b)[0] if post2 is not None else 0.0
                        table[(c, m, o1, o2, b)] = p1 * p2 * pb
    return table


def check_swap_table(convention: str = "cqd") -> Check:
    table = swap_probability_table(convention)
    failures = []
    nonzero = 0
    worst = 0.0
    for c in (0, 1):
        for m in (0, 1):
            expected = {(o1, o2, b) for o1, o2, b, _ in analytic.SWAP_BRANCHES[(c, m)]}
            for o1 in BELL_ORDER:
                for o2 in BELL_ORDER:
                    for b in (0, 1):
                        p = table[(c, m, o1, o2, b)]
                        want = 0.125 if (o1, o2, b) in expected else 0.0
                        dev = abs(p - want)
                        worst = max(worst, dev)
                        cell = f"c={c} m={m} ({o1.value},{o2.value}) b={b}"
                        if dev > TOL:
                            failures.append(f"{cell}: P={p:.12f}, expected {want:.12f}")
                        if p > TOL:
                            nonzero += 1
                            decoded = b ^ o1.parity ^ o2.parity ^ c
                            if decoded != m:
                                failures.append(f"{cell}: b^p^c={decoded} but m={m}")
    return Check("swap-decode table", not failures,
                 f"{nonzero} nonzero cells, max |P-expected| = {worst:.3e}",
                 "32 nonzero cells at 1/8 with m = b^p^c", failures)


def check_dense_coding() -> Check:
    want = {PauliCode.I: BellOutcome.PSI_PLUS, PauliCode.X: BellOutcome.PHI_PLUS,
            PauliCode.IY: BellOutcome.PHI_MINUS, PauliCode.Z: BellOutcome.PSI_MINUS}
    failures, seen = [], []
    for code, target in want.items():
        st = core.apply_1q(core.bell_state(BellOutcome.PSI_PLUS), code.matrix, 0)
        probs = core.bell_probabilities(st, 0, 1)
        seen.append(f"{code.value}->{max(probs, key=probs.get).value}")
        if abs(probs[target] - 1.0) > OP_TOL:
            failures.append(f"{code.value}: P({target.value}) = {probs[target]:.15f}")
    return Check("dense-coding bijection", not failures, ", ".join(seen),
                 "I->psi+, X->phi+, iY->phi-, Z->psi- with probability 1", failures)


def check_ghz_identity() -> Check:
    failures = []
    prob, resource = optics.fused_pairs_postselected()
    ov = abs(core.overlap(resource, analytic.post_pbs_state()))
    if abs(ov - 1.0) > TOL:
        failures.append(f"post-PBS overlap {ov:.12f}")
    target = analytic.phi1_state()
    obs = []
    for bit in (0, 1):
        p, post = core.project(resource, 1, Basis.DIAGONAL, bit)
        obs.append(f"P(2'={'+-'[bit]})={p:.6f}")
        if abs(p - 0.5) > TOL or post is None:
            failures.append(f"diagonal outcome {bit} on 2': P={p:.12f}")
            continue
        triple = core.remove_qubit(post, 1, Basis.DIAGONAL, bit)
        if bit:
            triple = core.apply_1q(triple, core.X, 0)
        f = abs(core.overlap(triple, target))
        obs.append(f"|<Phi1|out>|={f:.6f}")
        if not core.equal_up_to_phase(triple, target, TOL):
            failures.append(f"outcome {bit}: fidelity {f:.12f}")
    return Check("GHZ-like preparation identity", not failures, ", ".join(obs),
                 "each 2' outcome with P=1/2 leaves (|+>psi+ + |->phi+)/sqrt2", failures)


def check_pbs_probability() -> Check:
    prob, _ = optics.fused_pairs_postselected()
    ok = abs(prob - 0.5) <= TOL
    return Check("PBS coincidence probability", ok, f"{prob:.12f}", "0.500000000000",
                 [] if ok else [f"P={prob!r}"])


def check_iy_flip() -> Check:
    failures, obs = [], []
    for basis in Basis:
        for bit in (0, 1):
            st = core.apply_1q(core.PureState(basis.ket(bit)), core.IY, 0)
            p, _ = core.project(st, 0, basis, 1 - bit)
            obs.append(f"{basis.value}{bit}:{p:.6f}")
            if abs(p - 1.0) > TOL:
                failures.append(f"{basis.value} bit {bit}: P(flip)={p:.12f}")
    return Check("iY dual-basis flip", not failures, " ".join(obs), "flip probability 1 in both bases", failures)


def check_rotation_group() -> Check:
    grid = np.linspace(-2 * math.pi, 2 * math.pi, 17)
    worst = 0.0
    for a in grid:
        ra = core.rotation(a)
        worst = max(worst, float(np.abs(ra @ core.rotation(-a) - core.I2).max()))
        for b in grid:
            worst = max(worst, float(np.abs(ra @ core.rotation(b) - core.rotation(a + b)).max()))
            worst = max(worst, float(np.abs(ra @ core.rotation(b) - core.rotation(b) @ ra).max()))
    ok = worst <= OP_TOL
    return Check("rotation group identities", ok, f"max deviation {worst:.3e}",
                 f"<= {OP_TOL:.0e} over a 17x17 angle grid", [] if ok else ["composition law violated"])


def check_hwp() -> Check:
    m = optics.HWP_45.matrix
    dev_inv = float(np.abs(m @ m - core.I2).max())
    dev_h = float(np.abs(m @ core.H_KET - core.PLUS_KET).max())
    dev_v = float(np.abs(m @ core.V_KET - core.MINUS_KET).max())
    worst = max(dev_inv, dev_h, dev_v)
    ok = worst <= OP_TOL
    return Check("half-wave plate at 2theta=45deg", ok, f"max deviation {worst:.3e}",
                 "HWP^2 = I, H->+, V->-", [] if ok else ["waveplate identities violated"])


CHECKS: tuple[Callable[[], Check], ...] = (check_dense_coding, check_ghz_identity, check_pbs_probability,
                                           check_iy_flip, check_rotation_group, check_hwp)


def run_verify(convention: str = "cqd") -> tuple[bool, list[str]]:
    """Run every oracle; ``convention='textbook'`` injects a Bell-naming fault into the swap table."""
    results = [check_swap_table(convention)] + [f() for f in CHECKS]
    lines = []
    for r in results:
        lines.extend(r.lines())
    ok = all(r.passed for r in results)
    lines.append(f"verify: {sum(r.passed for r in results)}/{len(results)} checks passed")
    return ok, lines
