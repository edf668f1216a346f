import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpseries import frequency
from qpseries.errors import BudgetExceeded, ResonanceError

PHI = (1 + np.sqrt(5.0)) / 2


def brute_min(omega, radius, support=None):
    d = len(omega)
    best = None
    for nu in itertools.product(range(-radius, radius + 1), repeat=d):
        n = sum(abs(x) for x in nu)
        if n == 0 or n > radius:
            continue
        if support is not None and nu not in support:
            continue
        v = abs(float(np.dot(omega, nu)))
        best = v if best is None else min(best, v)
    return best


def test_ball_size_matches_enumeration():
    for d, r in [(1, 5), (2, 4), (3, 3)]:
        assert frequency.ball_size(d, r) == frequency.lattice_ball(d, r).shape[0] + 1


def test_alpha_d1():
    assert frequency.alpha_n([1.0], 3) == 1.0
    for n in range(5):
        assert frequency.alpha_n([2.5], n) == 2.5


def test_alpha_golden_mean_examples():
    assert abs(frequency.alpha_n([1.0, PHI], 1) - (PHI - 1)) < 1e-15
    val, nu = frequency.lattice_minimum([1.0, PHI], 8)
    assert abs(val - PHI**-4) < 1e-14
    assert abs(abs(nu[0]) - 5) == 0 and abs(nu[1]) == 3


def test_golden_mean_fibonacci_law():
    # the minimizers are consecutive Fibonacci pairs, values are powers of 1/phi
    for n in range(0, 6):
        val, nu = frequency.lattice_minimum([1.0, PHI], 2**n)
        m = round(-np.log(val) / np.log(PHI))
        assert abs(val - PHI**-m) < 1e-12
        assert val == pytest.approx(brute_min([1.0, PHI], 2**n), abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 3.0), st.integers(0, 3))
def test_alpha_matches_brute_force(w1, w2, n):
    omega = [w1, w2]
    try:
        got = frequency.alpha_n(omega, n)
    except ResonanceError:
        return
    assert got == pytest.approx(brute_min(omega, 2**n), abs=1e-14)


def test_beta_support_and_empty():
    assert frequency.beta_n([1.0], {(1,), (-1,)}, 2) == 1.0
    sup = {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert frequency.beta_n([1.0, PHI], sup, 4) == 1.0
    assert frequency.beta_n([1.0, PHI], set(), 4) is None
    assert frequency.beta_n([1.0, PHI], {(9, 9)}, 1) is None


def test_resonance_and_budget():
    with pytest.raises(ResonanceError):
        frequency.alpha_n([1.0, 2.0], 2)
    with pytest.raises(BudgetExceeded):
        frequency.alpha_n([1.0, PHI, np.sqrt(2)], 10, budget=1000)


def test_diagnose_invariants():
    sup = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    rep = frequency.diagnose([1.0, PHI], sup, 4)
    assert all(x >= y for x, y in zip(rep.alpha, rep.alpha[1:]))
    assert all(b >= a for a, b in zip(rep.alpha, rep.beta) if b is not None)
    assert rep.epsilon_seq == [0.0] * 5
    ref = sum(2.0**-n * np.log(1 / frequency.alpha_n([1.0, PHI], n)) for n in range(5))
    assert rep.bryuno_partial == pytest.approx(ref, rel=1e-14)
    assert set(rep.as_dict()) >= {"alpha", "beta", "epsilon_seq", "bryuno_partial"}


def test_diagnose_d1():
    rep = frequency.diagnose([1.0], [(1,), (-1,)], 5)
    assert rep.epsilon_seq == [0.0] * 6
    assert rep.bryuno_partial == 0.0
