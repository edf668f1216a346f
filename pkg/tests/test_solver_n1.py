import itertools

import numpy as np
import pytest

from qpseries import solver_n1
from qpseries.errors import EnvelopeViolation, SolverError
from qpseries.fourier import FourierSeries, convolve, directional_derivative
from qpseries.model import shifted_g_tail

from conftest import make_e1, make_e2, make_e3

EPS = 0.05


def test_first_order_closed_form():
    for eps in (0.05, 0.1):
        u1 = solver_n1.first_order(make_e1(eps))
        assert u1[(1,)] == pytest.approx(-0.5j * eps, rel=1e-15)
        assert u1[(-1,)] == pytest.approx(0.5j * eps, rel=1e-15)
        assert (0,) not in u1


def test_second_order_is_empty(e1):
    sol = solver_n1.solve(e1, 4)
    assert len(sol.order(2)) == 0
    assert len(sol.order(4)) == 0


def test_third_order_closed_forms(e1):
    u3 = solver_n1.solve(e1, 3).order(3)
    assert u3[(0,)] == pytest.approx(-EPS**2 / 2, rel=1e-13)
    ref = EPS**3 / (4 * (2j - 3 * EPS))
    assert abs(u3[(2,)] - ref) <= 1e-13 * abs(ref)


def test_k1_equals_first_order(e2):
    sol = solver_n1.solve(e2, 1)
    assert (sol.order(1) - solver_n1.first_order(e2)).sup_coeff() == 0


def test_parity_and_support_growth(e1, e2):
    # u^(k) is a product of (k+1)/2 first-order factors: even k empty, nu = (k+1)/2 mod 2
    sol = solver_n1.solve(e1, 7)
    for k in range(1, 8):
        if k % 2 == 0:
            assert len(sol.order(k)) == 0
        for nu, _ in sol.order(k).items():
            assert (nu[0] - (k + 1) // 2) % 2 == 0
    # supp u^(k) lies in the k-fold sumset of supp f
    sol2 = solver_n1.solve(e2, 5)
    supp = [nu for nu, _ in e2.f_tilde.items()]
    sumset = {(0, 0)}
    for k in range(1, 6):
        sumset = {tuple(a + b for a, b in zip(s, m)) for s in sumset for m in supp}
        assert {nu for nu, _ in sol2.order(k).items()} <= sumset | _smaller(supp, k)


def _smaller(supp, k):
    out = set()
    for j in range(1, k):
        for combo in itertools.product(supp, repeat=j):
            out.add(tuple(map(sum, zip(*combo))))
    return out


def test_reality(e2):
    sol = solver_n1.solve(e2, 6)
    for u in sol.orders:
        assert u.conjugate_defect() <= 1e-13


def _mu_mul(A, B, K, dim):
    out = [FourierSeries.zero(dim) for _ in range(K + 1)]
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            if i + j <= K and a and b:
                out[i + j] = out[i + j] + convolve(a, b)
    return out


def _order_residuals(problem, sol, K):
    """mu^j coefficients of eps U'' + U' + eps a U + mu eps G(U) - mu eps f~."""
    dim, eps, om = problem.dim, problem.epsilon, problem.omega
    a = problem.nonlinearity.a
    U = [FourierSeries.zero(dim)] + list(sol.orders[:K])
    tail = shifted_g_tail(problem.nonlinearity)
    G = [FourierSeries.zero(dim) for _ in range(K + 1)]
    Up = [FourierSeries.constant(1.0, dim)] + [FourierSeries.zero(dim)] * K
    for p in range(1, len(tail)):
        Up = _mu_mul(Up, U, K, dim)
        if tail[p]:
            G = [g + x.scale(tail[p]) for g, x in zip(G, Up)]
    out = []
    for j in range(1, K + 1):
        u = U[j]
        r = (directional_derivative(u, om, 2).scale(eps) + directional_derivative(u, om, 1)
             + u.scale(eps * a) + G[j - 1].scale(eps))
        if j == 1:
            r = r - problem.f_tilde.scale(eps)
        out.append(r.sup_coeff())
    return out


@pytest.mark.parametrize("factory", [make_e1, make_e2])
def test_order_by_order_residual(factory):
    p = factory(EPS)
    K = 7
    sol = solver_n1.solve(p, K)
    scale = max(u.sup_coeff() for u in sol.orders)
    assert max(_order_residuals(p, sol, K)) <= 1e-11 * scale


def test_generic_problem_order_residual():
    f = {(1, 0): 0.3 - 0.2j, (-1, 0): 0.3 + 0.2j, (1, 1): 0.1, (-1, -1): 0.1, (0, 0): 0.25}
    from qpseries.model import Problem
    # g(x) = 0.25 + 2(x - 0.5) - (x-0.5)^2 + 0.7 (x-0.5)^3 written in x
    from numpy.polynomial import polynomial as P
    g = P.polyadd([0.25], P.polyadd(P.polymul([2.0], [-0.5, 1]),
                  P.polyadd(P.polymul([-1.0], P.polypow([-0.5, 1], 2)),
                            P.polymul([0.7], P.polypow([-0.5, 1], 3)))))
    p = Problem.build([1.0, np.sqrt(3.0)], f, g, c0=0.5, epsilon=0.08)
    sol = solver_n1.solve(p, 6)
    scale = max(u.sup_coeff() for u in sol.orders)
    assert max(_order_residuals(p, sol, 6)) <= 1e-11 * scale


def test_epsilon_smoothness_finite_difference():
    # d/deps u^(1)_1 = -i/2 exactly; higher orders: Richardson consistency
    def coeff(eps, k, nu):
        return solver_n1.solve(make_e1(eps), k).order(k)[nu]

    h = 1e-4
    d = (coeff(EPS + h, 1, (1,)) - coeff(EPS - h, 1, (1,))) / (2 * h)
    assert abs(d + 0.5j) < 1e-10
    d3 = (coeff(EPS + h, 3, (0,)) - coeff(EPS - h, 3, (0,))) / (2 * h)
    assert abs(d3 + EPS) < 1e-10
    for k, nu in [(3, (2,)), (5, (1,)), (5, (3,)), (6, (0,))]:
        dh = (coeff(EPS + h, k, nu) - coeff(EPS - h, k, nu)) / (2 * h)
        dh2 = (coeff(EPS + h / 2, k, nu) - coeff(EPS - h / 2, k, nu)) / h
        assert abs(dh - dh2) <= 1e-5 * max(abs(dh2), 1e-12) + 1e-14


def test_propagator_lower_bound_grid():
    s = np.round(np.arange(-1000, 1001) * 0.01, 2)
    assert solver_n1.propagator_violations([1e-3, 1e-2, 0.05, 0.1], s, 1.0) == 0


def test_mu_radius(e1):
    sol = solver_n1.solve(e1, 10)
    assert sol.mu_radius_estimate > 1 and not sol.radius_warning


def test_radius_warning_at_large_eps():
    with pytest.warns(RuntimeWarning):
        sol = solver_n1.solve(make_e1(3.0).__class__.build([1.0], {(1,): 20.0, (-1,): 20.0},
                                                           [0, 1, 1], 0.0, 3.0), 8)
    assert sol.radius_warning


def test_envelope(e1, e2):
    for p in (e1, e2):
        env = solver_n1.check_envelope(solver_n1.solve(p, 6), p)
        assert env.max_scaling_ratio <= 1.2
        sol = solver_n1.solve(p, 6)
        for k, u in enumerate(sol.orders, start=1):
            for nu, c in u.items():
                assert abs(c) <= env.bound(k, nu, p.epsilon) * (1 + 1e-9)


def test_envelope_exact_exponents(e1):
    half = solver_n1.solve(e1.with_epsilon(EPS / 2), 3)
    full = solver_n1.solve(e1, 3)
    r = solver_n1.scaling_ratios(full.orders, half.orders, solver_n1.DecayEnvelope.exponent_law)
    assert r[1] == pytest.approx(1.0, rel=1e-14)
    assert r[2] == 0.0
    assert abs(half.order(3)[(0,)] / full.order(3)[(0,)] - 0.25) < 1e-15


def test_envelope_detects_wrong_scaling(e1):
    sol = solver_n1.solve(e1, 5)
    sol.orders = [u.scale(0.5) for u in sol.orders]
    with pytest.raises(EnvelopeViolation):
        solver_n1.check_envelope(sol, e1)


def test_rejects_degenerate(e3):
    with pytest.raises(SolverError):
        solver_n1.solve(e3, 3)
    with pytest.raises(ValueError):
        solver_n1.solve(make_e1(), 0)


def test_position_and_records(e1):
    sol = solver_n1.solve(e1, 5)
    x = sol.position(np.array([0.0, 1.0]))
    assert x.shape == (2,) and np.all(np.isfinite(x))
    rec = sol.to_records()
    assert {"k", "nu", "re", "im"} <= set(rec[0])
