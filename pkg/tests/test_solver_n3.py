import numpy as np
import pytest

from qpseries import solver_n3
from qpseries.errors import EnvelopeViolation, SolverError, ValidationError
from qpseries.fourier import FourierSeries, average, convolve, directional_derivative, power
from qpseries.model import Problem, shifted_g_tail
from qpseries.verify import residual

from conftest import PHI, make_e1, make_e3

EPS = 0.05
SKEW = {(1,): 0.5, (-1,): 0.5, (2,): -0.4j, (-2,): 0.4j}


def make_skew(eps=EPS):
    return Problem.build([1.0], SKEW, [0, 0, 0, 1, 0.5], 0.0, eps)


def test_x1_closed_form():
    u0 = solver_n3.x1_coefficients(make_e3(0.0))
    assert u0[(1,)] == pytest.approx(1 / 2j, rel=1e-15)
    for eps in (0.05, 0.3):
        u = solver_n3.x1_coefficients(make_e3(eps))
        assert abs(u[(1,)]) ** 2 == pytest.approx(1 / (4 * (1 + eps**2)), rel=1e-14)
        assert (0,) not in u


def test_alpha_min():
    assert solver_n3.alpha_min(make_e3()) == 1.0
    f = {(1, 0): 0.5, (-1, 0): 0.5, (0, 1): 0.5, (0, -1): 0.5}
    p = Problem.build([1.0, PHI], f, [0, 0, 0, 1], 0.0, EPS)
    # l1 ball of radius (n+1)N = 4: minimizer (2, -1), value phi^-2
    assert solver_n3.alpha_min(p) == pytest.approx(PHI**-2, abs=1e-14)
    brute = min(abs(i + PHI * j) for i in range(-4, 5) for j in range(-4, 5)
                if 0 < abs(i) + abs(j) <= 4)
    assert solver_n3.alpha_min(p) == pytest.approx(brute, abs=1e-15)


def test_counterterm_closed_form():
    for eps in (0.0, 0.01, 0.05, 0.2):
        b, b0 = solver_n3.counterterm_b(make_e3(eps), 0.0)
        assert abs(b - 3 / (2 * (1 + eps**2))) <= 1e-13
        assert b0 == pytest.approx(b, rel=1e-15)


def test_counterterm_higher_powers():
    # oracle: b = sum_p p a_p eps^(p-n) [x1^(p-1)]_0 by direct series powers
    p = make_skew()
    zeta = -0.2
    x1 = solver_n3.x1_coefficients(p) + FourierSeries.constant(zeta, 1)
    ref = 3 * average(power(x1, 2)).real + 4 * 0.5 * EPS * average(power(x1, 3)).real
    b, b0 = solver_n3.counterterm_b(p, zeta)
    assert b == pytest.approx(ref, rel=1e-13)
    assert b0 == pytest.approx(3 * average(power(x1, 2)).real, rel=1e-13)


def test_remark_vanishing_orders():
    for p in (make_e3(), make_skew()):
        st = solver_n3.solve_zeta(p, 6)
        assert len(st.xi(2)) == 0 and len(st.xi(3)) == 0


def test_fbar2_e3_limit():
    c = solver_n3.fbar2_coefficients(make_e3(0.0))
    assert np.allclose(c, [1.0, 0.0, 1.5, 0.0], atol=1e-15)
    assert solver_n3.fbar2_root(c) == 0.0


def test_fbar2_root_against_numpy():
    c = solver_n3.fbar2_coefficients(make_skew())
    real = [r.real for r in np.roots(c) if abs(r.imag) < 1e-9]
    assert len(real) == 1
    assert solver_n3.fbar2_root(c) == pytest.approx(real[0], abs=1e-13)


def test_zeta_e3():
    st = solver_n3.solve_zeta(make_e3(0.01), 8)
    assert abs(st.zeta) <= 1e-3
    assert abs(st.f2_residual) <= 1e-11 * 1.5


def test_zeta_tends_to_zeta0():
    gaps = []
    for eps in (0.04, 0.02, 0.01, 0.005):
        st = solver_n3.solve_zeta(make_skew(eps), 8)
        assert abs(st.f2_residual) <= 1e-11 * 3
        gaps.append(abs(st.zeta - st.zeta0))
    assert all(a > b for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-3


def test_slope_identity():
    for p in (make_e3(), make_skew()):
        st = solver_n3.solve_zeta(p, 6)
        assert solver_n3.fbar2_slope_matches(st, p) <= 1e-10


def test_propagator_lower_bound_grid():
    s = np.linspace(-10, 10, 2001)
    for eps in (1e-3, 1e-2, 0.05, 0.1):
        b, _ = solver_n3.counterterm_b(make_e3(eps), 0.0)
        assert solver_n3.propagator_violations([eps], s, b, 3) == 0


def test_scaling():
    for p in (make_e3(), make_skew()):
        ratios = solver_n3.check_scaling(p, 6)
        assert ratios and max(ratios.values()) <= 1.25


def _mu_mul(A, B, K, dim):
    out = [FourierSeries.zero(dim) for _ in range(K + 1)]
    for i, a in enumerate(A):
        for j, b in enumerate(B):
            if i + j <= K and a and b:
                out[i + j] = out[i + j] + convolve(a, b)
    return out


@pytest.mark.parametrize("factory", [make_e3, make_skew])
def test_order_by_order_residual(factory):
    """mu^j coefficient of the xi-equation vanishes on nonzero modes for j <= K."""
    p = factory()
    K = 8
    st = solver_n3.solve_zeta(p, K)
    eps, om, dim, n = p.epsilon, p.omega, p.dim, st.gotn
    x1 = solver_n3.x1_coefficients(p) + FourierSeries.constant(st.zeta, dim)
    Y = [FourierSeries.zero(dim), x1.scale(eps)] + [st.xi(k) for k in range(2, K + 1)]
    Xi = [FourierSeries.zero(dim), FourierSeries.zero(dim)] + Y[2:]
    tail = shifted_g_tail(p.nonlinearity)
    G = [FourierSeries.zero(dim) for _ in range(K + 1)]
    Yp = [FourierSeries.constant(1.0, dim)] + [FourierSeries.zero(dim)] * K
    for q in range(1, len(tail)):
        Yp = _mu_mul(Yp, Y, K, dim)
        if tail[q]:
            G = [g + y.scale(tail[q]) for g, y in zip(G, Yp)]
    # averaged linear part, carried by mu^(q-1)
    for q in range(n, len(tail)):
        c = q * tail[q] * eps ** (q - 1) * average(power(x1, q - 1)).real
        for j in range(K + 1 - (q - 1)):
            G[j + q - 1] = G[j + q - 1] - Xi[j].scale(c)
    scale = max(x.sup_coeff() for x in Y[1:])
    for j in range(2, K + 1):
        xi = Xi[j]
        r = (directional_derivative(xi, om, 2).scale(eps) + directional_derivative(xi, om, 1)
             + xi.scale(st.b * eps**n) + G[j - 1].scale(eps))
        assert r.without_zero_mode().sup_coeff() <= 1e-11 * scale
    # the physical zero mode is small at the converged zeta
    assert abs(residual(p, solver_n3.assemble(p, st, K)).per_mode_residual[(0,)]) < 1e-12


def test_assemble():
    p = make_e3()
    sol, st = solver_n3.solve(p, 3)
    x1 = solver_n3.x1_coefficients(p) + FourierSeries.constant(st.zeta, 1)
    assert (sol.total() - x1.scale(EPS)).sup_coeff() == 0
    sol0, st0 = solver_n3.solve(make_e3(0.0), 4)
    assert st0 is None and len(sol0.total()) == 0
    assert sol0.position(1.0)[0] == 0.0


def test_residual_refines():
    p = make_e3()
    r4 = residual(p, solver_n3.solve(p, 4)[0]).sup_residual
    r6 = residual(p, solver_n3.solve(p, 6)[0]).sup_residual
    r7 = residual(p, solver_n3.solve(p, 7)[0]).sup_residual
    # xi^[5] = xi^[6] = 0 for this forcing, so K = 6 adds nothing over K = 4
    assert r6 == r4
    assert r7 < r4 * 1e-3


def test_errors():
    with pytest.raises(SolverError):
        solver_n3.solve_zeta(make_e1(), 4)
    with pytest.raises(ValidationError):
        solver_n3.solve_zeta(make_e3(0.0), 4)


def test_scaling_violation_detected(monkeypatch):
    monkeypatch.setattr(solver_n3, "scaling_exponent", lambda k, n: 10.0)
    with pytest.raises(EnvelopeViolation):
        solver_n3.check_scaling(make_e3(), 6)
