import numpy as np
import pytest

from periodmap.errors import StepOutOfRange
from periodmap.floquet import (dvarphi_dB_check, floquet_report, monodromy, theta,
                               theta_with_residual, wronskian, ybar_ivp)
from periodmap.integrate import solve_orbit
from periodmap.model import Branch, orbit_spec
from periodmap.quadrature import dLdB_fd


def test_theta_signs(orbit_k2, orbit_k3):
    assert theta(orbit_k2) < 0
    assert theta(orbit_k3) > 0


def test_theta_frozen_values(orbit_k2, orbit_k3):
    assert theta(orbit_k2) == pytest.approx(-9.01306048556, rel=1e-9)
    assert theta(orbit_k3) == pytest.approx(0.63318871057, rel=1e-9)


def test_lemma_identity(orbit_k2):
    th = theta(orbit_k2)
    assert abs(th + dLdB_fd(2.0, Branch.POSITIVE, -0.1)) <= 1e-6 * abs(th)


@pytest.mark.parametrize("k, B, branch, h", [
    (2.0, -0.1, Branch.POSITIVE, 1e-5), (3.0, 2.0, Branch.SIGN_CHANGING, 1e-5),
])
def test_fd_with_small_step(k, B, branch, h):
    th = theta(solve_orbit(orbit_spec(k, B, branch)))
    assert dLdB_fd(k, branch, B, h) == pytest.approx(-th, rel=1e-6)


def test_theta_tolerance_refinement():
    o = solve_orbit(orbit_spec(2.0, -0.05), tol=1e-12)
    assert theta(o, 1e-12) == pytest.approx(theta(o, 1e-13), rel=1e-7)


def test_shift_relation_residual(orbit_k2, orbit_k3):
    for o in (orbit_k2, orbit_k3):
        _, res, _ = theta_with_residual(o)
        assert res <= 1e-7


def test_ybar_initial_data(orbit_k2):
    sol = ybar_ivp(orbit_k2)
    assert sol.ybar[0] == -1.0 / orbit_k2.spec.phi2_at_max
    assert sol.dybar[0] == 0.0


def test_wronskian_is_one(orbit_k2, orbit_k3):
    for o in (orbit_k2, orbit_k3):
        sol = ybar_ivp(o)
        np.testing.assert_allclose(wronskian(sol, o.spec.k), 1.0, atol=1e-10)


def test_monodromy_invariants(orbit_k2, orbit_k3):
    for o in (orbit_k2, orbit_k3):
        M = monodromy(o)
        assert abs(np.linalg.det(M) - 1) <= 1e-8
        assert abs(np.trace(M) - 2) <= 1e-6
        v = np.array([0.0, o.spec.phi2_at_max])
        assert np.max(np.abs((M - np.eye(2)) @ v)) <= 1e-6


def test_monodromy_off_diagonal_is_theta(orbit_k3):
    # the (1, 0) solution is -phi''(0) ybar, so its slope at L is -theta phi''(0)^2
    M = monodromy(orbit_k3)
    th = theta(orbit_k3)
    assert abs(M[0, 1]) <= 1e-8
    assert M[1, 0] == pytest.approx(-th * orbit_k3.spec.phi2_at_max ** 2, rel=1e-8)


def test_floquet_report(orbit_k3):
    rep = floquet_report(orbit_k3)
    assert rep.residual <= 1e-6 * max(1, abs(rep.theta))
    assert rep.y1_residual <= 1e-7
    assert rep.discriminant == pytest.approx(2.0, abs=1e-6)


@pytest.mark.parametrize("fixture", ["orbit_k2", "orbit_k3"])
def test_ybar_is_derivative_in_B(fixture, request):
    o = request.getfixturevalue(fixture)
    c = dvarphi_dB_check(o, 1e-4)
    assert c.residual / c.scale <= 1e-6
    # the opposite sign misses by twice the size of ybar
    assert c.residual_negated / c.scale == pytest.approx(2.0, rel=1e-4)


def test_ybar_derivative_second_order(orbit_k2):
    r1 = dvarphi_dB_check(orbit_k2, 1e-4).residual
    r2 = dvarphi_dB_check(orbit_k2, 5e-5).residual
    assert 3.5 <= r1 / r2 <= 4.5


def test_ybar_derivative_out_of_range():
    o = solve_orbit(orbit_spec(2.0, -0.166))
    with pytest.raises(StepOutOfRange):
        dvarphi_dB_check(o, 1e-3)
