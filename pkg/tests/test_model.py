import math

import numpy as np
import pytest

from periodmap.errors import BranchUnavailable, DegenerateOrbit, DomainError
from periodmap.model import (Branch, Model, admissible_range, energy, orbit_spec,
                             turning_points)


@pytest.mark.parametrize("k, phi, xi, expected", [
    (2.0, 1.0, 0.0, -1.0 / 6.0),
    (3.0, 0.0, 0.0, 0.0),
    (3.0, 2.0, 0.0, 2.0),
])
def test_energy_values(k, phi, xi, expected):
    assert energy(Model(k), phi, xi) == pytest.approx(expected, abs=1e-15)


def test_energy_kinetic_term():
    assert energy(Model(3.0), 0.0, 2.0) == 2.0


@pytest.mark.parametrize("k, lo", [(2.0, -1.0 / 6.0), (3.0, -0.25), (1.5, -0.1), (5.0, -1.0 / 3.0)])
def test_positive_range(k, lo):
    a, b = admissible_range(Model(k), Branch.POSITIVE)
    assert a == pytest.approx(lo, rel=1e-15)
    assert b == 0.0


def test_sign_changing_range():
    assert admissible_range(Model(3.0), "signchanging") == (0.0, math.inf)


@pytest.mark.parametrize("k", [4.0, 2.0, 1.5, 3.5])
def test_sign_changing_needs_odd_integer(k):
    with pytest.raises(BranchUnavailable):
        admissible_range(Model(k), Branch.SIGN_CHANGING)


@pytest.mark.parametrize("k", [1.0, 0.5, math.inf, math.nan])
def test_model_rejects_bad_k(k):
    with pytest.raises(ValueError):
        Model(k)


def test_branch_parse():
    assert Branch.parse("positive") is Branch.POSITIVE
    assert Branch.parse("SignChanging") is Branch.SIGN_CHANGING
    with pytest.raises(ValueError):
        Branch.parse("mirror")


def test_turning_points_quartic_sign_changing():
    b1, b2 = turning_points(Model(3.0), 2.0, Branch.SIGN_CHANGING, 1e-13)
    assert b1 == pytest.approx(-2.0, abs=1e-13)
    assert b2 == pytest.approx(2.0, abs=1e-13)


def test_turning_points_quartic_positive():
    b1, b2 = turning_points(Model(3.0), -3.0 / 16.0, Branch.POSITIVE, 1e-13)
    assert b1 == pytest.approx(math.sqrt(0.5), abs=1e-13)
    assert b2 == pytest.approx(math.sqrt(1.5), abs=1e-13)


@pytest.mark.parametrize("k, B, branch", [
    (2.0, -0.1, Branch.POSITIVE), (1.5, -0.05, Branch.POSITIVE),
    (5.0, -0.2, Branch.POSITIVE), (3.0, 0.3, Branch.SIGN_CHANGING), (5.0, 7.0, Branch.SIGN_CHANGING),
])
def test_turning_points_are_roots_of_G(k, B, branch):
    m = Model(k)
    s = orbit_spec(m, B, branch)
    for b in (s.b1, s.b2):
        assert abs(energy(m, b, 0.0) - B) <= 1e-13 * max(1.0, abs(B))
    if branch is Branch.POSITIVE:
        assert 0 < s.b1 < 1 < s.b2
    else:
        assert s.b1 == -s.b2


def test_center_energy_degenerate():
    with pytest.raises(DegenerateOrbit):
        orbit_spec(2.0, -1.0 / 6.0)


@pytest.mark.parametrize("B", [0.0, 1e-3, -0.2])
def test_outside_positive_range(B):
    with pytest.raises(DegenerateOrbit):
        orbit_spec(2.0, B, Branch.POSITIVE)


def test_linear_period():
    assert Model(2.0).linear_period == pytest.approx(2 * math.pi)
    assert Model(3.0).linear_period == pytest.approx(2 * math.pi / math.sqrt(2))


def test_power_negative_base_requires_integer_k():
    assert Model(3.0).power(-2.0, 3.0) == -8.0
    with pytest.raises(DomainError):
        Model(1.5).power(-0.5, 1.5)


@pytest.mark.parametrize("k", [1.5, 2.0, 3.0, 5.0, 7.0])
def test_lower_endpoint_is_center_energy(k):
    m = Model(k)
    assert energy(m, 1.0, 0.0) == pytest.approx(admissible_range(m, Branch.POSITIVE)[0], abs=1e-15)


@pytest.mark.parametrize("k", [3.0, 5.0])
def test_G_even_for_odd_k(k):
    m = Model(k)
    h = np.linspace(0, 3, 61)
    for B in (-0.1, 0.5):
        np.testing.assert_allclose([m.G(-x, B) for x in h], [m.G(x, B) for x in h], atol=1e-12)


@pytest.mark.parametrize("k, B, branch", [
    (2.0, -0.01, Branch.POSITIVE), (1.5, -0.09, Branch.POSITIVE), (3.0, 4.0, Branch.SIGN_CHANGING),
])
def test_G_positive_between_turning_points(k, B, branch):
    s = orbit_spec(k, B, branch)
    h = np.linspace(s.b1, s.b2, 503)[1:-1]
    assert min(s.model.G(x, B) for x in h) > 0


def test_odd_integer_tolerance():
    assert Model(3.0 + 1e-13).is_odd_integer
    assert not Model(3.0 + 1e-9).is_odd_integer
