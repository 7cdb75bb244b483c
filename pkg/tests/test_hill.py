import math

import numpy as np
import pytest

from periodmap.errors import AmbiguousZero, NoConvergence, NotInRange
from periodmap.hill import (assemble, eig_low, low_spectrum, potential, range_identities,
                            sector_blocks, sign_changes, solve_one, spectral_counts)
from periodmap.integrate import solve_orbit
from periodmap.model import orbit_spec


def constant_operator(N, L, q=1.0):
    h = L / N
    A = np.diag(np.full(N, 2 / h**2 + q))
    i = np.arange(N)
    A[i, (i + 1) % N] = A[(i + 1) % N, i] = -1 / h**2
    return A


def test_assemble_structure(orbit_k2):
    A = assemble(orbit_k2, 64)
    np.testing.assert_array_equal(A, A.T)
    h = orbit_k2.L / 64
    assert A[0, 63] == A[63, 0] == -1 / h**2
    np.testing.assert_allclose(A @ np.ones(64), potential(orbit_k2, 64), atol=1e-9)


@pytest.mark.parametrize("N", [63, 32])
def test_assemble_rejects_bad_N(orbit_k2, N):
    with pytest.raises(ValueError):
        assemble(orbit_k2, N)


def test_kernel_vector(orbit_k3):
    o = orbit_k3
    res = []
    for N in (128, 256):
        dphi = o.dphi[: -1 : o.n_samples // N]
        res.append(np.max(np.abs(assemble(o, N) @ dphi)) / np.max(np.abs(dphi)))
    assert 3.5 <= res[0] / res[1] <= 4.5


@pytest.mark.parametrize("method", ["jacobi", "lapack"])
def test_constant_potential_fourier_modes(method):
    N, L = 64, 2 * math.pi
    w, V = eig_low(constant_operator(N, L), 5, method=method)
    h = L / N
    exact = sorted(1 + 4 / h**2 * math.sin(math.pi * j / N) ** 2 for j in (0, 1, -1, 2, -2))
    np.testing.assert_allclose(w, exact, atol=1e-10)
    np.testing.assert_allclose(w, [1, 2, 2, 5, 5], rtol=5e-3)


def test_eig_low_contract():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((40, 40))
    A = X + X.T
    w, V = eig_low(A, 6)
    norm = np.linalg.norm(A, 2)
    for j in range(6):
        assert np.linalg.norm(A @ V[:, j] - w[j] * V[:, j]) <= 1e-9 * norm
    np.testing.assert_allclose(V.T @ V, np.eye(6), atol=1e-10)
    np.testing.assert_allclose(w, np.linalg.eigvalsh(A)[:6], atol=1e-11)


def test_eig_low_no_convergence(monkeypatch):
    import periodmap.hill as hill
    monkeypatch.setattr(hill, "MAX_SWEEPS", 1)
    A = constant_operator(64, 1.0) + np.diag(np.arange(64.0))
    with pytest.raises(NoConvergence):
        hill.eig_low(A, 3)


def test_eig_low_bad_arguments():
    with pytest.raises(ValueError):
        eig_low(np.eye(3), 4)
    with pytest.raises(ValueError):
        eig_low(np.eye(3), 1, method="qr")


def test_sector_split_reproduces_full_spectrum(orbit_k2):
    N = 128
    full = np.linalg.eigvalsh(assemble(orbit_k2, N))
    even, odd = sector_blocks(potential(orbit_k2, N), orbit_k2.L)
    assert even.shape == (N // 2 + 1,) * 2 and odd.shape == (N // 2 - 1,) * 2
    split = np.sort(np.concatenate((np.linalg.eigvalsh(even), np.linalg.eigvalsh(odd))))
    np.testing.assert_allclose(split, full, atol=1e-9 * np.max(np.abs(full)))
    w, V = low_spectrum(orbit_k2, N, 5)
    A = assemble(orbit_k2, N)
    for j in range(5):
        assert np.linalg.norm(A @ V[:, j] - w[j] * V[:, j]) <= 1e-8 * np.max(np.abs(full))


def test_refinement_is_second_order(orbit_k3):
    w1, _ = low_spectrum(orbit_k3, 256, 4, "lapack")
    w2, _ = low_spectrum(orbit_k3, 512, 4, "lapack")
    w4, _ = low_spectrum(orbit_k3, 1024, 4, "lapack")
    d1, d2 = np.abs(w2 - w1), np.abs(w4 - w2)
    j = [0, 1, 3]  # the kernel eigenvalue converges too fast to measure
    np.testing.assert_array_less(3.5, d1[j] / d2[j])
    np.testing.assert_array_less(d1[j] / d2[j], 4.5)


def test_counts_positive(orbit_k2):
    rep = spectral_counts(orbit_k2, 256)
    assert (rep.n_neg, rep.z_zero) == (1, 1)
    assert rep.ground_state_one_signed
    assert rep.oscillation_ok


def test_counts_sign_changing(orbit_k3):
    rep = spectral_counts(orbit_k3, 256)
    assert (rep.n_neg, rep.z_zero) == (2, 1)
    assert rep.ground_state_one_signed
    assert rep.zero_counts[:5] == [0, 2, 2, 4, 4]
    assert abs(rep.extrapolated_eigenvalues[2]) <= 1e-6


def test_jacobi_and_lapack_agree(orbit_k3):
    a = spectral_counts(orbit_k3, 256, method="jacobi")
    b = spectral_counts(orbit_k3, 256, method="lapack")
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-10)
    assert a.zero_counts == b.zero_counts


def test_ambiguous_zero(orbit_k2, monkeypatch):
    import periodmap.hill as hill
    real = hill.low_spectrum

    def shifted(orbit, N, m, method):
        w, V = real(orbit, N, m, method)
        w = w.copy()
        w[3] = 5e-6  # the kernel stays near 0, so tol_zero = 1e-6
        return w, V

    monkeypatch.setattr(hill, "low_spectrum", shifted)
    with pytest.raises(AmbiguousZero):
        hill.spectral_counts(orbit_k2, 256)


def test_sign_changes():
    x = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    assert sign_changes(np.ones(10)) == 0
    assert sign_changes(np.sin(x)) == 2
    assert sign_changes(np.cos(3 * x)) == 6


def test_range_identities(orbit_k3):
    r1, r2 = range_identities(orbit_k3, 256), range_identities(orbit_k3, 512)
    assert 3.5 <= r1.phi_residual / r2.phi_residual <= 4.5
    # the stencil annihilates constants, so L(1) holds to rounding on any grid
    assert r1.one_residual <= 1e-9 and r2.one_residual <= 1e-9
    assert r1.constant == pytest.approx(r2.constant, rel=0.05)


def test_solve_one_sign_changing(orbit_k3, orbit_k3_half):
    for o in (orbit_k3, orbit_k3_half):
        s = solve_one(o)
        assert s.method == "variation"
        assert s.operator_residual <= 1e-6
        assert s.periodicity_residual <= 1e-8
        assert s.periodicity_residual_derivative <= 1e-8
        assert abs(s.chi_mean) <= 1e-8
        assert s.h0 == 0.0 and s.dh0 == 0.0


def test_solve_one_matches_discrete(orbit_k3):
    s = solve_one(orbit_k3)
    N = 512
    A = assemble(orbit_k3, N)
    step = orbit_k3.n_samples // N
    h = s.h[::step]
    assert np.max(np.abs(A @ h - 1)) <= 1e-3  # O(h^2) discretisation of the exact solution


def test_solve_one_positive(orbit_k2):
    s = solve_one(orbit_k2)
    assert s.method == "discrete"
    assert s.operator_residual <= 1e-6


def test_not_in_range(orbit_k2, monkeypatch):
    import periodmap.hill as hill
    monkeypatch.setattr(hill, "assemble", lambda o, N: constant_operator(N, o.L, 0.0))
    with pytest.raises(NotInRange):
        hill.solve_one(orbit_k2)
