"""Discrete linearised operator -d^2/dx^2 + 1 - k phi**(k-1) with periodic coupling.

Because phi is even about x = 0, the periodic matrix commutes with the grid
reflection i -> N - i and splits into an even and an odd tridiagonal block;
``spectral_counts`` diagonalises the two blocks separately and rebuilds the
full-grid eigenvectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import AmbiguousZero, NoConvergence, NotInRange
from .floquet import ybar_ivp
from .integrate import PeriodicOrbit
from .model import Branch

MAX_SWEEPS = 100
SQRT2 = math.sqrt(2.0)


def potential(orbit: PeriodicOrbit, N: int) -> np.ndarray:
    """Q(x_i) = 1 - k phi(x_i)**(k-1) on x_i = i L / N."""
    k = orbit.spec.k
    return 1.0 - k * np.power(orbit.on_grid(N), k - 1.0)


def assemble(orbit: PeriodicOrbit, N: int) -> np.ndarray:
    """Symmetric N x N second-order periodic discretisation of the operator."""
    if N < 64 or N % 2:
        raise ValueError("N must be even and at least 64")
    h = orbit.L / N
    c = 1.0 / (h * h)
    A = np.diag(2.0 * c + potential(orbit, N))
    i = np.arange(N)
    A[i, (i + 1) % N] = -c
    A[(i + 1) % N, i] = -c
    return A


def eig_low(matrix: np.ndarray, m: int, tol: float = 1e-14, method: str = "jacobi"):
    """The m smallest eigenpairs of a symmetric matrix, ascending.

    ``method="jacobi"`` runs cyclic Jacobi (compiled when available);
    ``method="lapack"`` defers to ``numpy.linalg.eigh``.
    """
    A = np.ascontiguousarray(matrix, dtype=float)
    n = A.shape[0]
    if not 0 < m <= n:
        raise ValueError(f"m must be in 1..{n}")
    if method == "jacobi":
        w, V, sweeps = kernels.jacobi_eigh(A, tol, MAX_SWEEPS)
        if sweeps < 0:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    elif method == "lapack":
        w, V = np.linalg.eigh(A)
    else:
        raise ValueError(f"unknown method {method!r}")
    order = np.argsort(w, kind="stable")[:m]
    return w[order], V[:, order]


def sector_blocks(Q: np.ndarray, L: float) -> tuple[np.ndarray, np.ndarray]:
    """Even (N/2+1) and odd (N/2-1) tridiagonal blocks for a reflection-even Q."""
    N = len(Q)
    M = N // 2
    h = L / N
    c = -1.0 / (h * h)
    Qs = 0.5 * (Q + np.roll(Q[::-1], 1))  # enforce Q_i = Q_{N-i}
    d = 2.0 / (h * h) + Qs[: M + 1]
    even = np.diag(d)
    off = np.full(M, c)
    off[0] = off[-1] = SQRT2 * c
    even[np.arange(M), np.arange(1, M + 1)] = off
    even[np.arange(1, M + 1), np.arange(M)] = off
    odd = np.diag(d[1:M])
    j = np.arange(M - 2)
    odd[j, j + 1] = c
    odd[j + 1, j] = c
    return even, odd


def _expand(w_even: np.ndarray, w_odd: np.ndarray, N: int):
    M = N // 2
    idx = np.arange(1, M)
    ve = np.zeros((N, w_even.shape[1]))
    ve[0] = w_even[0]
    ve[M] = w_even[M]
    ve[idx] = w_even[idx] / SQRT2
    ve[N - idx] = w_even[idx] / SQRT2
    vo = np.zeros((N, w_odd.shape[1]))
    vo[idx] = w_odd[idx - 1] / SQRT2
    vo[N - idx] = -w_odd[idx - 1] / SQRT2
    return ve, vo


def low_spectrum(orbit: PeriodicOrbit, N: int, m: int, method: str = "jacobi"):
    """m smallest eigenpairs of assemble(orbit, N) through the sector split."""
    even, odd = sector_blocks(potential(orbit, N), orbit.L)
    me, mo = min(m, even.shape[0]), min(m, odd.shape[0])
    we, Ve = eig_low(even, me, method=method)
    wo, Vo = eig_low(odd, mo, method=method)
    ve, vo = _expand(Ve, Vo, N)
    w = np.concatenate((we, wo))
    V = np.hstack((ve, vo))
    order = np.argsort(w, kind="stable")[:m]
    return w[order], V[:, order]


def sign_changes(v: np.ndarray, rel_zero: float = 1e-12) -> int:
    """Sign changes of a periodic grid function around the full cycle."""
    s = np.sign(np.where(np.abs(v) <= rel_zero * np.max(np.abs(v)), 0.0, v))
    s = s[s != 0]
    if len(s) == 0:
        return 0
    return int(np.count_nonzero(s != np.roll(s, 1)))


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    grid_size: int
    eigenvalues: np.ndarray
    eigenvalues_fine: np.ndarray
    extrapolated_eigenvalues: np.ndarray
    n_neg: int
    z_zero: int
    zero_counts: list
    tol_zero: float
    ground_state_one_signed: bool
    eigenvectors: np.ndarray = field(repr=False, default=None)

    @property
    def oscillation_ok(self) -> bool:
        expected = [2 * ((j + 1) // 2) for j in range(len(self.zero_counts))]
        return list(self.zero_counts) == expected


def spectral_counts(orbit: PeriodicOrbit, N: int = 256, m: int = 7,
                    method: str = "jacobi") -> SpectrumReport:
    """n(L) and z(L) from Richardson-extrapolated eigenvalues on N and 2N grids."""
    w_n, _ = low_spectrum(orbit, N, m, method)
    w_2n, V_2n = low_spectrum(orbit, 2 * N, m, method)
    ext = (4.0 * w_2n - w_n) / 3.0
    nearest = ext[np.argmin(np.abs(ext))]
    tol_zero = max(1e-6, 10.0 * abs(nearest))
    a = np.abs(ext)
    ambiguous = (a > tol_zero) & (a < 10.0 * tol_zero)
    if np.any(ambiguous):
        raise AmbiguousZero(
            f"eigenvalue(s) {ext[ambiguous]} within a decade of the zero threshold {tol_zero:.3g}"
        )
    zero_counts = [sign_changes(V_2n[:, j]) for j in range(V_2n.shape[1])]
    v0 = V_2n[:, 0]
    one_signed = bool(np.all(v0 > 0) or np.all(v0 < 0))
    return SpectrumReport(
        grid_size=N,
        eigenvalues=w_n,
        eigenvalues_fine=w_2n,
        extrapolated_eigenvalues=ext,
        n_neg=int(np.count_nonzero(ext < -tol_zero)),
        z_zero=int(np.count_nonzero(a <= tol_zero)),
        zero_counts=zero_counts,
        tol_zero=tol_zero,
        ground_state_one_signed=one_signed,
        eigenvectors=V_2n,
    )


@dataclass(frozen=True)
class RangeIdentities:
    """Max-norm residuals of L(phi) = (1-k) phi**k and L(1) = 1 - k phi**(k-1)."""

    N: int
    phi_residual: float
    one_residual: float
    constant: float


def range_identities(orbit: PeriodicOrbit, N: int = 256) -> RangeIdentities:
    A = assemble(orbit, N)
    phi = orbit.on_grid(N)
    k = orbit.spec.k
    r_phi = A @ phi - (1.0 - k) * phi * np.power(phi, k - 1.0)
    r_one = A @ np.ones(N) - (1.0 - k * np.power(phi, k - 1.0))
    h = orbit.L / N
    res = float(np.max(np.abs(r_phi)))
    return RangeIdentities(N, res, float(np.max(np.abs(r_one))), res / (h * h))


@dataclass(frozen=True, eq=False)
class OneSolution:
    """Periodic h with L(h) = 1 sampled on t_j = j L / n."""

    t: np.ndarray
    h: np.ndarray
    method: str
    operator_residual: float
    periodicity_residual: float
    periodicity_residual_derivative: float
    chi_mean: float = math.nan
    h0: float = math.nan
    dh0: float = math.nan


def _spectral_second_derivative(f: np.ndarray, L: float) -> np.ndarray:
    n = len(f)
    freq = np.fft.fftfreq(n, d=L / n) * 2.0 * math.pi
    if n % 2 == 0:
        freq[n // 2] = 0.0
    return np.real(np.fft.ifft(-(freq**2) * np.fft.fft(f)))


def _solve_one_variation(orbit: PeriodicOrbit) -> OneSolution:
    """h = (int_0^x chi) psi' - (int_0^x psi') chi, psi = phi(. - L/4), chi = ybar(. - L/4)."""
    n = orbit.n_samples
    if n % 4:
        raise ValueError("variation-of-parameters path needs n_samples divisible by 4")
    k = orbit.spec.k
    sol = ybar_ivp(orbit)
    q = n // 4
    # values at u = j L/n, j in [-n, n], via evenness of phi and ybar
    j = np.arange(n + 1) - q
    aj = np.abs(j)
    odd = np.where(j < 0, -1.0, 1.0)
    phi_u = sol.phi[aj]
    dphi_u = odd * sol.dphi[aj]
    chi = sol.ybar[aj]
    dchi = odd * sol.dybar[aj]
    int_chi = odd * sol.int_ybar[aj] + sol.int_ybar[q]
    d2phi_u = phi_u - phi_u * np.power(phi_u, k - 1.0)
    psi_shift = phi_u - sol.phi[q]
    h = int_chi * dphi_u - psi_shift * chi
    dh = int_chi * d2phi_u - psi_shift * dchi
    chi_mean = float((sol.int_ybar[3 * q] + sol.int_ybar[q]) / orbit.L)
    idx = (np.arange(n) + q) % n
    ht = h[idx]
    t = orbit.x[:-1]
    Q = 1.0 - k * np.power(orbit.phi[:-1], k - 1.0)
    resid = -_spectral_second_derivative(ht, orbit.L) + Q * ht - 1.0
    return OneSolution(
        t=t, h=ht, method="variation",
        operator_residual=float(np.max(np.abs(resid))),
        periodicity_residual=float(abs(h[n] - h[0])),
        periodicity_residual_derivative=float(abs(dh[n] - dh[0])),
        chi_mean=chi_mean, h0=float(h[0]), dh0=float(dh[0]),
    )


def _solve_one_discrete(orbit: PeriodicOrbit, N: int) -> OneSolution:
    A = assemble(orbit, N)
    w, V = np.linalg.eigh(A)
    j0 = int(np.argmin(np.abs(w)))
    rhs = np.ones(N)
    coeff = V.T @ rhs
    if abs(coeff[j0]) / math.sqrt(N) > 1e-8:
        raise NotInRange(f"constant has kernel component {coeff[j0] / math.sqrt(N):.3g}")
    keep = np.arange(N) != j0
    ht = V[:, keep] @ (coeff[keep] / w[keep])
    return OneSolution(
        t=np.arange(N) * (orbit.L / N), h=ht, method="discrete",
        operator_residual=float(np.max(np.abs(A @ ht - rhs))),
        periodicity_residual=0.0, periodicity_residual_derivative=0.0,
    )


def solve_one(orbit: PeriodicOrbit, N: int = 256) -> OneSolution:
    """Periodic solution of L(h) = 1.

    Sign-changing orbits use variation of parameters with the shifted pair
    (psi', chi); positive orbits solve the discrete system on the
    complement of its kernel.
    """
    if orbit.spec.branch is Branch.SIGN_CHANGING:
        return _solve_one_variation(orbit)
    return _solve_one_discrete(orbit, N)
