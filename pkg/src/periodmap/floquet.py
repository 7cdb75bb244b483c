"""Floquet constant theta and monodromy of the Hill equation at lambda = 0.

The even solution ybar of -y'' + y - k phi**(k-1) y = 0 with
ybar(0) = -1/phi''(0), ybar'(0) = 0 satisfies

    ybar(x + L) = ybar(x) + theta * phi'(x),

so theta = ybar'(L) / phi''(0), and dL/dB = -theta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NearCenter, StepOutOfRange, TolFailure
from .integrate import PeriodicOrbit
from .model import admissible_range, orbit_spec
from .quadrature import NEAR_CENTER_WIDTH, dLdB_fd

Y1_RESIDUAL_MAX = 1e-7


@dataclass(frozen=True, eq=False)
class YbarSolution:
    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ybar: np.ndarray
    dybar: np.ndarray
    int_ybar: np.ndarray


@dataclass(frozen=True)
class FloquetReport:
    theta: float
    monodromy: np.ndarray
    discriminant: float
    det_monodromy: float
    dLdB_fd: float
    residual: float
    y1_residual: float


def _check_conditioning(orbit: PeriodicOrbit):
    if orbit.spec.amplitude < NEAR_CENTER_WIDTH:
        raise NearCenter(f"orbit amplitude {orbit.spec.amplitude:.3g} too small for theta")


def ybar_ivp(orbit: PeriodicOrbit, tol: float | None = None, periods: int = 1) -> YbarSolution:
    """Integrate (phi, phi', ybar, ybar', int ybar) over [0, periods*L] on the orbit grid."""
    spec = orbit.spec
    tol = orbit.rtol if tol is None else tol
    phi2 = spec.phi2_at_max
    if phi2 == 0.0:
        raise NearCenter("phi''(0) vanishes")
    n = orbit.n_samples
    x = np.linspace(0.0, periods * orbit.L, periods * n + 1)
    y0 = np.array([spec.b2, 0.0, -1.0 / phi2, 0.0, 0.0])
    states, _ = kernels.propagate(y0, spec.k, 1, 1, x[1:], tol, tol)
    states = np.vstack((y0, states))
    return YbarSolution(x, *states.T)


def wronskian(sol: YbarSolution, k: float) -> np.ndarray:
    """W(phi', ybar) = phi' ybar' - phi'' ybar, identically 1."""
    phi2 = sol.phi - sol.phi * sol.phi ** (k - 1.0)
    return sol.dphi * sol.dybar - phi2 * sol.ybar


def theta_with_residual(orbit: PeriodicOrbit, tol: float | None = None,
                        n_check: int = 16) -> tuple[float, float, YbarSolution]:
    _check_conditioning(orbit)
    sol = ybar_ivp(orbit, tol, periods=2)
    n = orbit.n_samples
    theta = sol.dybar[n] / orbit.spec.phi2_at_max
    idx = np.linspace(0, n, n_check, endpoint=False).astype(int)
    res = sol.ybar[idx + n] - sol.ybar[idx] - theta * sol.dphi[idx]
    return float(theta), float(np.max(np.abs(res))), sol


def theta(orbit: PeriodicOrbit, tol: float | None = None) -> float:
    """theta = ybar'(L) / phi''(0), cross-checked pointwise against the shift relation."""
    value, res, _ = theta_with_residual(orbit, tol)
    if res > Y1_RESIDUAL_MAX:
        raise TolFailure(f"ybar(x+L) - ybar(x) - theta phi'(x) = {res:.3g} exceeds {Y1_RESIDUAL_MAX:g}")
    return value


def monodromy(orbit: PeriodicOrbit, tol: float | None = None) -> np.ndarray:
    """Fundamental matrix at x = L of the solutions starting from (1, 0) and (0, 1)."""
    tol = orbit.rtol if tol is None else tol
    spec = orbit.spec
    y0 = np.array([spec.b2, 0.0, 1.0, 0.0, 0.0, 1.0])
    states, _ = kernels.propagate(y0, spec.k, 2, 0, np.array([orbit.L]), tol, tol)
    s = states[-1]
    return np.array([[s[2], s[4]], [s[3], s[5]]])


def floquet_report(orbit: PeriodicOrbit, tol: float | None = None,
                   fd_tol: float = 1e-9) -> FloquetReport:
    th = theta(orbit, tol)
    _, y1_res, _ = theta_with_residual(orbit, tol)
    M = monodromy(orbit, tol)
    spec = orbit.spec
    d = dLdB_fd(spec.model, spec.branch, spec.B, tol=fd_tol)
    return FloquetReport(
        theta=th,
        monodromy=M,
        discriminant=float(np.trace(M)),
        det_monodromy=float(np.linalg.det(M)),
        dLdB_fd=d,
        residual=abs(d + th),
        y1_residual=y1_res,
    )


@dataclass(frozen=True)
class DerivativeCheck:
    """ybar against the centered difference of phi in B at fixed x.

    ``residual`` compares ybar with +dphi/dB; ``residual_negated`` with
    -dphi/dB.
    """

    h: float
    residual: float
    residual_negated: float
    scale: float


def dvarphi_dB_check(orbit: PeriodicOrbit, h: float = 1e-4,
                     tol: float | None = None) -> DerivativeCheck:
    spec = orbit.spec
    tol = orbit.rtol if tol is None else tol
    sol = ybar_ivp(orbit, tol)
    x = orbit.x[1:]
    lo, hi = admissible_range(spec.model, spec.branch)
    if not (lo < spec.B - h and spec.B + h < hi):
        raise StepOutOfRange(f"B +- {h:g} leaves ({lo}, {hi})")
    phis = []
    for sign in (1.0, -1.0):
        s = orbit_spec(spec.model, spec.B + sign * h, spec.branch)
        states, _ = kernels.propagate(np.array([s.b2, 0.0]), spec.k, 0, 0, x, tol, tol)
        phis.append(np.concatenate(([s.b2], states[:, 0])))
    dphi_dB = (phis[0] - phis[1]) / (2.0 * h)
    return DerivativeCheck(
        h=h,
        residual=float(np.max(np.abs(sol.ybar - dphi_dB))),
        residual_negated=float(np.max(np.abs(sol.ybar + dphi_dB))),
        scale=float(np.max(np.abs(sol.ybar))),
    )
