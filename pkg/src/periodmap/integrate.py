"""Periodic orbits by shooting from the maximum, with half-period event detection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import NoConvergence, TolFailure
from .model import Model, OrbitSpec, energy
from .quadrature import period_integral

RTOL = ATOL = 1e-13
HORIZON = 1e4
ENERGY_DRIFT_MAX = 1e-9


@dataclass(frozen=True, eq=False)
class PeriodicOrbit:
    """One period of the even orbit, maximum at x = 0, sampled uniformly.

    ``x``, ``phi`` and ``dphi`` hold ``n_samples + 1`` points; the last one
    is the integrated state at x = L, so ``phi[-1] - phi[0]`` measures the
    closure of the shot.
    """

    spec: OrbitSpec
    L: float
    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    L_quad: float
    rtol: float = RTOL
    atol: float = ATOL
    nsteps: int = 0
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_samples(self) -> int:
        return len(self.x) - 1

    @property
    def model(self) -> Model:
        return self.spec.model

    @property
    def energy_drift(self) -> float:
        return self.diagnostics["energy_drift"]

    @property
    def closure(self) -> float:
        return max(abs(self.phi[-1] - self.phi[0]), abs(self.dphi[-1] - self.dphi[0]))

    @property
    def mean(self) -> float:
        """Mean of phi over one period (trapezoid on the periodic grid)."""
        return float(np.mean(self.phi[:-1]))

    def evaluate(self, x):
        """Cubic Hermite interpolation of (phi, phi'), x taken modulo L."""
        x = np.asarray(x, dtype=float)
        n = self.n_samples
        step = self.L / n
        xm = np.mod(x, self.L)
        i = np.minimum((xm / step).astype(int), n - 1)
        s = (xm - i * step) / step
        p0, p1 = self.phi[i], self.phi[i + 1]
        d0, d1 = self.dphi[i] * step, self.dphi[i + 1] * step
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        phi = h00 * p0 + h10 * d0 + h01 * p1 + h11 * d1
        g00 = 6 * s * (s - 1)
        g10 = (1 - s) * (1 - 3 * s)
        g01 = -g00
        g11 = s * (3 * s - 2)
        dphi = (g00 * p0 + g10 * d0 + g01 * p1 + g11 * d1) / step
        if phi.ndim == 0:
            return float(phi), float(dphi)
        return phi, dphi

    def on_grid(self, N: int) -> np.ndarray:
        """phi at x_i = i L / N, i < N; exact samples when N divides n_samples."""
        if self.n_samples % N == 0:
            return self.phi[: -1 : self.n_samples // N].copy()
        return self.evaluate(np.arange(N) * (self.L / N))[0]


def shoot_half_period(spec: OrbitSpec, L_estimate: float, rtol: float = RTOL,
                      atol: float = ATOL) -> tuple[float, int]:
    """Position of the minimum, the first return of phi' to zero from below."""
    x_event, nsteps = kernels.half_period(
        np.array([spec.b2, 0.0]), spec.k, rtol, atol, 0.005 * L_estimate, HORIZON,
    )
    if x_event < 0:
        raise NoConvergence(f"no half-period event within x <= {HORIZON:g}")
    return float(x_event), nsteps


def solve_orbit(spec: OrbitSpec, tol: float = RTOL, n_samples: int = 2048) -> PeriodicOrbit:
    """Shoot from (b2, 0), locate the half period, then sample one full period."""
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    quad = period_integral(spec)
    half, n1 = shoot_half_period(spec, quad.L, tol, tol)
    L = 2.0 * half
    x = np.linspace(0.0, L, n_samples + 1)
    states, n2 = kernels.propagate(
        np.array([spec.b2, 0.0]), spec.k, 0, 0, x[1:], tol, tol
    )
    phi = np.concatenate(([spec.b2], states[:, 0]))
    dphi = np.concatenate(([0.0], states[:, 1]))
    model = spec.model
    E = np.array([energy(model, p, q) for p, q in zip(phi, dphi)])
    drift = float(np.max(np.abs(E - spec.B)))
    if drift > ENERGY_DRIFT_MAX:
        raise TolFailure(f"energy drift {drift:.3g} exceeds {ENERGY_DRIFT_MAX:g}")
    return PeriodicOrbit(
        spec=spec, L=L, x=x, phi=phi, dphi=dphi, L_quad=quad.L, rtol=tol, atol=tol,
        nsteps=n1 + n2,
        diagnostics={"energy_drift": drift, "x_half": half},
    )
