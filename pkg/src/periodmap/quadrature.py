"""Period map L(B) by singular quadrature, plus a finite-difference dL/dB."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, StepOutOfRange
from .model import Branch, Model, OrbitSpec, admissible_range, check_branch, orbit_spec

DEFAULT_TOL = 1e-10
QUAD_TOL = 1e-14
NEAR_CENTER_WIDTH = 1e-6
U_MAX = 4.0
# level l uses mesh 2**-l on [-U_MAX, U_MAX]: 2**7+1 ... 2**16+1 nodes
MIN_LEVEL, MAX_LEVEL = 4, 13


@dataclass(frozen=True)
class QuadratureResult:
    L: float
    nodes_used: int
    error_estimate: float
    near_center: bool = False


def _gap(model: Model, b: float, delta: np.ndarray) -> np.ndarray:
    """G(b + delta) for a simple zero b > 0 of G, without cancellation near b."""
    k = model.k
    rel = np.expm1((k + 1.0) * np.log1p(delta / b))
    return -2.0 / (k + 1.0) * b ** (k + 1.0) * rel + delta * (2.0 * b + delta)


def _node_values(spec: OrbitSpec, u: np.ndarray) -> np.ndarray:
    """Weighted integrand at tanh-sinh abscissae +-u (u >= 0), both ends summed.

    With h = c + r sin t the integrand r cos t / sqrt(G(h)) is bounded; the
    distance s = pi/2 - |t| and the offsets from the turning points are
    formed directly so that no node loses accuracy to cancellation.
    """
    model = spec.model
    r = 0.5 * (spec.b2 - spec.b1)
    a = 0.5 * math.pi * np.sinh(u)
    s = math.pi / (1.0 + np.exp(2.0 * a))
    weight = 0.25 * math.pi**2 * np.cosh(u) * 4.0 / (np.exp(a) + np.exp(-a)) ** 2
    delta = 2.0 * r * np.sin(0.5 * s) ** 2
    sin_s = np.sin(s)
    upper = sin_s / np.sqrt(_gap(model, spec.b2, -delta))
    if spec.b1 > 0.0:
        lower = sin_s / np.sqrt(_gap(model, spec.b1, delta))
    else:
        # odd k: G is even, so b1 + delta mirrors b2 - delta
        lower = upper
    vals = r * weight * (upper + lower)
    vals = np.where(u == 0.0, 0.5 * vals, vals)
    return vals


def period_integral(spec: OrbitSpec, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """L = 2 * integral_{b1}^{b2} dh / sqrt(G(h)), by tanh-sinh after h = c + r sin t."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if spec.b2 - spec.b1 < NEAR_CENTER_WIDTH:
        L0 = spec.model.linear_period
        return QuadratureResult(L0, 0, L0 * (spec.b2 - spec.b1) ** 2, near_center=True)
    level = MIN_LEVEL
    eta = 2.0**-level
    u = np.arange(0, int(U_MAX / eta) + 1) * eta
    total = np.sum(_node_values(spec, u))
    L_prev = 2.0 * eta * total
    nodes = 2 * len(u) - 1
    for level in range(MIN_LEVEL + 1, MAX_LEVEL + 1):
        eta = 2.0**-level
        u = (2 * np.arange(0, int(U_MAX / eta) // 2) + 1) * eta
        total += np.sum(_node_values(spec, u))
        nodes += 2 * len(u)
        L = float(2.0 * eta * total)
        if not math.isfinite(L):
            raise NoConvergence(f"non-finite period integral at B={spec.B!r}")
        diff = abs(L - L_prev)
        if diff <= tol * abs(L):
            return QuadratureResult(L, nodes, float(diff + 16.0 * np.finfo(float).eps * L))
        L_prev = L
    raise NoConvergence(
        f"period integral did not settle to {tol:g} (last change {diff:.3g}) at B={spec.B!r}"
    )


def period(model: "Model | float", B: float, branch: "Branch | str" = Branch.POSITIVE,
           tol: float = DEFAULT_TOL) -> float:
    return period_integral(orbit_spec(model, B, branch), tol).L


def default_step(model: Model, branch: Branch, B: float) -> float:
    lo, hi = admissible_range(model, branch)
    dist = min(B - lo, hi - B)
    return 0.02 * min(dist, max(1.0, abs(B)))


def dLdB_fd(model: "Model | float", branch: "Branch | str", B: float,
            h_step: "float | None" = None, tol: float = 1e-9,
            max_halvings: int = 10) -> float:
    """Central-difference dL/dB, Richardson-combined over successive halvings of h."""
    if not isinstance(model, Model):
        model = Model(model)
    branch = check_branch(model, branch)
    lo, hi = admissible_range(model, branch)
    h = default_step(model, branch, B) if h_step is None else float(h_step)
    if not (lo < B - h and B + h < hi):
        raise StepOutOfRange(f"stencil B +- {h:g} leaves ({lo}, {hi}) at B={B!r}")

    def central(step):
        Lp = period_integral(orbit_spec(model, B + step, branch), QUAD_TOL).L
        Lm = period_integral(orbit_spec(model, B - step, branch), QUAD_TOL).L
        # rounding floor of the quotient, given quadrature accuracy QUAD_TOL
        return (Lp - Lm) / (2.0 * step), 4.0 * QUAD_TOL * max(Lp, Lm) / step

    d_prev, _ = central(h)
    r_prev = None
    for _ in range(max_halvings):
        h *= 0.5
        d, noise = central(h)
        r = (4.0 * d - d_prev) / 3.0
        if r_prev is not None and abs(r - r_prev) <= max(tol * abs(r), noise):
            return float(r)
        d_prev, r_prev = d, r
    raise NoConvergence(f"Richardson estimates of dL/dB did not agree to {tol:g} at B={B!r}")
