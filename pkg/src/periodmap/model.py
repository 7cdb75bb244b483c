"""The equation -phi'' + phi - phi**k = 0, its first integral and orbit branches."""

from __future__ import annotations

import enum
import math
import sys
from dataclasses import dataclass

from .errors import BranchUnavailable, DegenerateOrbit, DomainError, NoConvergence

ODD_TOL = 1e-12
ROOT_TOL = 1e-13


class Branch(str, enum.Enum):
    POSITIVE = "positive"
    SIGN_CHANGING = "signchanging"

    @classmethod
    def parse(cls, value: "str | Branch") -> "Branch":
        if isinstance(value, Branch):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for b in cls:
            if b.value == key:
                return b
        raise ValueError(f"unknown branch {value!r}")


@dataclass(frozen=True)
class Model:
    """Exponent ``k > 1`` of the nonlinearity."""

    k: float

    def __post_init__(self):
        k = float(self.k)
        if not math.isfinite(k) or k <= 1.0:
            raise ValueError(f"k must be a finite real > 1, got {self.k!r}")
        object.__setattr__(self, "k", k)

    @property
    def is_odd_integer(self) -> bool:
        r = round(self.k)
        return abs(self.k - r) < ODD_TOL and r % 2 == 1

    @property
    def is_integer(self) -> bool:
        return abs(self.k - round(self.k)) < ODD_TOL

    @property
    def center_energy(self) -> float:
        """Energy of the center (1, 0); lower end of the positive range."""
        return (1.0 - self.k) / (2.0 * (self.k + 1.0))

    @property
    def linear_period(self) -> float:
        """Small-amplitude period 2*pi/sqrt(k-1) of oscillations about the center."""
        return 2.0 * math.pi / math.sqrt(self.k - 1.0)

    def power(self, phi: float, p: float) -> float:
        """``phi**p`` for the exponents in play (k, k+1, k-1).

        Negative bases are only allowed for integer k, where the power is
        taken with the integer exponent.
        """
        if phi < 0.0:
            if not self.is_integer:
                raise DomainError(f"phi={phi} < 0 with non-integer k={self.k}")
            return float(phi) ** round(p)
        return float(phi) ** p

    def G(self, h: float, B: float) -> float:
        """Twice the kinetic energy at height h: xi**2 on the level set E = B."""
        k = self.k
        return -2.0 * self.power(h, k + 1.0) / (k + 1.0) + h * h + 2.0 * B

    def dG(self, h: float) -> float:
        return 2.0 * (h - self.power(h, self.k))


@dataclass(frozen=True)
class OrbitSpec:
    """Branch, energy level and turning points; identifies one periodic orbit."""

    model: Model
    branch: Branch
    B: float
    b1: float
    b2: float

    @property
    def k(self) -> float:
        return self.model.k

    @property
    def amplitude(self) -> float:
        return self.b2 - self.b1

    @property
    def phi2_at_max(self) -> float:
        """phi''(0) = b2 - b2**k, the curvature at the maximum."""
        return self.b2 - self.model.power(self.b2, self.model.k)


def energy(model: Model, phi: float, xi: float) -> float:
    """First integral xi**2/2 - phi**2/2 + phi**(k+1)/(k+1)."""
    k = model.k
    return 0.5 * xi * xi - 0.5 * phi * phi + model.power(phi, k + 1.0) / (k + 1.0)


def check_branch(model: Model, branch: "Branch | str") -> Branch:
    branch = Branch.parse(branch)
    if branch is Branch.SIGN_CHANGING and not model.is_odd_integer:
        raise BranchUnavailable(
            f"sign-changing orbits need an odd integer k, got k={model.k}"
        )
    return branch


def admissible_range(model: Model, branch: "Branch | str") -> tuple[float, float]:
    """Open interval of energy levels carrying periodic orbits of ``branch``."""
    branch = check_branch(model, branch)
    if branch is Branch.POSITIVE:
        return (model.center_energy, 0.0)
    return (0.0, math.inf)


def _refine_root(model: Model, B: float, lo: float, hi: float) -> float:
    """Zero of G in [lo, hi] (sign change assumed): bisection + safeguarded Newton."""
    g_lo = model.G(lo, B)
    g_hi = model.G(hi, B)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise NoConvergence(f"no sign change of G on [{lo}, {hi}]")
    x = 0.5 * (lo + hi)
    for _ in range(400):
        g = model.G(x, B)
        if g == 0.0:
            return x
        if (g > 0) == (g_lo > 0):
            lo, g_lo = x, g
        else:
            hi = x
        d = model.dG(x)
        x_new = x - g / d if d != 0.0 else math.nan
        if not lo < x_new < hi:
            x_new = 0.5 * (lo + hi)
        if x_new == x or hi - lo <= 4.0 * math.ulp(max(abs(lo), abs(hi))):
            return x_new
        x = x_new
    raise NoConvergence("turning-point iteration did not converge")


def turning_points(
    model: Model, B: float, branch: "Branch | str" = Branch.POSITIVE, tol: float = ROOT_TOL
) -> tuple[float, float]:
    """Minimum b1 and maximum b2 of the orbit at energy B (simple zeros of G)."""
    branch = check_branch(model, branch)
    lo_B, hi_B = admissible_range(model, branch)
    B = float(B)
    if not lo_B < B < hi_B:
        raise DegenerateOrbit(
            f"B={B!r} is outside the open interval ({lo_B}, {hi_B}) for the {branch.value} branch"
        )
    hmax = 2.0
    for _ in range(2000):
        if model.G(hmax, B) < 0.0:
            break
        hmax *= 2.0
    else:
        raise NoConvergence("could not bracket the upper turning point")
    if branch is Branch.POSITIVE:
        if model.G(1.0, B) <= 0.0:
            raise DegenerateOrbit(f"B={B!r} does not exceed the center energy")
        b1 = _refine_root(model, B, 0.0, 1.0)
        b2 = _refine_root(model, B, 1.0, hmax)
    else:
        b2 = _refine_root(model, B, 0.0, hmax)
        b1 = -b2
    for b in (b1, b2):
        # rounding floor: size of the largest term of G at the root
        scale = b * b + 2.0 * abs(B) + 2.0 * abs(b) ** (model.k + 1.0) / (model.k + 1.0)
        if abs(model.G(b, B)) > max(tol, 8.0 * sys.float_info.epsilon * scale):
            raise NoConvergence(f"|G({b})| = {abs(model.G(b, B)):.3g} exceeds tol")
    if not b1 < b2:
        raise DegenerateOrbit(f"turning points collapsed at B={B!r}")
    return b1, b2


def orbit_spec(
    model: "Model | float", B: float, branch: "Branch | str" = Branch.POSITIVE,
    tol: float = ROOT_TOL,
) -> OrbitSpec:
    if not isinstance(model, Model):
        model = Model(model)
    branch = check_branch(model, branch)
    b1, b2 = turning_points(model, B, branch, tol)
    return OrbitSpec(model, branch, float(B), b1, b2)
