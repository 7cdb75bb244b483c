"""B-grid sweeps, monotonicity reports, phase-portrait data and output formatting."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import PeriodMapError
from .floquet import theta as floquet_theta
from .hill import spectral_counts
from .integrate import solve_orbit
from .model import Branch, Model, admissible_range, check_branch, energy, orbit_spec
from .quadrature import dLdB_fd, period_integral

TEO1_TOL = 1e-6
METHOD_TOL = 1e-8
CSV_COLUMNS = ["k", "branch", "B", "L", "theta", "dLdB_fd", "residual", "n_neg", "z_zero", "status"]


def fmt(x) -> str:
    """Fixed 17-significant-digit scientific notation."""
    return format(float(x), ".16e")


def to_json(obj, indent: int = 2) -> str:
    """Deterministic JSON: key order as given, floats via :func:`fmt`, NaN/inf as null."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if isinstance(o, (bool, np.bool_)) or o is None:
            return json.dumps(None if o is None else bool(o))
        if isinstance(o, (int, np.integer)):
            return str(int(o))
        if isinstance(o, (float, np.floating)):
            return fmt(o) if math.isfinite(o) else "null"
        if isinstance(o, str):
            return json.dumps(o, ensure_ascii=False)
        if isinstance(o, np.ndarray):
            o = o.tolist()
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = [f"{pad}{json.dumps(str(key))}: {enc(v, level + 1)}" for key, v in o.items()]
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        if isinstance(o, (list, tuple)):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        raise TypeError(f"cannot encode {type(o).__name__}")

    return enc(obj, 0) + "\n"


def thread_count(threads: "int | None" = None) -> int:
    if threads is None:
        threads = int(os.environ.get("PMAP_THREADS", "0") or 0)
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def parallel_map(fn, items, threads: "int | None" = None) -> list:
    """Order-preserving map; rows are independent and the kernels release the GIL."""
    n = thread_count(threads)
    if n == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def infer_branch(model: Model, B: float) -> Branch:
    return Branch.POSITIVE if B < 0 else Branch.SIGN_CHANGING


def b_grid(branch: Branch, B_min: float, B_max: float, n: int, spacing: str = "geometric"):
    """Ascending grid; geometric spacing clusters points toward B = 0."""
    if n < 2:
        raise ValueError("n_points must be at least 2")
    if spacing == "uniform":
        return np.linspace(B_min, B_max, n)
    if spacing != "geometric":
        raise ValueError(f"unknown spacing {spacing!r}")
    if branch is Branch.POSITIVE:
        if not B_min < B_max < 0:
            raise ValueError("geometric positive-branch grid needs B_min < B_max < 0")
        return -np.geomspace(-B_min, -B_max, n)
    if not 0 < B_min < B_max:
        raise ValueError("geometric sign-changing grid needs 0 < B_min < B_max")
    return np.geomspace(B_min, B_max, n)


@dataclass
class SweepOptions:
    spectra: bool = True
    grid: int = 256
    eig_method: str = "lapack"
    n_samples: int = 2048
    threads: "int | None" = None


@dataclass
class SweepRow:
    k: float
    branch: str
    B: float
    L: float = math.nan
    L_shoot: float = math.nan
    theta: float = math.nan
    dLdB_fd: float = math.nan
    residual: float = math.nan
    n_neg: int = -1
    z_zero: int = -1
    flags: dict = field(default_factory=dict)
    error: "str | None" = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.flags.values())

    @property
    def status(self) -> str:
        if self.error is not None:
            return f"error:{self.error.split(':', 1)[0]}"
        failed = [name for name, ok in self.flags.items() if not ok]
        return "pass" if not failed else "fail:" + "|".join(failed)

    def as_dict(self) -> dict:
        return {
            "k": self.k, "branch": self.branch, "B": self.B, "L": self.L,
            "L_shoot": self.L_shoot, "theta": self.theta, "dLdB_fd": self.dLdB_fd,
            "residual": self.residual, "n_neg": self.n_neg, "z_zero": self.z_zero,
            "flags": dict(self.flags), "status": self.status, "error": self.error,
        }


def evaluate_row(model: Model, branch: Branch, B: float, options: SweepOptions) -> SweepRow:
    row = SweepRow(model.k, branch.value, float(B))
    try:
        spec = orbit_spec(model, B, branch)
        row.L = period_integral(spec).L
        orbit = solve_orbit(spec, n_samples=options.n_samples)
        row.L_shoot = orbit.L
        row.theta = floquet_theta(orbit)
        row.dLdB_fd = dLdB_fd(model, branch, B)
        row.residual = abs(row.dLdB_fd + row.theta)
        positive = branch is Branch.POSITIVE
        row.flags["methods_agree"] = abs(row.L - row.L_shoot) / row.L <= METHOD_TOL
        row.flags["lemma_teo1"] = row.residual <= TEO1_TOL * max(1.0, abs(row.theta))
        row.flags["theta_sign"] = row.theta < 0 if positive else row.theta > 0
        if options.spectra:
            rep = spectral_counts(orbit, options.grid, method=options.eig_method)
            row.n_neg, row.z_zero = rep.n_neg, rep.z_zero
            row.flags["spectral_counts"] = (rep.n_neg, rep.z_zero) == ((1, 1) if positive else (2, 1))
            row.flags["sign_consistency"] = (row.theta > 0) == (rep.n_neg == 2)
    except PeriodMapError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


@dataclass
class VerificationReport:
    k: float
    branch: str
    grid: dict
    rows: list

    def _ok_rows(self):
        return [r for r in self.rows if r.error is None]

    @property
    def monotone(self) -> bool:
        rows = self._ok_rows()
        if len(rows) < 2:
            return False
        L = np.array([r.L for r in rows])
        d = np.diff(L)
        return bool(np.all(d > 0)) if self.branch == Branch.POSITIVE.value else bool(np.all(d < 0))

    def _flag(self, name) -> "bool | None":
        """None when no row computed the flag (e.g. spectra disabled)."""
        rows = [r for r in self._ok_rows() if name in r.flags]
        if not rows:
            return None if self._ok_rows() else False
        return all(bool(r.flags[name]) for r in rows)

    @property
    def summary(self) -> dict:
        return {
            "monotone": self.monotone,
            "lemma_teo1_ok": self._flag("lemma_teo1"),
            "methods_agree_ok": self._flag("methods_agree"),
            "theta_sign_ok": self._flag("theta_sign"),
            "spectral_counts_ok": self._flag("spectral_counts"),
            "sign_consistency_ok": self._flag("sign_consistency"),
            "failed_rows": sum(1 for r in self.rows if r.error is not None),
        }

    def as_dict(self) -> dict:
        return {
            "k": self.k, "branch": self.branch, "grid": self.grid,
            "summary": self.summary, "rows": [r.as_dict() for r in self.rows],
        }

    def to_json(self) -> str:
        return to_json(self.as_dict())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([fmt(r.k), r.branch, fmt(r.B), fmt(r.L), fmt(r.theta), fmt(r.dLdB_fd),
                        fmt(r.residual), r.n_neg, r.z_zero, r.status])
        return buf.getvalue()


def sweep(k: float, branch: "Branch | str", B_min: float, B_max: float, n_points: int,
          options: "SweepOptions | None" = None, spacing: str = "geometric") -> VerificationReport:
    """Evaluate every B on the grid; failing rows are recorded, not raised."""
    options = options or SweepOptions()
    model = Model(k)
    branch = check_branch(model, branch)
    grid = b_grid(branch, B_min, B_max, n_points, spacing)
    rows = parallel_map(lambda B: evaluate_row(model, branch, float(B), options),
                        list(grid), options.threads)
    return VerificationReport(
        model.k, branch.value,
        {"B_min": float(B_min), "B_max": float(B_max), "n_points": n_points, "spacing": spacing},
        rows,
    )


def separatrix(model: Model, n: int = 200) -> np.ndarray:
    """Points (phi, xi) on the zero-energy level through the saddle."""
    k = model.k
    top = ((k + 1.0) / 2.0) ** (1.0 / (k - 1.0))
    phi = top * (1.0 - np.cos(np.linspace(0.0, math.pi, n))) / 2.0
    xi = np.sqrt(np.maximum(phi * phi - 2.0 * phi ** (k + 1.0) / (k + 1.0), 0.0))
    pts = np.concatenate([np.column_stack((phi, xi)), np.column_stack((phi[::-1], -xi[::-1]))])
    if model.is_odd_integer:
        pts = np.concatenate([pts, -pts])
    return pts


@dataclass
class PhasePortrait:
    k: float
    orbits: list
    separatrix: np.ndarray

    def to_csv(self, include_separatrix: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["orbit_id", "x", "phi", "dphi"])
        for o in self.orbits:
            if o.get("error"):
                continue
            for x, p, d in zip(o["x"], o["phi"], o["dphi"]):
                w.writerow([o["orbit_id"], fmt(x), fmt(p), fmt(d)])
        if include_separatrix:
            for p, d in self.separatrix:
                w.writerow(["separatrix", "", fmt(p), fmt(d)])
        return buf.getvalue()


def phase_portrait(k: float, B_list, samples: int = 256, threads: "int | None" = None) -> PhasePortrait:
    """One sampled loop per energy level, plus the separatrix for plotting."""
    model = Model(k)

    def one(item):
        i, B = item
        entry = {"orbit_id": i, "B": float(B)}
        try:
            branch = check_branch(model, infer_branch(model, B))
            orbit = solve_orbit(orbit_spec(model, B, branch), n_samples=samples)
            entry.update(branch=branch.value, x=orbit.x[:-1], phi=orbit.phi[:-1],
                         dphi=orbit.dphi[:-1])
        except PeriodMapError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        return entry

    orbits = parallel_map(one, list(enumerate(B_list)), threads)
    return PhasePortrait(model.k, orbits, separatrix(model))


def level_set_error(model: Model, B: float, phi, dphi) -> float:
    return max(abs(energy(model, p, d) - B) for p, d in zip(phi, dphi))


__all__ = [
    "SweepOptions", "SweepRow", "VerificationReport", "PhasePortrait", "admissible_range",
    "b_grid", "fmt", "phase_portrait", "sweep", "to_json", "separatrix",
]
