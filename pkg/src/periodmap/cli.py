"""Command-line entry point ``pmap``."""

from __future__ import annotations

import argparse
import re
import sys

from . import kernels, lab, verify
from .errors import PeriodMapError
from .floquet import floquet_report
from .hill import spectral_counts
from .integrate import RTOL, solve_orbit
from .model import Branch, Model, check_branch, orbit_spec
from .quadrature import DEFAULT_TOL, period_integral


def _real_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}")


def _branch(model: Model, B: float, tag):
    return check_branch(model, tag if tag else lab.infer_branch(model, B))


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_period(args) -> int:
    model = Model(args.k)
    spec = orbit_spec(model, args.B, _branch(model, args.B, args.branch))
    L_quad = L_shoot = rel = None
    if args.method in ("quad", "both"):
        L_quad = period_integral(spec, args.tol).L
    if args.method in ("shoot", "both"):
        L_shoot = solve_orbit(spec, tol=min(args.tol, RTOL)).L
    if L_quad is not None and L_shoot is not None:
        rel = abs(L_quad - L_shoot) / L_quad
    out = {"k": model.k, "B": spec.B, "branch": spec.branch.value, "b1": spec.b1,
           "b2": spec.b2, "L_quad": L_quad, "L_shoot": L_shoot, "rel_diff": rel}
    _write(lab.to_json(out), args.output)
    return 0


def cmd_theta(args) -> int:
    model = Model(args.k)
    orbit = solve_orbit(orbit_spec(model, args.B, _branch(model, args.B, args.branch)))
    rep = floquet_report(orbit)
    out = {"theta": rep.theta, "dLdB_fd": rep.dLdB_fd, "residual": rep.residual,
           "discriminant": rep.discriminant, "det_monodromy": rep.det_monodromy}
    _write(lab.to_json(out), args.output)
    return 0


def cmd_spectrum(args) -> int:
    model = Model(args.k)
    orbit = solve_orbit(orbit_spec(model, args.B, _branch(model, args.B, args.branch)))
    rep = spectral_counts(orbit, args.grid, args.m, method=args.eig_method)
    out = {"eigenvalues": rep.eigenvalues, "extrapolated": rep.extrapolated_eigenvalues,
           "n_neg": rep.n_neg, "z_zero": rep.z_zero, "zero_counts": rep.zero_counts}
    _write(lab.to_json(out), args.output)
    return 0


def cmd_sweep(args) -> int:
    opts = lab.SweepOptions(spectra=not args.no_spectra, grid=args.grid,
                            eig_method=args.eig_method, threads=args.threads)
    rep = lab.sweep(args.k, args.branch, args.B_min, args.B_max, args.n, opts, args.spacing)
    _write(rep.to_csv() if args.out == "csv" else rep.to_json(), args.output)
    return 0


def cmd_phase(args) -> int:
    portrait = lab.phase_portrait(args.k, args.B, args.samples, args.threads)
    for o in portrait.orbits:
        if o.get("error"):
            print(f"pmap: orbit {o['orbit_id']} (B={o['B']}): {o['error']}", file=sys.stderr)
    _write(portrait.to_csv(not args.no_separatrix), args.output)
    return 0 if all(not o.get("error") for o in portrait.orbits) else 1


def cmd_verify(args) -> int:
    report = verify.run(args.k, quick=args.quick, threads=args.threads)
    for r in report["_results"]:
        print(r.line(), file=sys.stderr)
    _write(verify.report_json(report), args.output)
    if report["all_passed"]:
        return 0
    failed = [str(r.id) for r in report["_results"] if not r.passed]
    print(f"pmap: {len(failed)} criteria failed: {', '.join(failed)}", file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pmap", description="Period map of -phi'' + phi - phi**k = 0.")
    p.add_argument("--version", action="version",
                   version=f"pmap ({'compiled' if kernels.COMPILED else 'pure-python'} kernels)")
    sub = p.add_subparsers(dest="command", required=True)

    def orbit_args(sp):
        sp.add_argument("--k", type=float, required=True)
        sp.add_argument("--B", type=float, required=True)
        sp.add_argument("--branch", choices=[b.value for b in Branch],
                        help="default: positive for B < 0, signchanging for B > 0")
        sp.add_argument("-o", "--output", help="write to file instead of stdout")

    sp = sub.add_parser("period", help="period L by quadrature and/or shooting")
    orbit_args(sp)
    sp.add_argument("--method", choices=["quad", "shoot", "both"], default="both")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.set_defaults(func=cmd_period)

    sp = sub.add_parser("theta", help="Floquet constant, dL/dB and monodromy invariants")
    orbit_args(sp)
    sp.set_defaults(func=cmd_theta)

    sp = sub.add_parser("spectrum", help="low eigenvalues of the linearised operator")
    orbit_args(sp)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--m", type=int, default=7)
    sp.add_argument("--eig-method", choices=["jacobi", "lapack"], default="jacobi")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("sweep", help="verification sweep over a B-grid")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--branch", choices=[b.value for b in Branch], required=True)
    sp.add_argument("--B-min", dest="B_min", type=float, required=True)
    sp.add_argument("--B-max", dest="B_max", type=float, required=True)
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--out", choices=["csv", "json"], default="csv")
    sp.add_argument("--spacing", choices=["geometric", "uniform"], default="geometric")
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--eig-method", choices=["jacobi", "lapack"], default="lapack")
    sp.add_argument("--no-spectra", action="store_true")
    sp.add_argument("--threads", type=int, default=None, help="overrides PMAP_THREADS")
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("phase", help="sampled orbits and separatrix as CSV")
    sp.add_argument("--k", type=float, required=True)
    sp.add_argument("--B", type=_real_list, required=True, help="comma-separated energy levels")
    sp.add_argument("--samples", type=int, default=256)
    sp.add_argument("--out", choices=["csv"], default="csv")
    sp.add_argument("--no-separatrix", action="store_true")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--k", type=_real_list, default=None, help="comma-separated exponents")
    sp.add_argument("--quick", action="store_true")
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("-o", "--output")
    sp.set_defaults(func=cmd_verify)
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    """Rewrite ``--B -0.1,-0.2`` as ``--B=-0.1,-0.2``; argparse reads the list as a flag."""
    out: list[str] = []
    for tok in argv:
        if (out and out[-1].startswith("--") and "=" not in out[-1]
                and re.match(r"^-[\d.]", tok)):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_negative_values(argv))
    try:
        return args.func(args)
    except PeriodMapError as exc:
        print(f"pmap: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"pmap: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
