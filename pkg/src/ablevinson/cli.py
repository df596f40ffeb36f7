"""Command-line front end.

Subcommands: ``phase-shift``, ``levinson``, ``cross-section``, ``soliton`` and
``models``.  Exit codes: 0 success, 1 a checked relation failed, 2 invalid
input, 3 numerical failure.  Every number is written with 17 significant
digits and the output depends only on the arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from ._fmt import dumps17, fmt17
from .errors import ABError, DomainError, ModelError, NumericalError
from .levinson import LevinsonReport, analytic_lhs, default_tolerance, reports_to_json, verify
from .observables import cross_section_rows, shells_converged
from .potentials import (
    MODEL_CATALOG,
    ABModel,
    SolitonParams,
    make_bp_soliton,
    make_centrifugal,
    make_conventional_ab,
    make_flux_well,
    make_free,
    make_pure_flux,
    make_returned_flux,
    read_table,
)
from .radial import default_k_grid, phase_sweep

__all__ = ["build_model", "build_parser", "main", "parse_m_range"]

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
MODEL_NAMES = sorted(MODEL_CATALOG) + ["table"]
_RANGE_FLAGS = ("--m-range",)


class _Invalid(Exception):
    """Raised for arguments that fail validation."""


def parse_m_range(text: str) -> list[int]:
    """'a:b' (inclusive) or a single integer."""
    try:
        if ":" in text:
            lo, hi = (int(p) for p in text.split(":"))
        else:
            lo = hi = int(text)
    except ValueError:
        raise _Invalid(f"m range must be 'a:b' or an integer, got {text!r}") from None
    if lo > hi:
        raise _Invalid(f"empty m range {text!r}")
    return list(range(lo, hi + 1))


def _flux_pair(args) -> tuple[float | None, float | None]:
    """alpha and beta in units of 2 pi, with --flux0 (radians) as an alternative to --alpha."""
    alpha = args.alpha
    if args.flux0 is not None:
        if alpha is not None:
            raise _Invalid("give either --alpha or --flux0, not both")
        alpha = args.flux0 / (2.0 * math.pi)
    return alpha, args.beta


def build_model(args) -> ABModel:
    """Model from parsed arguments; missing parameters take the catalog defaults."""
    name = args.model
    if name == "table":
        if not args.file:
            raise _Invalid("--model table needs --file")
        return read_table(args.file)
    defaults = dict(MODEL_CATALOG[name][1])
    R = args.R if args.R is not None else defaults.get("R", 1.0)
    alpha, beta = _flux_pair(args)
    if name == "free":
        return make_free(R)
    if name == "centrifugal":
        return make_centrifugal(
            defaults["alpha"] if alpha is None else alpha,
            defaults["beta"] if beta is None else beta,
            R,
        )
    if name == "returned-flux":
        phi0 = defaults["Phi0"] if alpha is None else 2.0 * math.pi * alpha
        return make_returned_flux(phi0, R)
    if name == "conventional":
        if args.B is not None and beta is not None:
            raise _Invalid("give either --B or --beta, not both")
        B = args.B if args.B is not None else defaults["B"]
        if beta is not None:
            B = 2.0 * beta / (R * R)
        return make_conventional_ab(B, R)
    if name == "pure-flux":
        return make_pure_flux(defaults["alpha"] if alpha is None else alpha, R)
    if name == "soliton":
        q = args.q if args.q is not None else defaults["q"]
        return make_bp_soliton(SolitonParams(q=q, R=R, phi0=args.phi0))
    if name == "flux-well":
        return make_flux_well(
            defaults["alpha"] if alpha is None else alpha,
            defaults["V0"] if args.V0 is None else args.V0,
            R,
        )
    raise _Invalid(f"unknown model {name!r}")


def _finite(kind):
    def convert(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value {text!r}") from None
        if kind is float and not math.isfinite(value):
            raise argparse.ArgumentTypeError(f"value must be finite, got {text!r}")
        return value

    return convert


def _model_options(parser: argparse.ArgumentParser, default: str | None = None) -> None:
    g = parser.add_argument_group("model")
    g.add_argument("--model", choices=MODEL_NAMES, default=default, required=default is None)
    g.add_argument("--alpha", type=_finite(float), help="winding at the origin, units of 2 pi")
    g.add_argument("--beta", type=_finite(float), help="winding at infinity, units of 2 pi")
    g.add_argument("--flux0", type=_finite(float), help="flux at the origin in radians")
    g.add_argument("--B", type=_finite(float), help="field strength (conventional model)")
    g.add_argument("--V0", type=_finite(float), help="well depth (flux-well model)")
    g.add_argument("--R", type=_finite(float), help="length scale")
    g.add_argument("--q", type=_finite(int), help="soliton charge")
    g.add_argument("--phi0", type=_finite(float), default=0.0, help="soliton phase")
    g.add_argument("--file", help="CSV table with header rho,V,Phi (model 'table')")


def _run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--refine", type=_finite(float), default=1.0, help="grid refinement factor")
    parser.add_argument("--workers", type=_finite(int), default=1, help="threads per sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ablevinson",
        description="Phase shifts, Levinson relations and cross sections for Aharonov-Bohm fields.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phase-shift", help="delta_m(k) on a wavenumber grid")
    _model_options(p)
    p.add_argument("--m", type=_finite(int), help="single channel")
    p.add_argument("--m-range", help="channels a:b (inclusive)")
    p.add_argument("--k-min", type=_finite(float), default=0.01)
    p.add_argument("--k-max", type=_finite(float), default=50.0)
    p.add_argument("--k-points", type=_finite(int), default=64)
    spacing = p.add_mutually_exclusive_group()
    spacing.add_argument("--log", dest="log", action="store_true", default=True, help="log spacing (default)")
    spacing.add_argument("--linear", dest="log", action="store_false", help="uniform spacing")
    p.add_argument("--output", default="phase_shift.csv", help="CSV path; the JSON sidecar goes next to it")
    _run_options(p)

    p = sub.add_parser("levinson", help="verify the Levinson relation per channel")
    _model_options(p)
    p.add_argument("--m-range", default="-3:3")
    p.add_argument("--tol", type=_finite(float), help="absolute tolerance in radians")
    p.add_argument("--output", help="JSON report path")
    _run_options(p)

    p = sub.add_parser("cross-section", help="partial and truncated total cross sections")
    _model_options(p)
    p.add_argument("--k", type=_finite(float), default=1.0)
    p.add_argument("--m-max", type=_finite(int), default=10)
    p.add_argument("--output", help="CSV path (default: standard output)")
    _run_options(p)

    p = sub.add_parser("soliton", help="soliton phase drops against the tabulated values")
    p.add_argument("--q", type=_finite(int), required=True, help="soliton charge, q >= 1")
    p.add_argument("--R", type=_finite(float), default=1.0)
    p.add_argument("--phi0", type=_finite(float), default=0.0)
    p.add_argument("--m-range", default="-4:4")
    p.add_argument("--tol", type=_finite(float), help="absolute tolerance in radians (default 2e-2 pi)")
    p.add_argument("--output", help="JSON report path")
    _run_options(p)

    sub.add_parser("models", help="list the built-in models")
    return parser


def _check_run(args) -> None:
    if args.refine <= 0.0:
        raise _Invalid("--refine must be positive")
    if args.workers < 1:
        raise _Invalid("--workers must be at least 1")
    tol = getattr(args, "tol", None)
    if tol is not None and tol <= 0.0:
        raise _Invalid("--tol must be positive")


def _channels(args) -> list[int]:
    if getattr(args, "m", None) is not None and args.m_range is not None:
        raise _Invalid("give either --m or --m-range, not both")
    if getattr(args, "m", None) is not None:
        return [args.m]
    if args.m_range is None:
        raise _Invalid("a channel is required (--m or --m-range)")
    return parse_m_range(args.m_range)


def _k_values(args) -> np.ndarray:
    if args.k_min <= 0.0:
        raise _Invalid("--k-min must be positive")
    if args.k_points < 1:
        raise _Invalid("--k-points must be at least 1")
    if args.k_max < args.k_min or (args.k_points > 1 and args.k_max == args.k_min):
        raise _Invalid("--k-max must exceed --k-min")
    if args.k_points == 1:
        return np.array([args.k_min])
    if args.log:
        return np.logspace(math.log10(args.k_min), math.log10(args.k_max), args.k_points)
    return np.linspace(args.k_min, args.k_max, args.k_points)


def _write(path: str | None, text: str, stdout) -> None:
    if path is None:
        stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_phase_shift(args, stdout) -> int:
    model = build_model(args)
    ms = _channels(args)
    k_user = _k_values(args)
    _check_run(args)
    # the sweep runs on the default grid as well, which fixes the branch and both limits
    grid = np.union1d(default_k_grid(model.R), k_user)
    rows, channels = [], []
    for m in ms:
        curve = phase_sweep(model, m, grid, refine=args.refine, workers=args.workers)
        idx = np.searchsorted(curve.k_grid, k_user)
        for k, d in zip(k_user, curve.delta[idx]):
            rows.append([str(m), fmt17(k), fmt17(d)])
        channels.append(
            {
                "m": m,
                "nu": curve.nu,
                "mu": curve.mu,
                "delta_at_zero": curve.delta_at_zero,
                "delta_at_infinity": curve.delta_at_infinity,
                "lhs": curve.lhs,
            }
        )
    out = Path(args.output)
    out.write_text(_csv_text(["m", "k", "delta_rad"], rows))
    sidecar = {"model": model.name, "params": dict(model.params), "channels": channels}
    out.with_suffix(".json").write_text(dumps17(sidecar) + "\n")
    return EXIT_OK


def _report_table(reports: Sequence[LevinsonReport], expected=None) -> str:
    head = ["m", "lhs", "rhs"] + (["expected"] if expected is not None else [])
    head += ["residual", "n_bound", "half_bound", "nu", "mu", "passed", "caveat"]
    lines = ["  ".join(head)]
    for i, r in enumerate(reports):
        cells = [str(r.m), fmt17(r.lhs), fmt17(r.rhs)]
        if expected is not None:
            cells.append(fmt17(expected[i]))
        cells += [fmt17(r.residual), str(r.n_bound), str(r.half_bound).lower(), fmt17(r.nu), fmt17(r.mu)]
        cells += [str(r.passed).lower(), r.caveat or ""]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _numerical_failure(reports: Sequence[LevinsonReport]) -> bool:
    return any(r.caveat and r.caveat.startswith("numerical failure") for r in reports)


def cmd_levinson(args, stdout) -> int:
    model = build_model(args)
    ms = parse_m_range(args.m_range)
    _check_run(args)
    tol = args.tol if args.tol is not None else default_tolerance(model)
    reports = verify(model, ms, tol, refine=args.refine, workers=args.workers)
    stdout.write(_report_table(reports))
    if args.output:
        Path(args.output).write_text(reports_to_json(reports))
    if _numerical_failure(reports):
        return EXIT_NUMERICAL
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_cross_section(args, stdout) -> int:
    model = build_model(args)
    _check_run(args)
    if args.k <= 0.0:
        raise _Invalid("--k must be positive")
    if args.m_max < 1:
        raise _Invalid("--m-max must be at least 1")
    rows = cross_section_rows(model, args.k, args.m_max, refine=args.refine, workers=args.workers)
    total = math.fsum(r.sigma_partial for r in rows)
    converged = shells_converged(rows)
    text = _csv_text(
        ["m", "delta_rad", "sigma_partial"],
        [[str(r.m), fmt17(r.delta), fmt17(r.sigma_partial)] for r in rows],
    )
    text += f"# total={fmt17(total)} converged={str(converged).lower()}\n"
    _write(args.output, text, stdout)
    return EXIT_OK


def cmd_soliton(args, stdout) -> int:
    if args.q < 1:
        raise _Invalid(f"--q must be at least 1, got {args.q}")
    ms = parse_m_range(args.m_range)
    _check_run(args)
    model = make_bp_soliton(SolitonParams(q=args.q, R=args.R, phi0=args.phi0))
    tol = args.tol if args.tol is not None else default_tolerance(model)
    reports = verify(model, ms, tol, refine=args.refine, workers=args.workers)
    expected = [analytic_lhs(model, m) for m in ms]
    stdout.write(_report_table(reports, expected))
    if args.output:
        Path(args.output).write_text(reports_to_json(reports))
    if _numerical_failure(reports):
        return EXIT_NUMERICAL
    agree = all(
        abs(r.lhs - r.rhs) <= tol and abs(r.lhs - e) <= tol and abs(r.rhs - e) <= tol
        for r, e in zip(reports, expected)
    )
    return EXIT_OK if agree else EXIT_FAILED


def cmd_models(args, stdout) -> int:
    lines = ["name  family  alpha  beta  R  parameters"]
    for name, (builder, kw) in MODEL_CATALOG.items():
        model = builder(**kw)
        params = " ".join(f"{k}={v if isinstance(v, int) else fmt17(v)}" for k, v in kw.items())
        lines.append(
            f"{name}  {model.family}  {fmt17(model.alpha)}  {fmt17(model.beta)}  {fmt17(model.R)}  {params}"
        )
    lines.append("table  table  (from file)  (from file)  1.0  file=<csv with header rho,V,Phi>")
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


_COMMANDS = {
    "phase-shift": cmd_phase_shift,
    "levinson": cmd_levinson,
    "cross-section": cmd_cross_section,
    "soliton": cmd_soliton,
    "models": cmd_models,
}


def _join_ranges(argv: Sequence[str]) -> list[str]:
    """Glue '--m-range -3:3' into '--m-range=-3:3' so argparse does not read -3:3 as a flag."""
    out: list[str] = []
    it = iter(argv)
    for a in it:
        if a in _RANGE_FLAGS:
            nxt = next(it, None)
            out.append(a if nxt is None else f"{a}={nxt}")
        else:
            out.append(a)
    return out


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(_join_ranges(sys.argv[1:] if argv is None else argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, stdout)
    except (_Invalid, ModelError, DomainError) as exc:
        stderr.write(f"ablevinson: invalid input: {exc}\n")
        return EXIT_INVALID
    except (NumericalError, ABError) as exc:
        stderr.write(f"ablevinson: numerical failure ({type(exc).__name__}): {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        stderr.write(f"ablevinson: {exc}\n")
        return EXIT_INVALID
