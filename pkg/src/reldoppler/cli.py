"""Command-line front end: ``reldoppler {eval,check,fit,witness,table}``.

Exit status is 0 on success or a passed check, 1 when a law fails an axiom
or does not have the form a fitter assumes, and 2 for usage, domain and
file errors.

Examples::

    reldoppler eval de --lambda 1 --v 0.6
    reldoppler check R --law lf --op av
    reldoppler table av --n-beta 300 --output av.csv
    reldoppler fit full --input de.csv --op-input av.csv
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .axioms import (
    DC_GRID,
    DEFAULT_GRID,
    GridSpec,
    check_DC,
    check_group_structure,
    check_LOI,
    check_M,
    check_R,
    witness_lf_vs_dstar,
)
from .errors import BisectionError, DomainError, ModelViolation, MonotonicityError, RelDopplerError
from .kinematics import (
    ASTAR,
    AV,
    DE,
    LF,
    CompositionLaw,
    DopplerLaw,
    Exponent,
    dstar_law,
    general_composition_law,
    general_doppler_law,
    u_lf_map,
)
from .monotone import MonotoneMap
from .recover import (
    HOMOGENEITY_PROBES,
    RecoverConfig,
    extract_f,
    fit_power_exponent,
    recover_representation,
)
from .tables import (
    TableFormatError,
    composition_law_from_table,
    doppler_law_from_table,
    read_composition_table,
    read_doppler_table,
    read_map_table,
    write_composition_table,
    write_doppler_table,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DOPPLER_KINDS = ("de", "lf", "dstar", "dgen")
COMPOSITION_KINDS = ("av", "astar", "agen")
WITNESS_MIN_GAP = 1e-6


class UsageError(RelDopplerError):
    """Flags that parse but do not fit together."""


@dataclass(frozen=True)
class LawSpec:
    """A law named on the command line.

    ``xi`` is required by dstar and dgen, ``u_source`` (a map CSV path or
    ``identity`` / ``u_lf``) by dgen and agen.
    """

    kind: str
    xi: Optional[float] = None
    u_source: Optional[str] = None

    def __post_init__(self):
        if self.kind not in DOPPLER_KINDS + COMPOSITION_KINDS:
            raise UsageError(f"unknown law {self.kind!r}")
        if self.kind in ("dstar", "dgen") and self.xi is None:
            raise UsageError(f"law {self.kind} needs --xi")
        if self.kind in ("dgen", "agen") and self.u_source is None:
            raise UsageError(f"law {self.kind} needs a speed map (--u / --op-u)")
        if self.xi is not None:
            Exponent(self.xi)

    @property
    def is_doppler(self) -> bool:
        return self.kind in DOPPLER_KINDS

    def speed_map(self) -> MonotoneMap:
        if self.u_source == "identity":
            return MonotoneMap.identity()
        if self.u_source == "u_lf":
            return u_lf_map()
        return read_map_table(self.u_source)

    def build(self) -> DopplerLaw | CompositionLaw:
        builtin = {"de": DE, "lf": LF, "av": AV, "astar": ASTAR}
        if self.kind in builtin:
            return builtin[self.kind]
        if self.kind == "dstar":
            return dstar_law(self.xi)
        if self.kind == "dgen":
            return general_doppler_law(self.speed_map(), self.xi)
        return general_composition_law(self.speed_map())


def _fmt(x: float) -> str:
    return f"{float(x):.15g}"


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        print(text)
        return
    try:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        raise TableFormatError(f"cannot write {output}: {exc}") from exc


def _law(args, kind: Optional[str], which: str) -> DopplerLaw | CompositionLaw:
    if kind is None:
        raise UsageError(f"this command needs --{which}")
    u_src = args.u if which == "law" else (args.op_u or args.u)
    spec = LawSpec(kind, args.xi, u_src)
    if which == "law" and not spec.is_doppler:
        raise UsageError(f"--law expects a Doppler law {DOPPLER_KINDS}, got {kind!r}")
    if which == "op" and spec.is_doppler:
        raise UsageError(f"--op expects a composition law {COMPOSITION_KINDS}, got {kind!r}")
    return spec.build()


def _grid(args, default: GridSpec) -> GridSpec:
    given = {
        "n_lambda": args.n_lambda,
        "n_beta": args.n_beta,
        "beta_max": args.beta_max,
        "spacing": args.spacing,
    }
    given = {k: v for k, v in given.items() if v is not None}
    lo = args.lambda_min if args.lambda_min is not None else default.lambda_range[0]
    hi = args.lambda_max if args.lambda_max is not None else default.lambda_range[1]
    params = {
        "n_lambda": default.n_lambda,
        "n_beta": default.n_beta,
        "beta_max": default.beta_max,
        "spacing": default.spacing,
        **given,
    }
    try:
        return GridSpec(lambda_range=(lo, hi), **params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_eval(args) -> int:
    spec = LawSpec(args.law, args.xi, args.u)
    law = spec.build()
    c = args.c
    if args.v is None:
        raise UsageError("eval needs --v")
    v = args.v / c
    if spec.is_doppler:
        if args.lam is None:
            raise UsageError(f"{spec.kind} is a Doppler law and needs --lambda")
        value = law(args.lam, v)
    else:
        if args.w is None:
            raise UsageError(f"{spec.kind} is a composition law and needs --w")
        value = law(v, args.w / c) * c
    print(_fmt(value))
    return EXIT_OK


def cmd_check(args) -> int:
    axiom = args.axiom
    if axiom == "R":
        grid = _grid(args, DEFAULT_GRID)
        tol = args.tol if args.tol is not None else 1e-9
        report = check_R(_law(args, args.law, "law"), _law(args, args.op, "op"), grid, tol)
    elif axiom == "M":
        report = check_M(_law(args, args.law, "law"), _law(args, args.op, "op"),
                         _grid(args, DEFAULT_GRID))
    elif axiom == "LOI":
        report = check_LOI(_law(args, args.law, "law"), _grid(args, DEFAULT_GRID),
                           tuple(args.scales))
    elif axiom == "DC":
        report = check_DC(_law(args, args.law, "law"), _grid(args, DC_GRID))
    else:
        tol = args.tol if args.tol is not None else 1e-12
        report = check_group_structure(_law(args, args.op, "op"), _grid(args, DEFAULT_GRID), tol)
    print(report.to_json())
    return EXIT_OK if report.passed else EXIT_FAIL


def _probes(lambdas: np.ndarray) -> tuple[float, ...]:
    lo, hi = float(lambdas[0]), float(lambdas[-1])
    if not lo <= 1.0 <= hi:
        raise TableFormatError(f"the wavelength grid [{lo}, {hi}] must contain 1")
    if lo <= min(HOMOGENEITY_PROBES) and max(HOMOGENEITY_PROBES) <= hi:
        return HOMOGENEITY_PROBES
    return (lo, hi)


def cmd_fit(args) -> int:
    lam, betas, values = read_doppler_table(args.input, speed_scale=args.c)
    L = doppler_law_from_table(lam, betas, values, tag=args.input)
    probes = _probes(lam)

    if args.kind == "exponent":
        samples = extract_f(L, betas, probes)
        xi, resid = fit_power_exponent(samples, args.max_residual)
        report = {
            "xi": xi.xi,
            "max_residual": resid,
            "homogeneity_deviation": samples.homogeneity_deviation,
            "n_samples": int(samples.betas.size),
        }
        _emit(json.dumps(report, indent=2), args.output)
        return EXIT_OK

    if args.op_input is None:
        raise UsageError("fit full needs --op-input with composition samples")
    op_betas, op_values = read_composition_table(args.op_input, speed_scale=args.c)
    op = composition_law_from_table(op_betas, op_values, tag=args.op_input)
    beta_max = min(0.99, float(betas[-1]), float(op_betas[-1]))
    config = RecoverConfig(
        unit_point=args.unit,
        anchor=args.anchor,
        depth=args.depth,
        beta_max=beta_max,
        additivity_tol=args.additivity_tol,
        betas=betas[betas <= beta_max],
        lambdas=lam,
        probes=probes,
    )
    report = recover_representation(L, op, config)
    _emit(report.to_json(), args.output)
    return EXIT_OK


def cmd_witness(args) -> int:
    x1, x2 = witness_lf_vs_dstar(args.x1, args.x2)
    diff = x2 - x1
    print(f"xi1 {_fmt(x1)}")
    print(f"xi2 {_fmt(x2)}")
    print(f"diff {_fmt(diff)}")
    return EXIT_OK if abs(diff) > WITNESS_MIN_GAP else EXIT_FAIL


def cmd_table(args) -> int:
    spec = LawSpec(args.law, args.xi, args.u)
    law = spec.build()
    grid = _grid(args, DEFAULT_GRID)
    if spec.is_doppler:
        n = write_doppler_table(args.output, law, grid.lambdas(), grid.betas(), args.c)
    else:
        n = write_composition_table(args.output, law, grid.betas(), args.c)
    print(f"wrote {n} rows to {args.output}")
    return EXIT_OK


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("grid")
    g.add_argument("--n-lambda", type=int, help="number of wavelengths (default 5)")
    g.add_argument("--n-beta", type=int, help="number of speeds (default 25)")
    g.add_argument("--beta-max", type=float, help="largest grid speed (default 0.99)")
    g.add_argument("--lambda-min", type=float, help="smallest wavelength (default 0.5)")
    g.add_argument("--lambda-max", type=float, help="largest wavelength (default 8)")
    g.add_argument("--spacing", choices=("geometric", "uniform"),
                   help="wavelength spacing (default geometric)")


def _add_law_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--xi", type=float, help="exponent for dstar / dgen")
    p.add_argument("--u", help="speed map for dgen / agen: identity, u_lf or an x,y CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reldoppler",
        description="Relativistic Doppler and velocity-composition laws: evaluate, "
                    "check axioms, recover (u, xi) from sample tables.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = DOPPLER_KINDS + COMPOSITION_KINDS

    p = sub.add_parser("eval", help="evaluate one law at one point")
    p.add_argument("law", choices=kinds)
    p.add_argument("--lambda", dest="lam", type=float, help="emitted wavelength")
    p.add_argument("--v", type=float, help="first speed")
    p.add_argument("--w", type=float, help="second speed (composition laws)")
    p.add_argument("--c", type=float, default=1.0, help="speed of light in the units of --v/--w")
    _add_law_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("check", help="check an axiom on a grid; prints a JSON report")
    p.add_argument("axiom", choices=("R", "M", "LOI", "DC", "group"))
    p.add_argument("--law", choices=DOPPLER_KINDS, help="Doppler law")
    p.add_argument("--op", choices=COMPOSITION_KINDS, help="composition law")
    p.add_argument("--op-u", help="speed map for --op agen (defaults to --u)")
    p.add_argument("--tol", type=float, help="tolerance for R (1e-9) and group (1e-12)")
    p.add_argument("--scales", type=float, nargs="+", default=[0.5, 2.0, 7.0],
                   help="wavelength scale factors for LOI")
    _add_law_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fit", help="fit xi, or recover (u, xi), from CSV samples")
    p.add_argument("kind", choices=("exponent", "full"))
    p.add_argument("--input", required=True, help="lambda,beta,L samples")
    p.add_argument("--op-input", help="v,w,result samples (fit full)")
    p.add_argument("--unit", type=float, default=0.5, help="speed with phi = 1")
    p.add_argument("--anchor", type=float, default=0.5, help="gauge anchor, u(anchor) = anchor")
    p.add_argument("--depth", type=int, default=20, help="number of dyadic halvings")
    p.add_argument("--max-residual", type=float, default=1e-8,
                   help="largest relative residual accepted by the exponent fit")
    p.add_argument("--additivity-tol", type=float, default=1e-6,
                   help="largest additivity residual of phi accepted for tabulated laws")
    p.add_argument("--c", type=float, default=1.0, help="speed of light in the table's units")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("witness", help="exponents matching length contraction at two speeds")
    p.add_argument("--x1", type=float, default=0.5)
    p.add_argument("--x2", type=float, default=0.8)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("table", help="sample a law on a grid and write CSV")
    p.add_argument("law", choices=kinds)
    p.add_argument("--output", required=True, help="CSV path")
    p.add_argument("--c", type=float, default=1.0, help="write speeds in units where c has this value")
    _add_law_flags(p)
    _add_grid_flags(p)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "c", 1.0) > 0:
        print("error: --c must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (ModelViolation, BisectionError, MonotonicityError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, DomainError, TableFormatError, OSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
