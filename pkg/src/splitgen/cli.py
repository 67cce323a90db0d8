"""splitgen command line: gen, check, converge, figure.

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
import warnings

import numpy as np

from . import bch_oracle
from .error_kernel import DEFAULT_TOL, SplitCoefficients, classify_order, error_coefficients
from .extended_linear import (
    DomainError,
    FamilyKind,
    FamilySpec,
    NegativeCoefficientWarning,
    make_family,
    named_set,
    positivity_report,
)
from .figures import FIGURES, figure_rows, load_overlay, write_figure_csv
from .stepper import (
    Distribution,
    IntegratorError,
    builtin_system,
    convergence_study,
    kepler_initial_state,
    make_integrator,
    write_convergence_csv,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# cli name -> (family, parameter flags)
CLI_FAMILIES = {
    "4bda": ("alg_4bda", ("t2",)),
    "4acb": ("alg_4acb", ("v2",)),
    "min-velocity": ("minimal_velocity", ("n",)),
    "min-position": ("minimal_position", ("n",)),
    "velocity-9": ("nine_stage_velocity", ("t2",)),
    "position-9": ("nine_stage_position", ("v2",)),
    "velocity-11": ("eleven_stage_velocity", ("t2", "t3")),
    "position-11": ("eleven_stage_position", ("v2", "v3")),
    "fr-even": ("generalized_fr_even", ("alphas",)),
    "fr-odd": ("generalized_fr_odd", ("alphas",)),
}
ALIASES = ("4a", "4b", "4c", "4d", "forest-ruth", "leapfrog")
_PARAM_FLAGS = ("t2", "t3", "v2", "v3", "n", "alphas")


def resolve_family(name: str, params=()):
    """Build ``(coefficients, errors, params_or_None)`` from a family name.

    Accepts the aliases 4a..4d, forest-ruth, leapfrog, the CLI names in
    ``CLI_FAMILIES`` and the constructor names (``alg_4bda`` ...).
    """
    key = name.lower()
    if key in ALIASES:
        if params:
            raise DomainError(f"{name} takes no parameters")
        return named_set(key)
    if key in CLI_FAMILIES:
        key = CLI_FAMILIES[key][0]
    return make_family(FamilySpec(key, tuple(params)))


def analytic_e_vtv(params) -> float | None:
    """e_VTV from the closed forms, independent of the error kernel."""
    if params is None:
        return None
    if params.family_kind is FamilyKind.VELOCITY:
        return -(1.0 / params.phi - 1.0) / 24.0
    if params.family_kind is FamilyKind.POSITION:
        return -(1.0 - params.phi) / 12.0
    return params.delta_g / 24.0


def _family_params(args) -> list[float]:
    key = args.family.lower()
    expected = CLI_FAMILIES[key][1] if key in CLI_FAMILIES else ()
    stray = [f for f in _PARAM_FLAGS if f not in expected and getattr(args, f) is not None]
    if stray:
        raise DomainError(f"--family {args.family} does not take --{stray[0]}")
    if key not in CLI_FAMILIES:
        return []
    out = []
    for flag in CLI_FAMILIES[key][1]:
        value = getattr(args, flag)
        if value is None:
            raise DomainError(f"--family {args.family} requires --{flag}")
        out.extend(value if flag == "alphas" else [value])
    return out


@contextlib.contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _err(msg: str) -> None:
    print(f"splitgen: {msg}", file=sys.stderr)


# ---- gen ------------------------------------------------------------------


def cmd_gen(args) -> int:
    try:
        params = _family_params(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NegativeCoefficientWarning)
            coeffs, errors, fam = resolve_family(args.family, params)
    except DomainError as exc:
        _err(str(exc))
        return EXIT_USAGE
    report = positivity_report(coeffs)
    e_vtv = analytic_e_vtv(fam)
    claimed = 4 if fam is not None else classify_order(coeffs)
    doc = json.loads(coeffs.to_json(
        e_vtv=e_vtv,
        claimed_order=claimed,
        family=args.family.lower(),
        params=params,
        positivity={
            "forward": report.forward,
            "negative_t": list(report.negative_t),
            "negative_v": list(report.negative_v),
            "goldman_kaper": report.goldman_kaper,
        },
    ))
    with _output(args.output) as out:
        json.dump(doc, out, indent=2)
        out.write("\n")
    if not report.forward and fam is not None and fam.family_kind is not FamilyKind.LINEAR:
        _err(f"warning: {coeffs.name} is not forward (negative t{list(report.negative_t)} v{list(report.negative_v)})")
    return EXIT_OK


# ---- check ----------------------------------------------------------------


def _load_coefficients(path):
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("top-level JSON value must be an object")
    return doc, SplitCoefficients.from_dict(doc)


def cmd_check(args) -> int:
    try:
        doc, coeffs = _load_coefficients(args.file)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        _err(f"cannot read {args.file}: {exc}")
        return EXIT_USAGE

    tol = args.tol
    e = error_coefficients(coeffs)
    file_vtv = doc.get("e_vtv")
    gradient_weight = -file_vtv if file_vtv is not None else 0.0
    bare = classify_order(coeffs, tol)
    effective = classify_order(coeffs, tol, gradient_weight=gradient_weight)
    claimed = int(doc.get("claimed_order", 4))
    report = positivity_report(coeffs)
    failures = []

    print(f"name: {coeffs.name}")
    for label, value in zip(("e_T", "e_V", "e_TV", "e_TTV", "e_VTV"), e.as_tuple()):
        print(f"{label}: {value!r}")
    print(f"order (bare splitting): {bare}")
    if file_vtv is not None:
        print(f"order (with gradient term, weight {gradient_weight!r}): {effective}")
    print(f"forward: {str(report.forward).lower()}")
    if report.negative_t or report.negative_v:
        print(f"negative t indices: {list(report.negative_t)}; negative v indices: {list(report.negative_v)}")
    if report.goldman_kaper is not None:
        print(f"negative adjacent (t, v) pairs: {[list(p) for p in report.negative_pairs]}")

    if abs(e.e_T - 1.0) > tol:
        failures.append(f"primary constraint violated: e_T = sum(t) = {e.e_T!r} != 1")
    if abs(e.e_V - 1.0) > tol:
        failures.append(f"primary constraint violated: e_V = sum(v) = {e.e_V!r} != 1")
    if file_vtv is not None and abs(e.e_VTV - file_vtv) > tol:
        failures.append(f"e_VTV mismatch: computed {e.e_VTV!r}, file says {file_vtv!r}")
    if effective != claimed:
        failures.append(f"claimed order {claimed}, confirmed order {effective}")

    if args.oracle:
        pair = bch_oracle.random_pair(args.seed)
        try:
            r = bch_oracle.extract_error_coefficients(coeffs, pair)
        except bch_oracle.OracleError as exc:
            failures.append(f"oracle: {exc}")
        else:
            diff = max(abs(a - b) for a, b in zip(r.as_tuple(), e.as_tuple()[2:]))
            print(f"oracle e_TV, e_TTV, e_VTV: {r.e_TV!r}, {r.e_TTV!r}, {r.e_VTV!r}")
            print(f"oracle residual order: {r.residual_order:.3f}")
            print(f"oracle agreement: {diff:.3e} ({'ok' if diff <= 1e-6 else 'FAIL'})")
            if diff > 1e-6:
                failures.append(f"oracle disagrees with analytic coefficients by {diff:.3e}")

    for f in failures:
        print(f"FAIL: {f}")
    print("status: " + ("ok" if not failures else "failed"))
    return EXIT_FAIL if failures else EXIT_OK


# ---- converge -------------------------------------------------------------


def _default_distribution(coeffs) -> Distribution:
    e = error_coefficients(coeffs)
    if abs(e.e_VTV) <= DEFAULT_TOL or classify_order(coeffs, gradient_weight=-e.e_VTV) != 4:
        return Distribution.NONE
    nonzero = sum(1 for x in coeffs.v if x != 0.0)
    return Distribution.CENTRAL if nonzero % 2 else Distribution.PROPORTIONAL


def cmd_converge(args) -> int:
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NegativeCoefficientWarning)
            coeffs, _, _ = resolve_family(args.family, _family_params(args))
        dist = Distribution(args.gradient) if args.gradient else _default_distribution(coeffs)
        integrator = make_integrator(coeffs, dist)
    except (DomainError, IntegratorError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    if not 0 < args.eps_min < args.eps_max or args.eps_count < 2:
        _err("need 0 < --eps-min < --eps-max and --eps-count >= 2")
        return EXIT_USAGE

    system = builtin_system(args.system)
    if system.name == "kepler2d":
        q0, p0, period = kepler_initial_state(args.eccentricity)
    else:
        q0, p0, period = np.array([1.0]), np.array([0.0]), 2.0 * math.pi
    t_final = args.t_final if args.t_final is not None else period
    eps = np.geomspace(args.eps_max, args.eps_min, args.eps_count)
    report = convergence_study(integrator, system, q0, p0, t_final, eps)
    with _output(args.output) as out:
        write_convergence_csv(out, report)
    return EXIT_OK


# ---- figure ---------------------------------------------------------------


def cmd_figure(args) -> int:
    try:
        overlay = load_overlay(args.overlay)
        rows = figure_rows(args.which, args.grid_count, overlay=overlay)
    except (OSError, ValueError, KeyError) as exc:
        _err(str(exc))
        return EXIT_USAGE
    with _output(args.output) as out:
        write_figure_csv(out, args.which, rows)
    return EXIT_OK


# ---- parser ---------------------------------------------------------------


def _default_seed() -> int:
    env = os.environ.get("SPLITGEN_SEED")
    return int(env) if env else bch_oracle.DEFAULT_SEED


def _add_family_flags(p) -> None:
    p.add_argument("--family", required=True,
                   help="4a 4b 4c 4d forest-ruth leapfrog " + " ".join(CLI_FAMILIES))
    p.add_argument("--t2", type=float)
    p.add_argument("--t3", type=float)
    p.add_argument("--v2", type=float)
    p.add_argument("--v3", type=float)
    p.add_argument("--n", type=int, help="number of (t, v) pairs for min-velocity/min-position")
    p.add_argument("--alphas", type=float, nargs="+", help="alpha_2 .. alpha_k, alpha_2 = 1")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitgen", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="oracle seed (default $SPLITGEN_SEED)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a coefficient JSON file")
    _add_family_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("check", help="verify a coefficient JSON file")
    p.add_argument("file")
    p.add_argument("--oracle", action="store_true", help="cross-check with the matrix BCH oracle")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    p.add_argument("--seed", type=int, default=None, dest="sub_seed")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("converge", help="global-error convergence study as CSV")
    _add_family_flags(p)
    p.add_argument("--system", choices=["harmonic", "kepler"], default="harmonic")
    p.add_argument("--eps-min", type=float, default=1e-3)
    p.add_argument("--eps-max", type=float, default=1e-1)
    p.add_argument("--eps-count", type=int, default=9)
    p.add_argument("--gradient", choices=[d.value for d in Distribution], default=None,
                   help="gradient-term distribution (default: central or proportional when needed)")
    p.add_argument("--t-final", type=float, default=None)
    p.add_argument("--eccentricity", type=float, default=0.2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("figure", help="comparison-figure data as CSV")
    p.add_argument("which", choices=FIGURES)
    p.add_argument("--grid-count", type=int, default=50)
    p.add_argument("--overlay", help="JSON with published points (same layout as the bundled file)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    seed = getattr(args, "sub_seed", None)
    args.seed = seed if seed is not None else (args.seed if args.seed is not None else _default_seed())
    return args.func(args)


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
