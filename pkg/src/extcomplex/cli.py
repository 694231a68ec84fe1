"""Command-line front end: ``extcomplex <verb> ...``.

JSON goes to standard output (or ``--out``), human-readable summaries to
standard error.  Exit status is 0 on success, 1 when a verification or
normalization check fails and 2 on malformed input.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from fractions import Fraction
from typing import Sequence

import mpmath

from . import bounds
from .constructions import shannon_01_ef, shannon_01_plan, trivial_vrep_ef
from .extform import LinearEF, verify_linear_ef
from .geometry.distance import hausdorff_distance_sq
from .geometry.polytope import UnboundedError
from .normalization import NormalizationError, normalize
from .serialize import (
    MalformedInput,
    bound_to_json,
    certified_report_to_json,
    decimal,
    dumps,
    ef_from_json,
    ef_to_json,
    plan_to_json,
    polytope_from_json,
    polytope_to_json,
    rational,
    report_to_json,
    triple_to_json,
)

__all__ = ["main", "run"]

logger = logging.getLogger("extcomplex")


class CommandFailed(Exception):
    """A well-formed request whose check failed (exit 1)."""

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload


def _load(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise MalformedInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path} is not valid JSON: {exc}") from exc


def _load_ef(path: str):
    obj = _load(path)
    if isinstance(obj, dict) and "kind" not in obj and "ef" in obj:
        obj = obj["ef"]
    return ef_from_json(obj)


def _load_polytope(path: str):
    try:
        return polytope_from_json(_load(path))
    except MalformedInput:
        raise
    except ValueError as exc:
        raise MalformedInput(f"{path}: {exc}") from exc


def _integer(text: str) -> int:
    """Integers, including the shorthand ``a^b``."""
    try:
        if "^" in text:
            base, exp = text.split("^")
            return int(base) ** int(exp)
        return int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc


# ---------------------------------------------------------------------------
# verbs


def cmd_construct(args) -> dict:
    V = _load_polytope(args.vertices)
    if args.trivial:
        ef = trivial_vrep_ef(V)
        logger.info("trivial formulation of size %d", ef.size())
        return {"ef": ef_to_json(ef)}
    try:
        plan = shannon_01_plan(V, args.s)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc
    ef = shannon_01_ef(V, plan=plan)
    logger.info("0/1 formulation of size %d (declared bound %d)", ef.size(), plan.declared_bound)
    return {"ef": ef_to_json(ef), "plan": plan_to_json(plan)}


def cmd_verify(args) -> dict:
    ef = _load_ef(args.ef)
    target = _load_polytope(args.target)
    if not isinstance(ef, LinearEF):
        raise MalformedInput("exact verification is only available for linear formulations")
    try:
        report = verify_linear_ef(ef, target)
    except (UnboundedError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc
    payload = report_to_json(report)
    if not report.verified:
        raise CommandFailed(f"formulation does not describe the target ({report.kind})", payload)
    logger.info("verified: %d vertices, %d facet checks", report.checked_vertices, report.checked_facets)
    return payload


def cmd_normalize(args) -> dict:
    ef = _load_ef(args.ef)
    target = _load_polytope(args.target)
    try:
        res = normalize(ef, target, tol=args.tol, exact=args.exact, samples=args.samples,
                        seed=args.seed, check=False)
    except NormalizationError as exc:
        raise CommandFailed(str(exc)) from exc
    payload = triple_to_json(res.triple, res.certificate)
    if res.certificate is not None and not res.certificate.passed:
        raise CommandFailed("normalization certificate failed", payload)
    logger.info("normalized: l=%d m=%d n=%d d=%d", *res.triple.shape())
    return payload


def _bound_table(args):
    writer = csv.writer(sys.stdout, lineterminator="\n")
    lo, hi = args.range
    if args.table == "cor41":
        writer.writerow(["d", "sxc_threshold", "xc_threshold", "log2_probability"])
        for d in range(max(lo, 3), hi + 1):
            sxc, xc, expo = bounds.corollary41_thresholds(d)
            writer.writerow([d, decimal(sxc), decimal(xc), expo])
    else:
        writer.writerow(["n", "sxc_lower", "xc_lower", "B", "n_over_208", "chain_holds"])
        for n in range(max(lo, 2), hi + 1):
            sxc, xc = bounds.corollary42_bounds(n)
            chain = bounds.corollary42_chain(n)
            writer.writerow([n, decimal(sxc), decimal(xc), decimal(chain.B), decimal(chain.n_over_208),
                             chain.holds])


def cmd_bound(args):
    if args.table:
        _bound_table(args)
        return None
    if args.d is None or args.N is None:
        raise MalformedInput("bound needs --d and --N (or --table)")
    kw = {}
    with mpmath.workprec(bounds.working_precision()):
        if args.rho_sq is not None:
            kw["rho_sq"] = args.rho_sq
        elif args.rho is not None:
            kw["rho"] = mpmath.mpf(args.rho)
        if args.delta_sq is not None:
            kw["delta_sq"] = args.delta_sq
        elif args.delta is not None:
            kw["delta"] = mpmath.mpf(args.delta)
        try:
            inp = bounds.BoundInputs(d=args.d, N=args.N, **kw)
        except ValueError as exc:
            raise MalformedInput(str(exc)) from exc
    res = bounds.theorem1_bound(inp)
    logger.info("B = %s", decimal(res.B))
    return bound_to_json(res)


def cmd_family(args) -> dict:
    try:
        if args.kind == "zero_one":
            spec = bounds.FamilySpec("zero_one", d=args.d)
        else:
            spec = bounds.FamilySpec("parabola", s=args.s, n=args.n)
        selector = ("random", args.random, args.seed) if args.random else "all"
        family = bounds.generate_family(spec, selector)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(str(exc)) from exc
    payload = {"kind": args.kind, "count": len(family), "members": [polytope_to_json(P) for P in family]}
    if args.separation:
        payload["rho_sq"] = rational(bounds.circumradius_sq(family))
        payload["delta_sq"] = rational(bounds.min_pairwise_separation_sq(family, jobs=args.jobs))
    if args.certify:
        l, m = args.certify  # noqa: E741
        try:
            rep = bounds.certify_family_bound(family, (l, m), jobs=args.jobs)
        except ValueError as exc:
            raise MalformedInput(str(exc)) from exc
        payload["report"] = certified_report_to_json(rep)
    logger.info("%d members", len(family))
    return payload


def cmd_distance(args) -> dict:
    P = _load_polytope(args.a)
    Q = _load_polytope(args.b)
    try:
        d2 = hausdorff_distance_sq(P, Q)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc
    return {"hausdorff_sq": rational(d2), "hausdorff": decimal(mpmath.sqrt(mpmath.mpf(d2.numerator) / d2.denominator))}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomized sampling")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for pairwise sweeps")
    common.add_argument("--out", help="write JSON here instead of standard output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="extcomplex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("construct", parents=[common], help="build a linear formulation")
    how = p.add_mutually_exclusive_group(required=True)
    how.add_argument("--shannon", action="store_true", help="suffix-fiber formulation of a 0/1 point set")
    how.add_argument("--trivial", action="store_true", help="convex-weights formulation")
    p.add_argument("--vertices", required=True, help="polytope JSON file")
    p.add_argument("--s", type=int, help="suffix width (default floor(log2(d/4)))")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("verify", parents=[common], help="check that a formulation describes a polytope")
    p.add_argument("--ef", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("normalize", parents=[common], help="normalized triple with certificate")
    p.add_argument("--ef", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--exact", action="store_true", help="rational inscribed cube instead of the John ellipsoid")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("bound", parents=[common], help="evaluate the packing lower bound")
    p.add_argument("--d", type=int)
    p.add_argument("--N", type=_integer, help="family size (a^b accepted)")
    rho = p.add_mutually_exclusive_group()
    rho.add_argument("--rho")
    rho.add_argument("--rho-sq", type=_fraction)
    delta = p.add_mutually_exclusive_group()
    delta.add_argument("--delta")
    delta.add_argument("--delta-sq", type=_fraction)
    p.add_argument("--table", choices=["cor41", "cor42"], help="emit a CSV threshold table instead")
    p.add_argument("--range", type=int, nargs=2, default=(3, 20), metavar=("LO", "HI"))
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("family", parents=[common], help="generate a polytope family")
    p.add_argument("--kind", choices=["zero_one", "parabola"], required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--random", type=int, metavar="COUNT", help="sample COUNT members instead of all")
    p.add_argument("--separation", action="store_true", help="add exact rho_sq and delta_sq")
    p.add_argument("--certify", type=int, nargs=2, metavar=("L", "M"),
                   help="check the claim that every member needs only L LMIs of size M")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("distance", parents=[common], help="exact squared Hausdorff distance")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=cmd_distance)
    return parser


def _emit(payload, out: str | None):
    if payload is None:
        return
    text = dumps(payload)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        _emit(args.func(args), args.out)
    except MalformedInput as exc:
        print(f"extcomplex: error: {exc}", file=sys.stderr)
        return 2
    except CommandFailed as exc:
        _emit(exc.payload, args.out)
        print(f"extcomplex: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
