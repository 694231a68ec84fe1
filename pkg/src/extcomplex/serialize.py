"""JSON readers and the shared writer.

Rationals are written as ``"p/q"`` (or integer) strings, floats and
high-precision reals as decimal strings.  Every CLI command goes through
``dumps`` so library and command-line output agree byte for byte.
"""
from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any

import mpmath
import numpy as np

from .bounds import BoundResult, CertifiedReport
from .constructions import ShannonPlan
from .extform import (
    EncodingTriple,
    LinearEF,
    LMIBlock,
    NormalizationCertificate,
    SemidefEF,
    VerificationReport,
)
from .geometry.polytope import AffineMap, HPolyhedron, VPolytope
from .geometry.rational import as_fraction, format_rational

__all__ = [
    "MalformedInput",
    "dumps",
    "rational",
    "decimal",
    "polytope_to_json",
    "polytope_from_json",
    "hrep_to_json",
    "hrep_from_json",
    "ef_to_json",
    "ef_from_json",
    "plan_to_json",
    "report_to_json",
    "triple_to_json",
    "certificate_to_json",
    "bound_to_json",
    "certified_report_to_json",
]

BOUND_DIGITS = 20


class MalformedInput(ValueError):
    pass


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"


def rational(x) -> str:
    return format_rational(as_fraction(x))


def decimal(x) -> str:
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, BOUND_DIGITS)
    if isinstance(x, Fraction):
        return repr(float(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _entry(x) -> str:
    return decimal(x) if isinstance(x, (float, np.floating)) else rational(x)


def _parse(value, what: str) -> Fraction:
    try:
        return as_fraction(value)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"{what}: {exc}") from exc


def _require(obj, key, what):
    if not isinstance(obj, dict) or key not in obj:
        raise MalformedInput(f"{what}: missing field {key!r}")
    return obj[key]


def _vector(values, what: str, length: int | None = None) -> tuple[Fraction, ...]:
    if not isinstance(values, list):
        raise MalformedInput(f"{what}: expected a list")
    vec = tuple(_parse(v, what) for v in values)
    if length is not None and len(vec) != length:
        raise MalformedInput(f"{what}: expected {length} entries, got {len(vec)}")
    return vec


def _dim(obj, what) -> int:
    d = _require(obj, "dim", what)
    if not isinstance(d, int) or isinstance(d, bool) or d < 0:
        raise MalformedInput(f"{what}: dim must be a non-negative integer")
    return d


# ---------------------------------------------------------------------------
# polytopes


def polytope_to_json(P: VPolytope) -> dict:
    return {"dim": P.dim, "vertices": [[rational(c) for c in v] for v in P.vertices]}


def polytope_from_json(obj, *, reduce: bool = True) -> VPolytope:
    """Read a V-polytope; with ``reduce`` redundant points are dropped."""
    d = _dim(obj, "polytope")
    pts = [_vector(v, "vertex", d) for v in _require(obj, "vertices", "polytope")]
    if reduce:
        return VPolytope.from_points(pts, dim=d)
    return VPolytope(d, tuple(pts))


def _constraint_to_json(a, b) -> dict:
    return {"a": [rational(v) for v in a], "b": rational(b)}


def hrep_to_json(H: HPolyhedron) -> dict:
    out = {"dim": H.dim,
           "ineqs": [_constraint_to_json(a, b) for a, b in H.ineqs],
           "eqs": [_constraint_to_json(a, b) for a, b in H.eqs]}
    if H.empty:
        out["empty"] = True
    return out


def hrep_from_json(obj) -> HPolyhedron:
    n = _dim(obj, "H-representation")

    def rows(key):
        out = []
        for c in obj.get(key, []):
            out.append((_vector(_require(c, "a", key), key, n), _parse(_require(c, "b", key), key)))
        return tuple(out)

    return HPolyhedron(n, rows("ineqs"), rows("eqs"), bool(obj.get("empty", False)))


# ---------------------------------------------------------------------------
# formulations


def _map_to_json(proj: AffineMap) -> dict:
    return {"matrix": [[rational(v) for v in row] for row in proj.matrix],
            "offset": [rational(v) for v in proj.offset]}


def _matrix(values, what, rows: int, cols: int):
    if not isinstance(values, list) or len(values) != rows:
        raise MalformedInput(f"{what}: expected {rows} rows")
    return tuple(_vector(r, what, cols) for r in values)


def ef_to_json(ef: LinearEF | SemidefEF) -> dict:
    if isinstance(ef, LinearEF):
        return {"kind": "linear", "n": ef.n, "proj": _map_to_json(ef.proj), "lifted": hrep_to_json(ef.lifted)}
    return {"kind": "semidef", "n": ef.n, "proj": _map_to_json(ef.proj),
            "blocks": [{"S": [[[rational(v) for v in r] for r in Sj] for Sj in b.S],
                        "T": [[rational(v) for v in r] for r in b.T]} for b in ef.blocks]}


def ef_from_json(obj) -> LinearEF | SemidefEF:
    kind = _require(obj, "kind", "formulation")
    n = _require(obj, "n", "formulation")
    if not isinstance(n, int) or n < 0:
        raise MalformedInput("formulation: n must be a non-negative integer")
    proj = _require(obj, "proj", "formulation")
    offset = _vector(_require(proj, "offset", "proj"), "proj offset")
    matrix = _matrix(_require(proj, "matrix", "proj"), "proj matrix", len(offset), n)
    amap = AffineMap(matrix, offset, n)
    try:
        if kind == "linear":
            lifted = hrep_from_json(_require(obj, "lifted", "formulation"))
            if lifted.dim != n:
                raise MalformedInput(f"lifted set lives in R^{lifted.dim}, expected R^{n}")
            return LinearEF(lifted, amap)
        if kind == "semidef":
            blocks = []
            for blk in _require(obj, "blocks", "formulation"):
                T = _require(blk, "T", "block")
                m = len(T) if isinstance(T, list) else 0
                S = _require(blk, "S", "block")
                if not isinstance(S, list) or len(S) != n:
                    raise MalformedInput(f"block: S needs {n} coefficient matrices")
                blocks.append(LMIBlock(tuple(_matrix(Sj, "S", m, m) for Sj in S), _matrix(T, "T", m, m)))
            return SemidefEF(tuple(blocks), amap)
    except MalformedInput:
        raise
    except ValueError as exc:
        raise MalformedInput(str(exc)) from exc
    raise MalformedInput(f"unknown formulation kind {kind!r}")


def plan_to_json(plan: ShannonPlan) -> dict:
    return {"d": plan.d, "s": plan.s,
            "groups": [{"Y": [list(y) for y in Y], "X": [list(x) for x in X]} for Y, X in plan.groups],
            "declared_bound": plan.declared_bound}


def report_to_json(rep: VerificationReport) -> dict:
    out = {"verified": rep.verified, "checked_vertices": rep.checked_vertices,
           "checked_facets": rep.checked_facets}
    if not rep.verified:
        out["kind"] = rep.kind
        if rep.kind == "vertex" and rep.constraint is not None:
            out["vertex"] = [rational(v) for v in rep.constraint]
        elif rep.constraint is not None:
            a, b = rep.constraint
            out["constraint"] = _constraint_to_json(a, b)
        if rep.witness is not None:
            out["witness"] = [rational(v) for v in rep.witness]
        if rep.image is not None:
            out["image"] = [rational(v) for v in rep.image]
    return out


# ---------------------------------------------------------------------------
# triples and certificates


def _nested(arr):
    if not isinstance(arr, np.ndarray):
        return _entry(arr)
    if arr.ndim == 0:
        return _entry(arr.item())
    return [_nested(a) for a in arr]


def certificate_to_json(cert: NormalizationCertificate) -> dict:
    return {
        "passed": cert.passed,
        "l": cert.l, "m": cert.m, "n": cert.n,
        "rho": decimal(cert.rho),
        "norm_A_lower": decimal(cert.norm_A_lower),
        "norm_A_upper": decimal(cert.norm_A_upper),
        "norm_A_exact": cert.norm_A_lower == cert.norm_A_upper,
        "norm_phi": decimal(cert.norm_phi),
        "norm_t": decimal(cert.norm_t),
        "n_check": cert.n_check,
        "inner_ball": cert.inner_ball,
        "phi_check": cert.phi_check,
        "t_check": cert.t_check,
        "outer_ball": cert.outer_ball,
        "outer_ball_exact": cert.outer_ball_exact,
        "max_outer_norm": decimal(cert.max_outer_norm),
        "notes": list(cert.notes),
    }


def triple_to_json(tr: EncodingTriple, cert: NormalizationCertificate | None = None) -> dict:
    out = {"l": tr.l, "m": tr.m, "n": tr.n, "d": tr.d, "exact": tr.is_exact,
           "A_blocks": _nested(tr.A), "phi": _nested(tr.phi), "t": _nested(tr.t)}
    if cert is not None:
        out["certificate"] = certificate_to_json(cert)
    return out


def bound_to_json(res: BoundResult) -> dict:
    return {"B": decimal(res.B), "sxc_floor": res.sxc_floor, "xc_floor": res.xc_floor}


def certified_report_to_json(rep: CertifiedReport) -> dict:
    return {"d": rep.d, "rho_sq": rational(rep.rho_sq), "delta_sq": rational(rep.delta_sq),
            "N": str(rep.N), "B": decimal(rep.B), "sxc_floor": rep.sxc_floor,
            "xc_floor": rep.xc_floor, "l": rep.l, "m": rep.m, "violation": rep.violation,
            "excluded_dim0": rep.excluded}
