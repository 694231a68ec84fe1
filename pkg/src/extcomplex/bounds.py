"""Packing lower bound for families of polytopes and its two applications.

For a family of ``N`` pairwise distinct polytopes of dimension at least one in
``ρB^d`` with pairwise Hausdorff distance at least ``Δ``, any ``ℓ, m`` such
that every member has a formulation with ``ℓ`` LMIs of size ``m`` satisfy
``ℓ² m⁴ >= B`` where::

    B = log N / (8 d (1 + log(2ρ/Δ) + log log N))

All logarithms are base 2, evaluated with mpmath at a configurable binary
precision (80 bits unless ``EXTCOMPLEX_PRECISION`` says otherwise).
"""
from __future__ import annotations

import itertools
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .geometry.distance import hausdorff_distance_sq, point_polytope_distance_sq
from .geometry.polytope import VPolytope

__all__ = [
    "BoundInputs",
    "BoundResult",
    "FamilySpec",
    "CertifiedReport",
    "working_precision",
    "theorem1_bound",
    "generate_family",
    "parabola_point",
    "min_pairwise_separation_sq",
    "circumradius_sq",
    "corollary41_thresholds",
    "corollary42_bounds",
    "corollary42_chain",
    "certify_family_bound",
]

DEFAULT_PRECISION = 80


def working_precision() -> int:
    """Binary precision for bound evaluation (``EXTCOMPLEX_PRECISION`` overrides)."""
    raw = os.environ.get("EXTCOMPLEX_PRECISION")
    if not raw:
        return DEFAULT_PRECISION
    prec = int(raw)
    if prec < 53:
        raise ValueError("EXTCOMPLEX_PRECISION must be at least 53 bits")
    return prec


def _log2(x) -> mpmath.mpf:
    return mpmath.log(mpmath.mpf(x), 2)


def _log2_fraction(q: Fraction) -> mpmath.mpf:
    return _log2(q.numerator) - _log2(q.denominator)


@dataclass(frozen=True)
class BoundInputs:
    """Family parameters for the packing bound.

    Pass ``rho``/``delta`` as reals, or ``rho_sq``/``delta_sq`` as exact
    rationals (the squared quantities families actually provide).  ``N`` is
    an exact integer of any size.
    """

    d: int
    N: int
    rho: float | None = None
    delta: float | None = None
    rho_sq: Fraction | None = None
    delta_sq: Fraction | None = None

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be at least 1")
        if int(self.N) != self.N or self.N < 2:
            raise ValueError("a family needs at least two members")
        if (self.rho is None) == (self.rho_sq is None):
            raise ValueError("give exactly one of rho and rho_sq")
        if (self.delta is None) == (self.delta_sq is None):
            raise ValueError("give exactly one of delta and delta_sq")
        if self.rho_sq is not None:
            object.__setattr__(self, "rho_sq", Fraction(self.rho_sq))
        if self.delta_sq is not None:
            object.__setattr__(self, "delta_sq", Fraction(self.delta_sq))
        if not (self.rho if self.rho_sq is None else self.rho_sq) > 0:
            raise ValueError("rho must be positive")
        if not (self.delta if self.delta_sq is None else self.delta_sq) > 0:
            raise ValueError("delta must be positive")
        # members of a family in rho*B are at Hausdorff distance at most 2 rho
        if self._delta_value() > 2 * self._rho_value() * (1 + mpmath.mpf(2) ** -60):
            raise ValueError("delta cannot exceed 2*rho")

    def _rho_value(self):
        return mpmath.sqrt(mpmath.mpf(self.rho_sq.numerator) / self.rho_sq.denominator) \
            if self.rho is None else mpmath.mpf(self.rho)

    def _delta_value(self):
        return mpmath.sqrt(mpmath.mpf(self.delta_sq.numerator) / self.delta_sq.denominator) \
            if self.delta is None else mpmath.mpf(self.delta)

    def log2_rho(self) -> mpmath.mpf:
        if self.rho is None:
            return _log2_fraction(self.rho_sq) / 2
        return _log2(self.rho)

    def log2_delta(self) -> mpmath.mpf:
        if self.delta is None:
            return _log2_fraction(self.delta_sq) / 2
        return _log2(self.delta)


@dataclass(frozen=True)
class BoundResult:
    B: mpmath.mpf
    sxc_floor: int
    xc_floor: int

    def __float__(self) -> float:
        return float(self.B)


def _ceil_root(B, k: int) -> int:
    return int(mpmath.ceil(mpmath.root(B, k)))


def theorem1_bound(inp: BoundInputs, *, prec: int | None = None) -> BoundResult:
    """``B`` together with ``⌈B^(1/4)⌉`` (for sxc) and ``⌈B^(1/2)⌉`` (for xc)."""
    with mpmath.workprec(prec or working_precision()):
        logN = _log2(int(inp.N))
        loglogN = _log2(logN)
        log_ratio = 1 + inp.log2_rho() - inp.log2_delta()
        B = logN / (8 * inp.d * (1 + log_ratio + loglogN))
        return BoundResult(+B, _ceil_root(B, 4), _ceil_root(B, 2))


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class FamilySpec:
    """``zero_one`` (subsets of ``{0,1}^d``), ``parabola`` (``conv{(t, t²) : t in I}``
    for ``I ⊆ [s]`` with ``|I| = n``, any size when ``n`` is ``None``) or
    ``explicit`` (given members)."""

    kind: str
    d: int | None = None
    s: int | None = None
    n: int | None = None
    members: tuple[VPolytope, ...] = field(default=())

    def __post_init__(self):
        if self.kind == "zero_one":
            if self.d is None or self.d < 1:
                raise ValueError("zero_one families need d >= 1")
        elif self.kind == "parabola":
            if self.s is None or self.s < 1:
                raise ValueError("parabola families need s >= 1")
            if self.n is not None and not 2 <= self.n <= self.s:
                raise ValueError("parabola families need s >= n >= 2")
        elif self.kind == "explicit":
            if not self.members:
                raise ValueError("explicit families need members")
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")


def parabola_point(t: int) -> tuple[int, int]:
    return (t, t * t)


def _zero_one_member(d: int, points) -> VPolytope:
    pts = []
    for p in points:
        p = tuple(int(c) for c in p)
        if len(p) != d or any(c not in (0, 1) for c in p):
            raise ValueError(f"{p} is not a point of {{0,1}}^{d}")
        pts.append(p)
    if not pts:
        raise ValueError("empty member")
    return VPolytope.from_points(sorted(set(pts)))


def _parabola_member(s: int, n: int | None, index_set) -> VPolytope:
    I = sorted(set(int(t) for t in index_set))
    if not I or I[0] < 1 or I[-1] > s:
        raise ValueError(f"index set {index_set} is not inside [1, {s}]")
    if n is not None and len(I) != n:
        raise ValueError(f"index set {index_set} does not have {n} elements")
    return VPolytope.from_points([parabola_point(t) for t in I])


def generate_family(spec: FamilySpec, selector="all") -> list[VPolytope]:
    """Members of a family picked by ``selector``.

    ``selector`` is ``"all"``, ``("random", count, seed)`` or an explicit list
    (point lists for ``zero_one``, index sets for ``parabola``, indices into
    the members for ``explicit``).  ``"all"`` on ``zero_one`` enumerates every
    non-empty subset of ``{0,1}^d``, so it is only sensible for small ``d``.
    """
    if spec.kind == "explicit":
        if selector == "all":
            return list(spec.members)
        return [spec.members[int(i)] for i in selector]
    if spec.kind == "zero_one":
        cube = list(itertools.product((0, 1), repeat=spec.d))
        if selector == "all":
            if spec.d > 4:
                raise ValueError("exhaustive zero_one families are limited to d <= 4")
            return [_zero_one_member(spec.d, [cube[i] for i in range(len(cube)) if mask >> i & 1])
                    for mask in range(1, 2 ** len(cube))]
        if _is_random(selector):
            _, count, seed = selector
            rng = random.Random(seed)
            out = []
            for _ in range(int(count)):
                pts = [p for p in cube if rng.random() < 0.5] or [rng.choice(cube)]
                out.append(_zero_one_member(spec.d, pts))
            return out
        return [_zero_one_member(spec.d, pts) for pts in selector]
    s, n = spec.s, spec.n
    if selector == "all":
        sizes = [n] if n is not None else range(1, s + 1)
        return [_parabola_member(s, n, I) for k in sizes for I in itertools.combinations(range(1, s + 1), k)]
    if _is_random(selector):
        _, count, seed = selector
        rng = random.Random(seed)
        return [_parabola_member(s, n, rng.sample(range(1, s + 1), n or rng.randint(1, s)))
                for _ in range(int(count))]
    return [_parabola_member(s, n, I) for I in selector]


def _is_random(selector) -> bool:
    return isinstance(selector, (tuple, list)) and len(selector) == 3 and selector[0] == "random"


def _pair_distance(pair):
    P, Q = pair
    return hausdorff_distance_sq(P, Q)


def min_pairwise_separation_sq(family: Sequence[VPolytope], *, jobs: int = 1) -> Fraction:
    """Exact minimum squared Hausdorff distance over unordered pairs."""
    family = list(family)
    if len(family) < 2:
        raise ValueError("separation needs at least two members")
    if any(P.is_empty for P in family):
        raise ValueError("family members must be non-empty")
    if jobs > 1:
        pairs = itertools.combinations(family, 2)
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return min(pool.map(_pair_distance, pairs, chunksize=256))
    return _sweep(family)


def _sweep(family: Sequence[VPolytope]) -> Fraction:
    # Vertices recur across members, so memoize point-to-member distances on
    # small integer keys instead of hashing rational tuples for every pair.
    ids: dict = {}
    members = [tuple(ids.setdefault(v, len(ids)) for v in P.vertices) for P in family]
    points = list(ids)
    cache: dict[tuple[int, int], Fraction] = {}

    def dist(v: int, j: int, other: set) -> Fraction:
        if v in other:
            return Fraction(0)
        key = (v, j)
        if key not in cache:
            cache[key] = point_polytope_distance_sq(points[v], family[j])
        return cache[key]

    sets = [set(m) for m in members]
    best = None
    for i, j in itertools.combinations(range(len(family)), 2):
        d = max(max(dist(v, j, sets[j]) for v in members[i]),
                max(dist(v, i, sets[i]) for v in members[j]))
        if best is None or d < best:
            best = d
    return best


def circumradius_sq(family: Iterable[VPolytope] | VPolytope) -> Fraction:
    """Largest squared vertex norm over all members (the smallest ``ρ²`` around ``o``)."""
    if isinstance(family, VPolytope):
        family = [family]
    best = None
    for P in family:
        for v in P.vertices:
            r = sum((Fraction(c) ** 2 for c in v), Fraction(0))
            best = r if best is None or r > best else best
    if best is None:
        raise ValueError("circumradius of an empty family")
    return best


# ---------------------------------------------------------------------------
# the two corollaries


def corollary41_thresholds(d: int, *, prec: int | None = None):
    """``(2^(d/4) / (3√d), 2^(d/2) / (9d), -2^(d-1))`` for random 0/1-polytopes.

    The last entry is the base-2 exponent of the probability bound, kept as an
    integer since the probability itself underflows immediately.
    """
    if d < 3:
        raise ValueError("the 0/1 thresholds need d >= 3")
    with mpmath.workprec(prec or working_precision()):
        d_ = mpmath.mpf(d)
        sxc = mpmath.power(2, d_ / 4) / (3 * mpmath.sqrt(d_))
        xc = mpmath.power(2, d_ / 2) / (9 * d_)
        return +sxc, +xc, -(2 ** (d - 1))


def corollary42_bounds(n: int, *, prec: int | None = None):
    """``(n^(1/4) / 4, √n / 15)`` for integral n-gons in ``[n²] × [n⁴]``."""
    if n < 2:
        raise ValueError("polygons need n >= 2")
    with mpmath.workprec(prec or working_precision()):
        n_ = mpmath.mpf(n)
        return +(mpmath.root(n_, 4) / 4), +(mpmath.sqrt(n_) / 15)


@dataclass(frozen=True)
class ChainCheck:
    """Intermediate quantities of the n-gon estimate with ``s = n²``."""

    n: int
    s: int
    B: mpmath.mpf
    n_over_208: mpmath.mpf
    closed_form: mpmath.mpf
    log_term: mpmath.mpf

    @property
    def holds(self) -> bool:
        return self.B >= self.closed_form >= self.n_over_208


def corollary42_chain(n: int, *, prec: int | None = None) -> ChainCheck:
    """Evaluate the packing bound for the parabola family with ``s = n²``.

    ``ρ = 2s²``, ``Δ = 1/(3s)`` and ``N = C(s, n)``.  ``closed_form`` is
    ``n log n / (16 (6 + 7 log n + log log n))``, the bound after the binomial
    estimates, and ``log_term`` is ``6 + 7 log n + log log n``.
    """
    if n < 2:
        raise ValueError("polygons need n >= 2")
    s = n * n
    with mpmath.workprec(prec or working_precision()):
        inp = BoundInputs(d=2, N=math.comb(s, n), rho_sq=Fraction(4 * s ** 4), delta_sq=Fraction(1, 9 * s * s))
        B = theorem1_bound(inp, prec=prec).B
        L = _log2(n)
        log_term = 6 + 7 * L + _log2(L)
        closed = n * L / (16 * log_term)
        return ChainCheck(n, s, B, mpmath.mpf(n) / 208, closed, log_term)


@dataclass(frozen=True)
class CertifiedReport:
    d: int
    rho_sq: Fraction
    delta_sq: Fraction
    N: int
    B: mpmath.mpf
    sxc_floor: int
    xc_floor: int
    l: int  # noqa: E741
    m: int
    violation: bool
    excluded: int = 0


def certify_family_bound(family: Sequence[VPolytope], sizes: tuple[int, int], *,
                         jobs: int = 1, prec: int | None = None) -> CertifiedReport:
    """Check a claim that every member has a formulation with ``ℓ`` LMIs of size ``m``.

    ``violation`` is true when ``ℓ² m⁴ < B``, i.e. the claim is impossible.
    Members of dimension zero are dropped first.
    """
    l, m = (int(v) for v in sizes)  # noqa: E741
    if l < 0 or m < 1:
        raise ValueError("sizes need l >= 0 and m >= 1")
    members = [P for P in family if not P.is_empty and P.affine_dim() >= 1]
    excluded = len(family) - len(members)
    if len({P.vertices for P in members}) != len(members):
        raise ValueError("family members must be pairwise distinct")
    if len(members) < 2:
        raise ValueError("need at least two members of dimension >= 1")
    dims = {P.dim for P in members}
    if len(dims) != 1:
        raise ValueError("members live in different spaces")
    d = dims.pop()
    rho_sq = circumradius_sq(members)
    delta_sq = min_pairwise_separation_sq(members, jobs=jobs)
    res = theorem1_bound(BoundInputs(d=d, N=len(members), rho_sq=rho_sq, delta_sq=delta_sq), prec=prec)
    violation = l * l * m ** 4 < res.B
    return CertifiedReport(d, rho_sq, delta_sq, len(members), res.B, res.sxc_floor, res.xc_floor,
                           l, m, bool(violation), excluded)
