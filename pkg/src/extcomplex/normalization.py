"""Turning an extended formulation into a normalized triple ``(A, phi, t)``.

The pipeline has four stages:

1. ``bounded_section``: cut the lifted set with an affine subspace ``L`` so
   that it becomes bounded while keeping its image.  Each step takes a
   recession direction ``u`` and the hyperplane orthogonal to ``u`` through
   the farthest preimage of a target vertex along ``u``.
2. Re-coordinatize ``L`` (and, for polyhedra, the affine hull of the
   section) as ``R^n'``.
3. ``sandwich_transform``: an affine bijection sending the John ellipsoid
   of the section to the unit ball, so ``B ⊆ Q' ⊆ n' B``.
4. ``helton_vinnikov_reduce``: every block becomes ``A_i(x) + I`` with
   ``A_i`` linear.

Everything up to stage 2 is exact.  Floating point enters at stage 3, except
on the optional exact path for linear formulations, which inscribes a cube
instead of an ellipsoid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .extform import (
    EncodingTriple,
    LinearEF,
    LMIBlock,
    NormalizationCertificate,
    SemidefEF,
    triple_norms,
    validate_normalized,
)
from .geometry.ellipsoid import EllipsoidError, john_ellipsoid
from .geometry.lp import LinearProgram
from .geometry.polytope import (
    AffineMap,
    HPolyhedron,
    VPolytope,
    enumerate_vertices,
    recession_direction,
    relative_interior,
)
from .geometry.rational import (
    affine_parametrization,
    is_psd,
    ldl_pivoted,
    nullspace,
    to_fraction,
    to_mpq,
)

__all__ = [
    "AffineSection",
    "MonicBlock",
    "Sandwich",
    "NormalizedEF",
    "NormalizationError",
    "bounded_section",
    "sandwich_transform",
    "helton_vinnikov_reduce",
    "normalize",
]

logger = logging.getLogger(__name__)

KERNEL_CUTOFF = 1e-9
KERNEL_RESIDUAL = 1e-8


class NormalizationError(RuntimeError):
    pass


def _dot(a, b):
    return sum((x * y for x, y in zip(a, b) if x and y), Fraction(0))


@dataclass(frozen=True)
class AffineSection:
    """``L = offset + basis · R^k`` inside ``R^n`` (``basis`` is ``n × k``)."""

    basis: tuple[tuple[Fraction, ...], ...]
    offset: tuple[Fraction, ...]

    @property
    def n(self) -> int:
        return len(self.offset)

    @property
    def dim(self) -> int:
        return len(self.basis[0]) if self.basis else 0

    @classmethod
    def whole(cls, n: int) -> "AffineSection":
        return cls(tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)),
                   (Fraction(0),) * n)

    @classmethod
    def from_parametrization(cls, x0, N) -> "AffineSection":
        return cls(tuple(tuple(to_fraction(v) for v in row) for row in N),
                   tuple(to_fraction(v) for v in x0))

    def apply(self, z: Sequence) -> tuple[Fraction, ...]:
        return tuple(o + _dot(row, z) for row, o in zip(self.basis, self.offset))

    def compose(self, inner: "AffineSection") -> "AffineSection":
        """The section ``self(inner(w))``."""
        k = inner.dim
        basis = tuple(tuple(_dot(row, [r[j] for r in inner.basis]) for j in range(k))
                      for row in self.basis)
        return AffineSection(basis, self.apply(inner.offset))

    def pull_back(self, H: HPolyhedron) -> HPolyhedron:
        """``{z : offset + basis z in H}``."""
        k = self.dim

        def rewrite(a, b):
            g = tuple(sum((ai * row[j] for ai, row in zip(a, self.basis) if ai), Fraction(0))
                      for j in range(k))
            return g, b - _dot(a, self.offset)

        ineqs = tuple(rewrite(a, b) for a, b in H.ineqs)
        eqs = tuple(rewrite(a, b) for a, b in H.eqs)
        return HPolyhedron(k, ineqs, eqs, H.empty)

    def pull_back_block(self, block: LMIBlock) -> LMIBlock:
        m, k = block.m, self.dim

        def combo(coeffs, const=None):
            M = [[Fraction(0)] * m for _ in range(m)] if const is None else [list(r) for r in const]
            for c, Sj in zip(coeffs, block.S):
                if c:
                    for a in range(m):
                        for b in range(m):
                            if Sj[a][b]:
                                M[a][b] += c * Sj[a][b]
            return M

        S = tuple(combo([row[j] for row in self.basis]) for j in range(k))
        return LMIBlock(S, combo(self.offset, block.T))

    def pull_back_map(self, proj: AffineMap) -> AffineMap:
        matrix = tuple(tuple(_dot(row, [r[j] for r in self.basis]) for j in range(self.dim))
                       for row in proj.matrix)
        return AffineMap(matrix, proj.apply(self.offset), self.dim)


def _hyperplane_section(u, c, k) -> tuple[AffineSection, list[int]]:
    x0, N, free = affine_parametrization([[to_mpq(v) for v in u]], [to_mpq(c)], k)
    return AffineSection.from_parametrization(x0, N), free


def _preimages(H: HPolyhedron, proj: AffineMap, target: VPolytope):
    A = [a for a, _ in H.ineqs]
    b = [bb for _, bb in H.ineqs]
    E = [a for a, _ in H.eqs] + [list(r) for r in proj.matrix]
    out = []
    for v in target.vertices:
        f = [bb for _, bb in H.eqs] + [vi - oi for vi, oi in zip(v, proj.offset)]
        y = LinearProgram(H.dim, A, b, E, f).feasible_point()
        if y is None:
            raise NormalizationError(f"target vertex {v} has no preimage in the lifted set")
        out.append(y)
    return out


def _lineality(blocks: Sequence[LMIBlock], k: int):
    """A nonzero ``u`` with ``S_i(u) = 0`` for every block, or ``None``."""
    rows = []
    for block in blocks:
        for a in range(block.m):
            for b in range(a, block.m):
                rows.append([block.S[j][a][b] for j in range(k)])
    if not rows:
        return [Fraction(int(j == 0)) for j in range(k)] if k else None
    basis = nullspace(rows, k)
    return [to_fraction(v) for v in basis[0]] if basis else None


def _psd_direction(blocks: Sequence[LMIBlock], k: int):
    """A coordinate direction ``±e_j`` along which every block is PSD."""
    for j in range(k):
        for s in (1, -1):
            mats = [[[s * v for v in row] for row in block.S[j]] for block in blocks]
            if all(is_psd(M) for M in mats) and any(any(row) for M in mats for row in M):
                e = [Fraction(0)] * k
                e[j] = Fraction(s)
                return e
    return None


def bounded_section(feasible: HPolyhedron | SemidefEF, proj: AffineMap, target: VPolytope,
                    preimages: Sequence[Sequence] | None = None) -> AffineSection:
    """Affine subspace ``L`` with ``feasible ∩ L`` bounded and the same image.

    For polyhedra recession directions are exact.  For spectrahedra only
    lineality directions (``S(u) = 0``) and coordinate directions with
    ``S(±e_j)`` PSD are detected; a one-sided direction needs ``preimages``
    of the target vertices since finding them is an SDP feasibility problem.
    """
    linear = isinstance(feasible, HPolyhedron)
    n = feasible.dim if linear else feasible.n
    section = AffineSection.whole(n)
    ys = None if preimages is None else [tuple(Fraction(v) for v in y) for y in preimages]
    zs = None if ys is None else list(ys)
    for _ in range(n + 1):
        k = section.dim
        two_sided = False
        if linear:
            Hz = section.pull_back(feasible)
            u = recession_direction(Hz)
        else:
            blocks = [section.pull_back_block(b) for b in feasible.blocks]
            u = _lineality(blocks, k)
            two_sided = u is not None
            if u is None:
                u = _psd_direction(blocks, k)
        if u is None:
            return section
        if two_sided:
            c = Fraction(0)
        else:
            if zs is None:
                if not linear:
                    raise NormalizationError(
                        "the spectrahedron recedes along a one-sided direction; pass preimages")
                ys = _preimages(feasible, proj, target)
                zs = list(ys)
            c = max(_dot(u, z) for z in zs)
        sub, free = _hyperplane_section(u, c, k)
        if zs is not None:
            uu = _dot(u, u)
            moved = [[zi + (c - _dot(u, z)) / uu * ui for zi, ui in zip(z, u)] for z in zs]
            zs = [tuple(z[j] for j in free) for z in moved]
        section = section.compose(sub)
    raise NormalizationError("bounded section did not terminate within n steps")


# ---------------------------------------------------------------------------
# sandwich


@dataclass(frozen=True)
class Sandwich:
    """Affine bijection ``u -> center + shape @ u`` of ``R^k``.

    The preimage of the section under this map contains the unit ball and
    lies in ``k`` times the unit ball.  ``exact`` sandwiches carry
    ``Fraction`` entries.
    """

    center: np.ndarray
    shape: np.ndarray
    inner_slack: float
    outer_ratio: float
    exact: bool = False

    def from_ball(self, u):
        return self.center + self.shape @ np.asarray(u, dtype=self.shape.dtype)

    def to_ball(self, x):
        diff = np.asarray(x, dtype=float) - self.center.astype(float)
        return np.linalg.solve(self.shape.astype(float), diff)


def _inscribed_cube(Q: HPolyhedron):
    """Largest ``c + r[-1,1]^k`` inside ``Q`` by an exact LP."""
    k = Q.dim
    A = [list(a) + [sum(abs(v) for v in a)] for a, _ in Q.ineqs]
    b = [bb for _, bb in Q.ineqs]
    res = LinearProgram(k + 1, A, b).optimize([0] * k + [1])
    if not res.optimal or res.value <= 0:
        raise NormalizationError("section has empty interior")
    return res.x[:k], res.value


def sandwich_transform(Q: HPolyhedron, *, tol: float = 1e-8, exact: bool = False,
                       vertices: VPolytope | None = None) -> Sandwich:
    """Map a bounded full-dimensional polytope between ``B`` and ``k B``.

    The default uses the John ellipsoid.  ``exact=True`` inscribes the
    largest axis-parallel cube instead, keeping every entry rational; its
    outer factor is checked exactly and need not be ``k``.
    """
    k = Q.dim
    verts = vertices if vertices is not None else enumerate_vertices(Q)
    if exact:
        c, r = _inscribed_cube(Q)
        center = np.array(c, dtype=object)
        shape = np.array([[r if i == j else Fraction(0) for j in range(k)] for i in range(k)], dtype=object)
        far = max(sum((vi - ci) ** 2 for vi, ci in zip(v, c)) for v in verts.vertices)
        return Sandwich(center, shape, 0.0, math.sqrt(far / r ** 2) / k, exact=True)
    try:
        E = john_ellipsoid(Q, tol, vertices=verts)
    except EllipsoidError as exc:
        raise NormalizationError(str(exc)) from exc
    return Sandwich(E.center, E.shape, E.inner_slack, E.outer_ratio)


def _ray_lengths(M0: np.ndarray, Sdirs: np.ndarray) -> np.ndarray:
    """Largest ``s`` with ``M0 + s S(u)`` PSD for each direction (``inf`` if none)."""
    L = np.linalg.cholesky(M0)
    Linv = np.linalg.inv(L)
    W = np.einsum("ab,sbc,dc->sad", Linv, Sdirs, Linv)
    top = np.linalg.eigvalsh(-W)[:, -1]
    with np.errstate(divide="ignore"):
        return np.where(top > 0, 1.0 / np.maximum(top, 1e-300), np.inf)


def _semidef_sandwich(blocks: Sequence[LMIBlock], x0: np.ndarray, samples: int, seed: int):
    """Outer polytope from tangent cuts, then its John ellipsoid."""
    from .geometry.ellipsoid import inscribed_ellipsoid

    k = len(x0)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((samples, k))
    U /= np.linalg.norm(U, axis=1)[:, None]
    U = np.vstack([U, np.eye(k), -np.eye(k)])
    cuts_A, cuts_b = [], []
    data = []
    for block in blocks:
        S = np.array([[[float(v) for v in r] for r in Sj] for Sj in block.S]).reshape(k, block.m, block.m)
        T = np.array([[float(v) for v in r] for r in block.T]).reshape(block.m, block.m)
        M0 = T + np.einsum("j,jab->ab", x0, S)
        data.append((S, T, M0, _ray_lengths(M0, np.einsum("sj,jab->sab", U, S))))
    if not np.all(np.isfinite(np.min([d[3] for d in data], axis=0))):
        raise NormalizationError("a probe ray never leaves the spectrahedron; it is unbounded")
    for S, T, M0, s in data:
        for u, si in zip(U, s):
            if not np.isfinite(si):
                continue
            w, V = np.linalg.eigh(M0 + si * np.einsum("j,jab->ab", u, S))
            v = V[:, 0]
            # v^T M(x) v >= 0 is valid for the whole spectrahedron
            g = np.einsum("a,jab,b->j", v, S, v)
            if np.linalg.norm(g) == 0:
                continue
            cuts_A.append(-g)
            cuts_b.append(float(v @ T @ v))
    if not cuts_A:
        raise NormalizationError("no supporting cuts found; is the spectrahedron bounded?")
    A = np.array(cuts_A)
    b = np.array(cuts_b)
    E = inscribed_ellipsoid(A, b, x0)
    return E.center, E.shape


# ---------------------------------------------------------------------------
# Helton-Vinnikov


@dataclass(frozen=True)
class MonicBlock:
    """Linear map ``A(x) = sum_j x_j A_coeffs[j]``; the block reads ``A(x) + I PSD``.

    ``U`` is the congruence with ``Uᵀ T U = diag(I_r, 0)`` and
    ``kernel_residual`` how far the last columns of ``U`` are from the
    kernel of every coefficient matrix.
    """

    A_coeffs: np.ndarray
    rank: int
    U: np.ndarray
    kernel_residual: float

    @property
    def m(self) -> int:
        return self.A_coeffs.shape[1]

    def at(self, x) -> np.ndarray:
        return np.einsum("j,jab->ab", np.asarray(x, dtype=float), self.A_coeffs)

    def contains(self, x, tol: float = 0.0) -> bool:
        return np.linalg.eigvalsh(self.at(x) + np.eye(self.m))[0] >= -tol


def _block_arrays(block):
    if isinstance(block, LMIBlock):
        exact = True
        S = [[list(r) for r in Sj] for Sj in block.S]
        T = [list(r) for r in block.T]
        return S, T, exact
    S, T = block
    return np.asarray(S, dtype=float), np.asarray(T, dtype=float), False


def helton_vinnikov_reduce(block: LMIBlock | tuple) -> MonicBlock:
    """Rewrite ``S(x) + T PSD`` (``o`` interior) as ``A(x) + I PSD``.

    ``block`` is an ``LMIBlock`` (exact rank of ``T``) or a pair of float
    arrays ``(S, T)`` with ``S`` of shape ``(n, m, m)`` (rank by a relative
    pivot cutoff).  With ``U`` from a pivoted LDLᵀ of ``T``, the result is
    ``A(x) = diag(S'(x), 0)`` where ``S'(x)`` is the leading ``r × r`` part
    of ``Uᵀ S(x) U``.
    """
    S, T, exact = _block_arrays(block)
    m = len(T)
    n = len(S)
    if exact:
        if not is_psd(T):
            raise NormalizationError("constant term is not positive semidefinite")
        perm, L, D, residual = ldl_pivoted(T)
        Lf = np.array([[float(v) for v in row] for row in L]).reshape(m, m)
        Df = np.array([float(v) for v in D])
        Sf = np.array([[[float(v) for v in r] for r in Sj] for Sj in S]).reshape(n, m, m)
    else:
        Tf = np.asarray(T, dtype=float)
        if not np.allclose(Tf, Tf.T):
            raise NormalizationError("constant term is not symmetric")
        perm, L, D, residual = ldl_pivoted(Tf.tolist(), tol=KERNEL_CUTOFF)
        Lf = np.array(L, dtype=float).reshape(m, m)
        Df = np.array(D, dtype=float)
        if np.any(Df < 0):
            raise NormalizationError("constant term is not positive semidefinite")
        scale = max(1.0, float(np.max(np.abs(Tf)))) if m else 1.0
        if residual and np.max(np.abs(np.array(residual, dtype=float))) > KERNEL_RESIDUAL * scale:
            raise NormalizationError("constant term is not positive semidefinite")
        Sf = np.asarray(S, dtype=float).reshape(n, m, m)
    r = len(D)
    P = np.zeros((m, m))
    for i, p in enumerate(perm):
        P[i, p] = 1.0
    # P T Pᵀ = L diag(D, 0) Lᵀ, so U = Pᵀ L^{-T} diag(D^{-1/2}, 1)
    scale_cols = np.ones(m)
    scale_cols[:r] = 1.0 / np.sqrt(Df)
    U = P.T @ np.linalg.inv(Lf).T @ np.diag(scale_cols)
    kernel = U[:, r:]
    residual_norm = 0.0
    for Sj in Sf:
        if kernel.size:
            size = max(1.0, float(np.max(np.abs(Sj))))
            residual_norm = max(residual_norm, float(np.max(np.abs(Sj @ kernel))) / size)
    if residual_norm > KERNEL_RESIDUAL:
        raise NormalizationError(
            f"kernel of the constant term is not in the kernel of S (residual {residual_norm:.3g}); "
            "the origin is not interior")
    A = np.zeros((n, m, m))
    for j, Sj in enumerate(Sf):
        C = U.T @ Sj @ U
        A[j, :r, :r] = (C[:r, :r] + C[:r, :r].T) / 2
    return MonicBlock(A, r, U, residual_norm)


# ---------------------------------------------------------------------------
# pipeline


@dataclass(frozen=True)
class NormalizedEF:
    triple: EncodingTriple
    certificate: NormalizationCertificate | None
    section: AffineSection | None
    sandwich: Sandwich | None
    rho: float


def _circumradius(target: VPolytope) -> float:
    return math.sqrt(max(sum(c * c for c in v) for v in target.vertices))


def _full_dimensional(H: HPolyhedron):
    """Restrict ``H`` to its affine hull; returns the section and ``H`` in its coordinates."""
    found = relative_interior(H)
    if found is None:
        raise NormalizationError("lifted set is empty")
    implicit, _ = found
    eqs = list(H.eqs) + [H.ineqs[i] for i in implicit]
    par = affine_parametrization([[to_mpq(v) for v in a] for a, _ in eqs],
                                 [to_mpq(b) for _, b in eqs], H.dim)
    x0, N, _ = par
    sec = AffineSection.from_parametrization(x0, N)
    return sec, sec.pull_back(HPolyhedron(H.dim, H.ineqs))


def _linear_triple(H: HPolyhedron, proj: AffineMap, sw: Sandwich) -> EncodingTriple:
    """Blocks ``h_i - g_i·(c + B u) >= 0`` divided by their value at ``u = 0``."""
    k = H.dim
    dtype = object if sw.exact else float
    conv = (lambda v: v) if sw.exact else float
    c, B = sw.center, sw.shape
    rows = []
    for g, h in H.ineqs:
        gv = np.array([conv(v) for v in g], dtype=dtype)
        T = conv(h) - gv @ c if k else conv(h)
        S = -(B.T @ gv) if k else np.zeros(0, dtype=dtype)
        if sw.exact:
            if T < 0 or (T == 0 and any(S)):
                raise NormalizationError("sandwich centre is not interior")
            rows.append(S / T if T else S)
        else:
            mono = helton_vinnikov_reduce((S.reshape(k, 1, 1), np.array([[T]])))
            rows.append(mono.A_coeffs[:, 0, 0])
    phi = np.array([[conv(v) for v in row] for row in proj.matrix], dtype=dtype).reshape(proj.d, k) @ B
    t = np.array([conv(v) for v in proj.offset], dtype=dtype) + \
        np.array([[conv(v) for v in row] for row in proj.matrix], dtype=dtype).reshape(proj.d, k) @ c
    rows = np.array(rows, dtype=dtype).reshape(len(H.ineqs), k)
    return EncodingTriple.linear(rows, phi, t)


def _interior_point(blocks, k):
    x0 = np.zeros(k)
    for block in blocks:
        if np.linalg.eigvalsh(block.at_float(x0))[0] <= 0:
            raise NormalizationError("the section origin is not interior to the spectrahedron")
    return x0


def normalize(ef: LinearEF | SemidefEF, target: VPolytope, *, tol: float = 1e-8,
              exact: bool = False, samples: int = 1000, seed: int = 0,
              preimages: Sequence[Sequence] | None = None, check: bool = True) -> NormalizedEF:
    """Normalized triple of ``ef`` with ``(l, m)`` preserved.

    Targets of dimension at most zero give the empty sentinel triple.  With
    ``check`` (the default) a failing certificate raises
    ``NormalizationError``.
    """
    if target.is_empty or target.affine_dim() <= 0:
        t = target.vertices[0] if not target.is_empty else None
        return NormalizedEF(EncodingTriple.empty(target.dim, t), None, None, None, 0.0)
    rho = _circumradius(target)
    if isinstance(ef, LinearEF):
        sec = bounded_section(ef.lifted, ef.proj, target, preimages)
        H = sec.pull_back(ef.lifted)
        inner, Hf = _full_dimensional(H)
        sec = sec.compose(inner)
        proj = sec.pull_back_map(ef.proj)
        sw = sandwich_transform(Hf, tol=tol, exact=exact)
        triple = _linear_triple(Hf, proj, sw)
    elif isinstance(ef, SemidefEF):
        if exact:
            raise NormalizationError("the exact path exists only for linear formulations")
        sec = bounded_section(ef, ef.proj, target, preimages)
        blocks = [sec.pull_back_block(b) for b in ef.blocks]
        proj = sec.pull_back_map(ef.proj)
        k = sec.dim
        x0 = _interior_point(blocks, k)
        center, shape = _semidef_sandwich(blocks, x0, samples, seed)
        A = []
        for block in blocks:
            S = np.array([[[float(v) for v in r] for r in Sj] for Sj in block.S]).reshape(k, block.m, block.m)
            T = block.at_float(center)
            S_ball = np.einsum("ji,jab->iab", shape, S)
            A.append(helton_vinnikov_reduce((S_ball, T)).A_coeffs)
        A = np.array(A)
        C = np.array([[float(v) for v in r] for r in proj.matrix]).reshape(proj.d, k)
        phi = C @ shape
        t = np.array([float(v) for v in proj.offset]) + C @ center
        triple = EncodingTriple(A, phi, t)
        # shrink until the certified A-norm bracket puts the unit ball inside
        upper = triple_norms(triple, samples=samples, seed=seed).norm_A_upper
        if upper > 1:
            shape = shape / upper
            triple = EncodingTriple(A / upper, phi / upper, t)
        sw = Sandwich(center, shape, 0.0, float("nan"))
    else:
        raise TypeError(f"not a formulation: {type(ef).__name__}")
    cert = validate_normalized(triple, rho, samples=samples, seed=seed)
    if check and not cert.passed:
        raise NormalizationError(f"normalization certificate failed: {cert}")
    return NormalizedEF(triple, cert, sec, sw, rho)
