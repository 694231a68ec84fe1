"""Linear and semidefinite extended formulations.

A formulation is a lifted feasible set ``Q`` in ``R^n`` plus an affine map
``proj : R^n -> R^d``; it describes the polytope ``proj(Q)``.  ``Q`` is
either a polyhedron (``LinearEF``) or a block-diagonal spectrahedron
``{x : M_i(x) PSD for every block i}`` (``SemidefEF``).

``EncodingTriple`` is the normalized, floating-point form ``(A, phi, t)`` of
a formulation: it describes ``{phi x + t : A(x) + I PSD}`` with ``A`` linear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .geometry.lp import LinearProgram
from .geometry.polytope import (
    AffineMap,
    HPolyhedron,
    UnboundedError,
    VPolytope,
    convex_hull_facets,
    enumerate_vertices,
    is_bounded,
    recession_direction,
)
from .geometry.rational import as_fraction, as_vector, is_psd

__all__ = [
    "LinearEF",
    "LMIBlock",
    "SemidefEF",
    "EncodingTriple",
    "TripleNorms",
    "NormalizationCertificate",
    "VerificationReport",
    "ef_membership",
    "ef_project_size",
    "verify_linear_ef",
    "triple_norms",
    "triple_distance_bound",
    "validate_normalized",
]


@dataclass(frozen=True)
class LinearEF:
    """Polyhedral lift ``lifted`` with projection ``proj``."""

    lifted: HPolyhedron
    proj: AffineMap

    def __post_init__(self):
        if self.proj.n != self.lifted.dim:
            raise ValueError(f"projection starts in R^{self.proj.n}, lifted set lives in R^{self.lifted.dim}")

    def size(self) -> int:
        return self.lifted.size()

    @property
    def n(self) -> int:
        return self.lifted.dim

    @property
    def d(self) -> int:
        return self.proj.d


def _sym_matrix(rows) -> tuple[tuple[Fraction, ...], ...]:
    mat = tuple(as_vector(r) for r in rows)
    k = len(mat)
    for i, r in enumerate(mat):
        if len(r) != k:
            raise ValueError("LMI coefficient matrices must be square")
        for j in range(i):
            if r[j] != mat[j][i]:
                raise ValueError("LMI coefficient matrices must be symmetric")
    return mat


@dataclass(frozen=True)
class LMIBlock:
    """Affine matrix map ``M(x) = sum_j x_j S[j] + T`` into symmetric ``m x m``."""

    S: tuple
    T: tuple

    def __post_init__(self):
        T = _sym_matrix(self.T)
        S = tuple(_sym_matrix(Sj) for Sj in self.S)
        for Sj in S:
            if len(Sj) != len(T):
                raise ValueError("LMI coefficient matrices of different sizes")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "S", S)

    @property
    def m(self) -> int:
        return len(self.T)

    @property
    def n(self) -> int:
        return len(self.S)

    def at(self, x: Sequence) -> list[list[Fraction]]:
        x = as_vector(x)
        if len(x) != self.n:
            raise ValueError(f"point of length {len(x)} for a block in {self.n} variables")
        M = [list(row) for row in self.T]
        for xj, Sj in zip(x, self.S):
            if xj:
                for i in range(self.m):
                    for k in range(self.m):
                        if Sj[i][k]:
                            M[i][k] += xj * Sj[i][k]
        return M

    def at_float(self, x) -> np.ndarray:
        S = np.array([[[float(v) for v in r] for r in Sj] for Sj in self.S]).reshape(self.n, self.m, self.m)
        return np.einsum("j,jik->ik", np.asarray(x, dtype=float), S) + \
            np.array([[float(v) for v in r] for r in self.T]).reshape(self.m, self.m)


@dataclass(frozen=True)
class SemidefEF:
    """Spectrahedral lift: every block PSD, then ``proj``."""

    blocks: tuple[LMIBlock, ...]
    proj: AffineMap

    def __post_init__(self):
        blocks = tuple(self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if {b.n for b in blocks} - {self.proj.n}:
            raise ValueError("every block must act on the projection's source space")
        if len({b.m for b in blocks}) > 1:
            raise ValueError("all blocks must have the same size")

    @property
    def m(self) -> int:
        return self.blocks[0].m if self.blocks else 0

    @property
    def n(self) -> int:
        return self.proj.n

    @property
    def d(self) -> int:
        return self.proj.d

    def size(self) -> int:
        """Total LMI size ``k = l m``."""
        return len(self.blocks) * self.m


def ef_membership(ef: LinearEF | SemidefEF, x: Sequence) -> bool:
    """Exact test whether ``x`` lies in the lifted set of ``ef``."""
    x = as_vector(x)
    if len(x) != ef.n:
        raise ValueError(f"point of length {len(x)} for a formulation in R^{ef.n}")
    if isinstance(ef, LinearEF):
        return ef.lifted.contains(x)
    return all(is_psd(block.at(x)) for block in ef.blocks)


def ef_project_size(ef) -> tuple[int, int, int, int]:
    """``(l, m, n, d)``: number of LMIs, their size, lifted and target dimension."""
    if isinstance(ef, LinearEF):
        return ef.size(), 1, ef.n, ef.d
    if isinstance(ef, SemidefEF):
        return len(ef.blocks), ef.m, ef.n, ef.d
    if isinstance(ef, EncodingTriple):
        return ef.l, ef.m, ef.n, ef.d
    raise TypeError(f"not a formulation: {type(ef).__name__}")


# ---------------------------------------------------------------------------
# exact verification of linear formulations


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of ``verify_linear_ef``.

    On failure ``kind`` is ``"vertex"`` (a target vertex has no preimage),
    ``"facet"`` or ``"equation"`` (the projection leaves the target).
    ``constraint`` is the offending vertex or ``(a, b)`` pair and ``witness``
    a lifted point whose image ``image`` violates it.
    """

    verified: bool
    kind: str | None = None
    constraint: tuple | None = None
    witness: tuple[Fraction, ...] | None = None
    image: tuple[Fraction, ...] | None = None
    checked_vertices: int = 0
    checked_facets: int = 0

    def __bool__(self) -> bool:
        return self.verified


def _compose_row(a, proj: AffineMap):
    """Coefficients and constant of ``y -> a·proj(y)``."""
    row = [sum((ai * m[j] for ai, m in zip(a, proj.matrix) if ai), Fraction(0)) for j in range(proj.n)]
    const = sum((ai * o for ai, o in zip(a, proj.offset) if ai), Fraction(0))
    return row, const


def verify_linear_ef(ef: LinearEF, target: VPolytope) -> VerificationReport:
    """Decide ``proj(lifted) == conv(target)`` exactly with LPs.

    Every target vertex must have a preimage, and every facet and affine-hull
    equation of the target must hold on the whole image.
    """
    if target.is_empty:
        raise ValueError("verification needs a non-empty target")
    if target.dim != ef.d:
        raise ValueError(f"target lives in R^{target.dim}, formulation projects to R^{ef.d}")
    H = ef.lifted
    program = H.lp()
    if not H.empty and not is_bounded(H, program):
        raise UnboundedError("verification needs a bounded lifted set")
    feasible = not H.empty and program.is_feasible
    A = [a for a, _ in H.ineqs]
    b = [bb for _, bb in H.ineqs]
    E = [a for a, _ in H.eqs]
    f = [bb for _, bb in H.eqs]
    proj = ef.proj
    for count, v in enumerate(target.vertices):
        if not feasible:
            return VerificationReport(False, "vertex", v, checked_vertices=count)
        rows = [list(r) for r in proj.matrix]
        rhs = [vi - oi for vi, oi in zip(v, proj.offset)]
        pre = LinearProgram(H.dim, A, b, E + rows, f + rhs)
        if not pre.is_feasible:
            return VerificationReport(False, "vertex", v, checked_vertices=count)
    hull = convex_hull_facets(target)
    checks = [("facet", a, bb, "max") for a, bb in hull.ineqs]
    checks += [("equation", a, bb, s) for a, bb in hull.eqs for s in ("max", "min")]
    for count, (kind, a, bb, sense) in enumerate(checks):
        row, const = _compose_row(a, proj)
        res = program.optimize(row, sense)
        value = res.value + const
        bad = value > bb if sense == "max" else value < bb
        if bad:
            return VerificationReport(False, kind, (a, bb), res.x, proj.apply(res.x),
                                      len(target.vertices), count)
    return VerificationReport(True, checked_vertices=len(target.vertices), checked_facets=len(checks))


# ---------------------------------------------------------------------------
# normalized triples


@dataclass(frozen=True, eq=False)
class EncodingTriple:
    """``(A, phi, t)`` describing ``{phi @ x + t : A(x) + I PSD}``.

    ``A`` has shape ``(l, n, m, m)``: ``A[i, j]`` is the coefficient of
    ``x_j`` in block ``i``.  Arrays are float, or object arrays of
    ``Fraction`` on the exact path.
    """

    A: np.ndarray
    phi: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A)
        phi = np.asarray(self.phi)
        t = np.asarray(self.t)
        if A.ndim != 4 or A.shape[2] != A.shape[3]:
            raise ValueError("A must have shape (l, n, m, m)")
        if phi.ndim != 2 or phi.shape != (t.shape[0], A.shape[1]):
            raise ValueError(f"phi has shape {phi.shape}, expected ({t.shape[0]}, {A.shape[1]})")
        if not np.all(A == np.swapaxes(A, 2, 3)):
            raise ValueError("A blocks must be symmetric")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "t", t)

    @property
    def l(self) -> int:  # noqa: E743
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[2]

    @property
    def d(self) -> int:
        return self.t.shape[0]

    @property
    def is_exact(self) -> bool:
        return self.A.dtype == object

    @property
    def is_empty(self) -> bool:
        """The sentinel for point and empty targets (no LMIs at all)."""
        return self.l == 0

    @classmethod
    def empty(cls, d: int, t=None) -> "EncodingTriple":
        t = np.zeros(d) if t is None else np.asarray([float(v) for v in t])
        return cls(np.zeros((0, 0, 1, 1)), np.zeros((d, 0)), t)

    @classmethod
    def linear(cls, rows, phi, t) -> "EncodingTriple":
        """Triple with ``m = 1`` from the coefficient rows ``a_i`` of ``1 + a_i·x >= 0``."""
        rows = np.asarray(rows)
        return cls(rows[:, :, None, None], np.asarray(phi), np.asarray(t))

    def as_float(self) -> "EncodingTriple":
        if not self.is_exact:
            return self
        return EncodingTriple(self.A.astype(float), self.phi.astype(float), self.t.astype(float))

    def shape(self) -> tuple[int, int, int, int]:
        return self.l, self.m, self.n, self.d

    def operator(self, x) -> np.ndarray:
        """Blocks ``A_i(x)`` as an ``(l, m, m)`` float array."""
        return np.einsum("j,ijab->iab", np.asarray(x, dtype=float), self.as_float().A)

    def contains_lifted(self, x, tol: float = 0.0) -> bool:
        blocks = self.operator(x) + np.eye(self.m)
        return all(np.linalg.eigvalsh(b)[0] >= -tol for b in blocks)

    def __sub__(self, other: "EncodingTriple") -> "EncodingTriple":
        if self.shape() != other.shape():
            raise ValueError(f"triples of shapes {self.shape()} and {other.shape()}")
        a, b = self.as_float(), other.as_float()
        return EncodingTriple(a.A - b.A, a.phi - b.phi, a.t - b.t)


@dataclass(frozen=True)
class TripleNorms:
    norm_A_lower: float
    norm_A_upper: float
    norm_phi: float
    norm_t: float

    @property
    def exact_A(self) -> bool:
        return self.norm_A_lower == self.norm_A_upper

    def __iter__(self):
        return iter((self.norm_A_lower, self.norm_A_upper, self.norm_phi, self.norm_t))


def _spectral_norm(M: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on ``MᵀM``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0 or not np.any(M):
        return 0.0
    G = M.T @ M
    v = np.ones(G.shape[0]) + np.arange(G.shape[0]) * 1e-3
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            # started in the kernel; restart along the largest column
            v = G[:, np.argmax(np.linalg.norm(G, axis=0))]
            v = v / np.linalg.norm(v)
            continue
        v = w / nw
        if abs(nw - lam) <= tol * nw:
            lam = nw
            break
        lam = nw
    return math.sqrt(float(v @ G @ v))


def _exact_norm(vec) -> float:
    """Euclidean norm, squared sum exact for rational entries."""
    vals = [as_fraction(v) if not isinstance(v, float) else Fraction(v) for v in np.ravel(vec)]
    return math.sqrt(sum(v * v for v in vals))


def _block_upper(Ai: np.ndarray) -> float:
    """Valid upper bound on ``max_{|x|=1} |A_i(x)|_2`` for one block ``(n, m, m)``."""
    n = Ai.shape[0]
    if n == 0:
        return 0.0
    coeff = np.array([np.linalg.norm(Ai[j], 2) for j in range(n)])
    cauchy = float(np.sqrt(np.sum(coeff ** 2)))
    frob = float(np.linalg.norm(Ai.reshape(n, -1).T, 2))
    return min(cauchy, frob)


def _norm_A_lower(A: np.ndarray, samples: int, rng: np.random.Generator) -> float:
    l, n, m, _ = A.shape
    X = rng.standard_normal((samples, n))
    X /= np.linalg.norm(X, axis=1)[:, None]
    X = np.vstack([X, np.eye(n), -np.eye(n)])
    vals = np.abs(np.linalg.eigvalsh(np.einsum("sj,ijab->siab", X, A)))
    per_sample = vals.max(axis=(1, 2))
    best = float(per_sample.max())
    # polish the best samples: x <- (v^T A_j v)_j with v a top eigenvector of A(x)
    for s in np.argsort(per_sample)[-5:]:
        x = X[s]
        for _ in range(50):
            blocks = np.einsum("j,ijab->iab", x, A)
            w, V = np.linalg.eigh(blocks)
            i, k = np.unravel_index(np.argmax(np.abs(w)), w.shape)
            v = V[i][:, k]
            g = np.einsum("a,jab,b->j", v, A[i], v)
            ng = np.linalg.norm(g)
            if ng == 0:
                break
            x = g / ng
            best = max(best, float(np.max(np.abs(np.linalg.eigvalsh(np.einsum("j,ijab->iab", x, A))))))
    return best


def triple_norms(tr: EncodingTriple, *, samples: int = 1000, seed: int = 0) -> TripleNorms:
    """Operator norms of the three parts of ``tr``.

    ``‖phi‖`` and ``‖t‖`` are computed directly.  ``‖A‖`` is exact for
    ``m = 1`` (the largest row norm); otherwise it is bracketed between a
    sampled lower bound and the smaller of two valid upper bounds
    (Cauchy-Schwarz over the coefficient matrices, and the Frobenius norm of
    each block's coefficient tensor).
    """
    norm_t = _exact_norm(tr.t)
    f = tr.as_float()
    norm_phi = _spectral_norm(f.phi)
    if tr.l == 0 or tr.n == 0:
        return TripleNorms(0.0, 0.0, norm_phi, norm_t)
    if tr.m == 1:
        rows = tr.A[:, :, 0, 0]
        exact = max(_exact_norm(r) for r in rows)
        return TripleNorms(exact, exact, norm_phi, norm_t)
    A = f.A
    upper = max(_block_upper(A[i]) for i in range(tr.l))
    lower = _norm_A_lower(A, samples, np.random.default_rng(seed))
    return TripleNorms(min(lower, upper), upper, norm_phi, norm_t)


def triple_distance_bound(tr: EncodingTriple, other: EncodingTriple, rho: float, **kw) -> float:
    """``rho n² ‖A−A′‖ + n ‖phi−phi′‖ + ‖t−t′‖`` using the upper ``A`` bracket."""
    diff = tr - other
    norms = triple_norms(diff, **kw)
    n = tr.n
    return float(rho) * n * n * norms.norm_A_upper + n * norms.norm_phi + norms.norm_t


# ---------------------------------------------------------------------------
# certificates


@dataclass(frozen=True)
class NormalizationCertificate:
    l: int  # noqa: E741
    m: int
    n: int
    rho: float
    norm_A_lower: float
    norm_A_upper: float
    norm_phi: float
    norm_t: float
    n_check: bool
    inner_ball: bool
    phi_check: bool
    t_check: bool
    outer_ball: bool
    outer_ball_exact: bool
    max_outer_norm: float
    notes: tuple[str, ...] = field(default=())

    @property
    def passed(self) -> bool:
        return self.n_check and self.inner_ball and self.phi_check and self.t_check and self.outer_ball


def _exact_rows(A: np.ndarray):
    return [[Fraction(v) if isinstance(v, float) else as_fraction(v) for v in row] for row in A[:, :, 0, 0]]


def _linear_outer(tr: EncodingTriple):
    """Max vertex norm of ``{x : 1 + a_i·x >= 0}`` (exactly, on the stored values)."""
    rows = _exact_rows(tr.A)
    H = HPolyhedron(tr.n, tuple((tuple(-v for v in r), 1) for r in rows))
    if recession_direction(H) is not None:
        return math.inf
    verts = enumerate_vertices(H)
    return math.sqrt(max(sum(c * c for c in v) for v in verts.vertices))


def _sampled_outer(tr: EncodingTriple, samples: int, rng: np.random.Generator) -> float:
    """Largest ray length ``s`` with ``I + s A(u) PSD`` over sampled unit ``u``."""
    A = tr.as_float().A
    U = rng.standard_normal((samples, tr.n))
    U /= np.linalg.norm(U, axis=1)[:, None]
    U = np.vstack([U, np.eye(tr.n), -np.eye(tr.n)])
    lam_min = np.linalg.eigvalsh(np.einsum("sj,ijab->siab", U, A)).min(axis=(1, 2))
    if np.any(lam_min >= 0):
        return math.inf
    return float(np.max(-1.0 / lam_min))


def validate_normalized(tr: EncodingTriple, rho: float, *, rel_tol: float = 1e-6,
                        samples: int = 1000, seed: int = 0) -> NormalizationCertificate:
    """Check ``B^n ⊆ Q ⊆ n B^n``, the norm bounds and ``n <= l m²``.

    Never raises on a failed check; the certificate records it.  For
    ``m = 1`` the outer-ball check is exact on the stored coefficients; for
    ``m > 1`` it is a sampled probe and ``outer_ball_exact`` is false.
    """
    rho = float(rho)
    norms = triple_norms(tr, samples=samples, seed=seed)
    notes = []
    n, l, m = tr.n, tr.l, tr.m
    n_check = n <= l * m * m
    inner = norms.norm_A_upper <= 1 + rel_tol
    phi_ok = norms.norm_phi <= rho * (1 + rel_tol)
    t_ok = norms.norm_t <= rho * (1 + rel_tol)
    if n == 0:
        outer_norm, exact = 0.0, True
    elif m == 1:
        outer_norm, exact = _linear_outer(tr), True
    else:
        outer_norm = _sampled_outer(tr, samples, np.random.default_rng(seed + 1))
        exact = False
        notes.append("outer ball probed along sampled rays only")
    if not norms.exact_A:
        notes.append("A-norm is a bracket; the inner-ball check uses its upper end")
    outer = outer_norm <= n * (1 + rel_tol)
    return NormalizationCertificate(l, m, n, rho, norms.norm_A_lower, norms.norm_A_upper,
                                    norms.norm_phi, norms.norm_t, n_check, inner, phi_ok, t_ok,
                                    outer, exact, outer_norm, tuple(notes))
