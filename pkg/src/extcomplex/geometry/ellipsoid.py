"""Maximum-volume inscribed ellipsoid of a polytope.

The ellipsoid is ``{c + B u : |u| <= 1}`` with ``B`` symmetric positive
definite.  We maximize ``log det B`` subject to ``|B a_i| + a_i·c <= b_i`` with
a log-barrier method: Newton steps on ``-t log det B - sum log(slack_i)`` and
``t`` increased geometrically until the duality gap ``m/t`` is small.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .polytope import HPolyhedron, VPolytope, enumerate_vertices

__all__ = ["Ellipsoid", "EllipsoidError", "john_ellipsoid", "inscribed_ellipsoid"]

logger = logging.getLogger(__name__)


class EllipsoidError(RuntimeError):
    pass


@dataclass(frozen=True)
class Ellipsoid:
    """Image of the unit ball under ``u -> center + shape @ u``."""

    center: np.ndarray
    shape: np.ndarray
    inner_slack: float = 0.0
    outer_ratio: float = float("nan")

    @property
    def dim(self) -> int:
        return len(self.center)

    def log_volume(self) -> float:
        """log det of the shape (volume up to the unit-ball constant)."""
        return float(np.linalg.slogdet(self.shape)[1])

    def contains(self, x, tol: float = 0.0) -> bool:
        y = np.linalg.solve(self.shape, np.asarray(x, dtype=float) - self.center)
        return float(np.linalg.norm(y)) <= 1.0 + tol

    def gauge(self, x) -> float:
        """Smallest ``s`` with ``x`` in ``center + s (E - center)``."""
        y = np.linalg.solve(self.shape, np.asarray(x, dtype=float) - self.center)
        return float(np.linalg.norm(y))


def _sym_basis(d):
    basis = []
    for p in range(d):
        for q in range(p, d):
            E = np.zeros((d, d))
            E[p, q] = E[q, p] = 1.0
            basis.append(E)
    return np.array(basis)


def inscribed_ellipsoid(A, b, x0, *, gap: float = 1e-12, max_iter: int = 10_000) -> Ellipsoid:
    """Barrier method for ``max log det B`` over ``{|B a_i| + a_i c <= b_i}``.

    ``x0`` must be strictly feasible.  Works in coordinates centred at ``x0``
    and scaled by the inradius guess to keep Newton systems well conditioned.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    m, d = A.shape
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0):
        keep = norms > 0
        A, b, norms = A[keep], b[keep], norms[keep]
        m = len(b)
    A = A / norms[:, None]
    b = b / norms
    b = b - A @ x0
    if np.any(b <= 0):
        raise EllipsoidError("starting point is not strictly interior")
    scale = float(np.min(b))
    b = b / scale

    basis = _sym_basis(d)
    K = len(basis)
    G = np.einsum("kij,mj->mik", basis, A)  # G[i] @ theta = B a_i
    theta = np.zeros(K)
    diag_idx = [k for k, E in enumerate(basis) if np.count_nonzero(E) == 1]
    theta[diag_idx] = 0.5
    c = np.zeros(d)

    def unpack(th):
        return np.einsum("k,kij->ij", th, basis)

    def barrier(th, cc, t):
        B = unpack(th)
        try:
            L = np.linalg.cholesky(B)
        except np.linalg.LinAlgError:
            return math.inf
        w = np.einsum("mik,k->mi", G, th)
        s = b - A @ cc - np.linalg.norm(w, axis=1)
        if np.any(s <= 0):
            return math.inf
        return -t * 2.0 * np.sum(np.log(np.diag(L))) - np.sum(np.log(s))

    t = 1.0
    iters = 0
    mu = 8.0
    while True:
        while True:
            iters += 1
            if iters > max_iter:
                raise EllipsoidError(f"no convergence after {max_iter} Newton steps")
            B = unpack(theta)
            Binv = np.linalg.inv(B)
            X = np.einsum("ij,kjl->kil", Binv, basis)
            grad_th = -t * np.einsum("kii->k", X)
            H_th = t * np.einsum("kij,lji->kl", X, X)
            w = np.einsum("mik,k->mi", G, theta)
            sn = np.linalg.norm(w, axis=1)
            sigma = b - A @ c - sn
            gvec = np.einsum("mik,mi->mk", G, w) / sn[:, None]  # d|w|/dtheta
            V = np.hstack([gvec, A])  # gradient of -sigma
            grad = np.concatenate([grad_th, np.zeros(d)]) + V.T @ (1.0 / sigma)
            H = np.zeros((K + d, K + d))
            H[:K, :K] = H_th
            H += (V / sigma[:, None] ** 2).T @ V
            for i in range(m):
                P = np.eye(d) / sn[i] - np.outer(w[i], w[i]) / sn[i] ** 3
                H[:K, :K] += G[i].T @ P @ G[i] / sigma[i]
            try:
                step = -np.linalg.solve(H, grad)
            except np.linalg.LinAlgError:
                step = -np.linalg.lstsq(H, grad, rcond=None)[0]
            dec = float(-grad @ step)
            if dec / 2.0 <= 1e-10:
                break
            f0 = barrier(theta, c, t)
            alpha = 1.0
            while True:
                th_new = theta + alpha * step[:K]
                c_new = c + alpha * step[K:]
                f1 = barrier(th_new, c_new, t)
                if f1 <= f0 - 0.25 * alpha * dec:
                    break
                alpha *= 0.5
                if alpha < 1e-16:
                    break
            # at large t the decrease drowns in rounding noise
            if alpha < 1e-16 or not f1 < f0:
                break
            theta, c = th_new, c_new
        if m / t < gap:
            break
        t *= mu

    B = unpack(theta) * scale
    center = x0 + c * scale
    logger.debug("inscribed ellipsoid: %d Newton steps, final t=%.3g", iters, t)
    return Ellipsoid(center, B)


def _check_sandwich(E: Ellipsoid, A, b, verts, n, tol):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    inner = 0.0
    for a_i, b_i in zip(A, b):
        na = np.linalg.norm(a_i)
        if na == 0:
            continue
        room = b_i - a_i @ E.center
        used = np.linalg.norm(E.shape @ a_i)
        inner = max(inner, (used - room) / max(room, 1e-300))
    outer = max((E.gauge(v) for v in verts), default=0.0)
    return inner, outer / n


def john_ellipsoid(P: HPolyhedron, tol: float = 1e-8, *, max_iter: int = 10_000,
                   vertices: VPolytope | None = None) -> Ellipsoid:
    """Maximum-volume ellipsoid inside the bounded, full-dimensional ``P``.

    The result is certified a posteriori: every facet is respected up to
    relative slack ``tol`` and every vertex of ``P`` lies in
    ``center + n (E - center)`` up to relative slack ``tol``.
    """
    if P.eqs:
        raise EllipsoidError("polyhedron has equations, so it is not full-dimensional")
    verts = vertices if vertices is not None else enumerate_vertices(P)
    n = P.dim
    if len(verts) <= n:
        raise EllipsoidError("polyhedron is empty or lower-dimensional")
    V = np.array([[float(c) for c in v] for v in verts.vertices])
    if np.linalg.matrix_rank(V[1:] - V[0]) < n:
        raise EllipsoidError("polyhedron is lower-dimensional")
    A = np.array([[float(c) for c in a] for a, _ in P.ineqs])
    b = np.array([float(bb) for _, bb in P.ineqs])
    x0 = V.mean(axis=0)
    E = inscribed_ellipsoid(A, b, x0, gap=min(1e-12, tol * 1e-4), max_iter=max_iter)
    inner, outer = _check_sandwich(E, A, b, V, n, tol)
    if inner > tol or outer > 1.0 + tol:
        raise EllipsoidError(
            f"sandwich certificate failed: inner slack {inner:.3g}, outer ratio {outer:.12g}")
    return Ellipsoid(E.center, E.shape, inner_slack=inner, outer_ratio=outer)
