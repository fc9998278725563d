"""Minimal-volume enclosing ellipsoids and the sandwich index bounds.

The enclosing ellipsoid is computed by barycentric coordinate ascent on the
dual log-det problem (Khachiyan's method with Todd-Yildirim drop steps).  In
symmetric mode the points are reflected through the origin and the ellipsoid
is centred there.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import capacities as cap
from . import geometry as geo

__all__ = [
    "JohnResult",
    "SandwichReport",
    "enclosing_ellipsoid",
    "body_vertices",
    "john_for_body",
    "verify_sandwich",
    "capacity_bound_report",
]


@dataclass
class JohnResult:
    """Ellipsoid ``{x : (x - center)^T shape (x - center) <= 1}`` with its certificate."""

    center: np.ndarray
    shape: np.ndarray
    iterations: int
    duality_gap: float
    centrally_symmetric: bool
    tol: float = 1e-6

    @property
    def dim(self):
        return len(self.center)

    @property
    def ellipsoid(self):
        """The ellipsoid as a body (even dimension, origin inside)."""
        return geo.Ellipsoid(self.shape, center=self.center)

    @property
    def sandwich_factor(self):
        """Shrink factor ``1/d`` (or ``1/sqrt(d)`` when symmetric) of the inner copy."""
        d = self.dim
        return 1 / np.sqrt(d) if self.centrally_symmetric else 1 / d

    def normal_form(self):
        return cap.symplectic_semi_axes(self.shape)

    def c1_bound(self):
        return float(self.normal_form()[0])

    def to_json(self):
        return {
            "center": self.center.tolist(),
            "shape": self.shape.tolist(),
            "gap": self.duality_gap,
            "a_normal_form": self.normal_form().tolist(),
            "c1_bound": self.c1_bound(),
        }


def _ascent(Q, d, tol, max_iter):
    """Weights ``u`` on the columns of ``Q`` maximising ``log det(Q u Q^T)``.

    ``d`` is the row count of ``Q``; stops when ``max_j q_j^T X^{-1} q_j <= d (1 + tol)``.
    """
    m = Q.shape[1]
    u = np.full(m, 1.0 / m)
    for it in range(1, max_iter + 1):
        X = (Q * u) @ Q.T
        g = np.einsum("ij,ij->j", Q, np.linalg.solve(X, Q))
        j = int(np.argmax(g))
        kmax = g[j]
        gap = kmax / d - 1
        if gap <= tol:
            return u, gap, it
        act = np.flatnonzero(u > 0)
        i = act[np.argmin(g[act])]
        kmin = g[i]
        if kmax - d >= d - kmin:
            s = (kmax - d) / (d * (kmax - 1))
            u *= 1 - s
            u[j] += s
        else:
            # drop weight from the least useful support point
            full = u[i] / (1 - u[i])
            s = full if kmin <= 1 else min((d - kmin) / (d * (kmin - 1)), full)
            u *= 1 + s
            u[i] -= s
            u[i] = max(u[i], 0.0)
    return u, gap, max_iter


def enclosing_ellipsoid(points, tol=1e-6, centrally_symmetric=False, max_iter=100_000):
    """(1 + tol)-approximate minimal-volume ellipsoid containing the points.

    The returned shape is scaled so that every point satisfies
    ``(p - c)^T A (p - c) <= 1``.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or len(P) == 0:
        raise ValueError("points must be a nonempty 2-D array")
    if not 0 < tol <= 1e-2:
        raise ValueError("tol must lie in (0, 1e-2]")
    m, d = P.shape
    if centrally_symmetric:
        if np.linalg.matrix_rank(P, tol=1e-10 * max(1.0, np.abs(P).max())) < d:
            raise ValueError("points do not linearly span the space")
        Q = np.vstack([P, -P]).T
        u, gap, it = _ascent(Q, d, tol, max_iter)
        c = np.zeros(d)
        A = np.linalg.inv((Q * u) @ Q.T) / d
    else:
        D = P - P[0]
        if np.linalg.matrix_rank(D, tol=1e-10 * max(1.0, np.abs(D).max())) < d:
            raise ValueError("points do not affinely span the space")
        Q = np.vstack([P.T, np.ones(m)])
        u, gap, it = _ascent(Q, d + 1, tol, max_iter)
        c = P.T @ u
        A = np.linalg.inv((P.T * u) @ P - np.outer(c, c)) / d
    A = 0.5 * (A + A.T)
    R = P - c
    worst = np.einsum("ij,jk,ik->i", R, A, R).max()
    A = A / worst
    return JohnResult(c, A, it, float(max(gap, 0.0)),
                      bool(centrally_symmetric), tol)


def body_vertices(body):
    """Vertex set of a polytopal body in working coordinates, or None."""
    if isinstance(body, geo.VPolytope):
        return body.vertices
    if isinstance(body, geo.LagrangianProduct):
        P, Q = body.P.vertices, body.Q.vertices
        n = P.shape[1]
        V = np.empty((len(P) * len(Q), 2 * n))
        V[:, :n] = np.repeat(P, len(Q), axis=0)
        V[:, n:] = np.tile(Q, (len(P), 1))
        return V
    if isinstance(body, geo.Scaled):
        inner = body_vertices(body.inner)
        return None if inner is None else body.lam * inner
    return None


def _is_symmetric(V):
    return geo._same_point_set(V, -V, tol=1e-9)


def john_for_body(body, tol=1e-6, centrally_symmetric=None):
    """Enclosing ellipsoid of a body: itself for ellipsoids, Khachiyan for polytopes."""
    if isinstance(body, geo.Ellipsoid):
        sym = not np.any(body.center)
        return JohnResult(body.center.copy(), body.shape.copy(), 0, 0.0, sym, tol)
    if isinstance(body, geo.Scaled) and isinstance(body.inner, geo.Ellipsoid):
        inner = john_for_body(body.inner, tol)
        lam = body.lam
        return JohnResult(lam * inner.center, inner.shape / lam**2, 0, 0.0,
                          inner.centrally_symmetric, tol)
    V = body_vertices(body)
    if V is None:
        raise ValueError(f"no enclosing-ellipsoid route for body kind {body.kind!r}")
    if centrally_symmetric is None:
        centrally_symmetric = _is_symmetric(V)
    return enclosing_ellipsoid(V, tol, centrally_symmetric)


@dataclass
class SandwichReport:
    outer_ok: bool
    inner_ok: bool
    worst_direction: np.ndarray | None = None
    margin: float = 0.0
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.outer_ok and self.inner_ok


def verify_sandwich(body, result, directions=1000, seed=0):
    """Check ``c + f (E - c) <= K <= (1 + tol) E`` for the sandwich factor ``f``.

    The outer inclusion is tested on the vertices, the inner one by comparing
    support functions on random directions.  ``margin`` is the smallest
    ``h_K - h_inner`` seen; the direction attaining it is kept when negative.
    """
    V = body_vertices(body)
    if V is None:
        V = body.boundary_points(directions, np.random.default_rng(seed))
    R = V - result.center
    form = np.einsum("ij,jk,ik->i", R, result.shape, R)
    outer_ok = bool(form.max() <= 1 + result.tol)
    rng = np.random.default_rng(seed)
    U = rng.standard_normal((directions, body.dim))
    U /= np.linalg.norm(U, axis=1)[:, None]
    f = result.sandwich_factor
    Ainv = np.linalg.inv(result.shape)
    h_in = U @ result.center + f * np.sqrt(np.einsum("ij,jk,ik->i", U, Ainv, U))
    slack = geo.support(body, U) - h_in
    k = int(np.argmin(slack))
    margin = float(slack[k])
    inner_ok = margin >= -1e-12 * max(1.0, body.diameter())
    worst = None if inner_ok else U[k]
    return SandwichReport(outer_ok, bool(inner_ok), worst, margin,
                          {"max_form": float(form.max()), "factor": float(f)})


def capacity_bound_report(body, john, c1=None, cfg=None):
    """Upper bound ``c_1(K) <= c_1(E)`` from the enclosing ellipsoid.

    ``c1`` is the numeric first capacity; it is computed when omitted.
    """
    if c1 is None:
        c1 = cap.c1_numeric(body, cfg)
    flavor = "centrally_symmetric" if john.centrally_symmetric else "general"
    bound = john.c1_bound()
    return {
        "a_normal_form": john.normal_form().tolist(),
        "c1_bound": bound,
        "c1_numeric": float(c1),
        "consistent": bool(c1 <= bound * (1 + 1e-6)),
        "index_flavor": flavor,
        "index_bound": cap.index_bound(body.n, flavor),
    }
