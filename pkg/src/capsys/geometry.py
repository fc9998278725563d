"""Convex bodies in R^{2n} given through exact oracles.

Vectors in R^{2n} use block ordering ``(x_1, ..., x_n, y_1, ..., y_n)`` and the
complex structure ``J0(x, y) = (-y, x)``, so each pair ``(x_j, y_j)`` is a
symplectic plane.  Every body stores its oracles relative to a working origin
that lies in the interior; ``offset`` maps the working placement back to the
placement the user supplied (``original = working + offset``).

All oracles accept a single vector of shape ``(d,)`` or a batch ``(m, d)``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "Body",
    "Ellipsoid",
    "VPolytope",
    "LagrangianProduct",
    "Scaled",
    "J0",
    "apply_J0",
    "make_ellipsoid",
    "make_vpolytope",
    "make_lagrangian_product",
    "scale",
    "translate",
    "gauge2",
    "subgrad_gauge2",
    "support",
    "conj",
    "subgrad_conj",
    "body_from_spec",
    "square",
    "diamond",
    "bxb1",
]


def J0(dim):
    """Matrix of the standard complex structure on R^dim (block ordering)."""
    n = dim // 2
    J = np.zeros((dim, dim))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return J


def apply_J0(v):
    """``J0 @ v`` along the last axis without forming the matrix."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1] // 2
    return np.concatenate([-v[..., n:], v[..., :n]], axis=-1)


def _batch(v, dim):
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != dim or v.ndim > 2:
        raise ValueError(f"expected vectors of dimension {dim}, got shape {v.shape}")
    return np.atleast_2d(v), v.ndim == 1


def _unbatch(out, single):
    return out[0] if single else out


class _Hull:
    """Polytope in R^d kept in both vertex and facet form.

    Facets are ``a . x <= b`` with unit outward normals ``a``.  With the origin
    in the interior every ``b`` is positive, so ``max_f a_f . x / b_f`` is the
    Minkowski gauge.
    """

    def __init__(self, vertices, normals=None, offsets=None):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 2:
            raise ValueError("need a 2-D array with at least two vertices")
        self.vertices = V
        self.d = V.shape[1]
        if normals is None:
            normals, offsets = _facets(V)
        self.normals = np.asarray(normals, dtype=float)
        self.offsets = np.asarray(offsets, dtype=float)
        self._radius = float(np.max(np.linalg.norm(V, axis=1)))
        self._vertices1 = np.hstack([V, np.ones((len(V), 1))])

    def shifted(self, v):
        v = np.asarray(v, dtype=float)
        return _Hull(self.vertices + v, self.normals, self.offsets + self.normals @ v)

    def scaled(self, lam):
        return _Hull(self.vertices * lam, self.normals, self.offsets * lam)

    @property
    def radius(self):
        return self._radius

    def gauge(self, X):
        return np.max((X @ self.normals.T) / self.offsets, axis=1)

    def gauge_grad(self, X):
        """Gauge value and one subgradient (lowest active facet index)."""
        R = (X @ self.normals.T) / self.offsets
        idx = np.argmax(R, axis=1)
        g = R[np.arange(len(X)), idx]
        G = self.normals[idx] / self.offsets[idx][:, None]
        return g, G

    def gauge_generators(self, x, rtol):
        r = (self.normals @ x) / self.offsets
        g = r.max()
        active = r >= g - rtol * max(abs(g), 1e-300)
        return g, self.normals[active] / self.offsets[active][:, None]

    def generator_table(self, X, rtol):
        """Gauge values, all facet gradients ``a / b`` and the active mask, batched."""
        R = (X @ self.normals.T) / self.offsets
        g = R.max(axis=1)
        active = R >= (g - rtol * np.maximum(np.abs(g), 1e-300))[:, None]
        return g, self.normals / self.offsets[:, None], active

    def support(self, U):
        return np.max(U @ self.vertices.T, axis=1)

    def support_point(self, U):
        S = U @ self.vertices.T
        idx = np.argmax(S, axis=1)
        return S[np.arange(len(U)), idx], self.vertices[idx]

    def support_smooth(self, U, tau):
        """Log-sum-exp support with temperature ``tau * radius * |u|``.

        Scaling the temperature with ``|u|`` keeps the softened support
        positively 1-homogeneous; it overestimates by at most
        ``tau * radius * |u| * log(#vertices)``.
        """
        if tau <= 0:
            return self.support_point(U)
        S = U @ self.vertices.T
        nu = np.sqrt(np.einsum("ij,ij->i", U, U))
        zero = None
        if not nu.all():
            zero = nu == 0
            nu[zero] = 1.0
        tR = tau * self._radius
        s = tR * nu
        mx = S.max(axis=1)
        E = np.exp((S - mx[:, None]) / s[:, None])
        # one product gives the weighted vertex sums and the normaliser
        F = E @ self._vertices1
        tot = F[:, -1]
        pbar = F[:, :-1] / tot[:, None]
        L = mx / s + np.log(tot)  # log-sum-exp of S/s
        h = s * L
        # d/du [s L(u/s)] with s = tau R |u|
        coef = (L - np.einsum("ij,ij->i", pbar, U) / s) * (tR / nu)
        grad = pbar + coef[:, None] * U
        if zero is not None:
            h[zero] = 0.0
            grad[zero] = self.vertices[0]
        return h, grad

    def volume(self):
        if self.d == 1:
            return float(np.ptp(self.vertices))
        return float(ConvexHull(self.vertices).volume)

    def diameter(self):
        V = self.vertices
        D = np.linalg.norm(V[:, None, :] - V[None, :, :], axis=-1)
        return float(D.max())


def _facets(V):
    d = V.shape[1]
    if np.linalg.matrix_rank(V - V[0], tol=1e-10 * max(1.0, np.abs(V).max())) < d:
        raise ValueError(f"vertices do not affinely span R^{d}")
    if d == 1:
        return np.array([[1.0], [-1.0]]), np.array([V.max(), -V.min()])
    try:
        hull = ConvexHull(V)
    except QhullError as exc:  # pragma: no cover - rank check catches most cases
        raise ValueError(f"degenerate vertex set: {exc}") from None
    eq = hull.equations
    normals, offsets = eq[:, :-1], -eq[:, -1]
    # qhull splits non-simplicial facets; merge the copies
    key = np.round(np.hstack([normals, offsets[:, None]]), 9)
    _, first = np.unique(key, axis=0, return_index=True)
    first = np.sort(first)
    return normals[first], offsets[first]


def _chebyshev_center(hull):
    """Center of the largest inscribed Euclidean ball (exact for symmetric sets)."""
    V = hull.vertices
    mean = V.mean(axis=0)
    refl = 2 * mean - V
    if _same_point_set(V, refl):
        return mean
    A, b = hull.normals, hull.offsets
    d = hull.d
    # maximise r subject to a.c + r |a| <= b
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, np.linalg.norm(A, axis=1)[:, None]])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * d + [(0, None)], method="highs")
    if res.status != 0 or res.x[-1] <= 0:
        raise ValueError("polytope has empty interior")
    return res.x[:d]


def _same_point_set(A, B, tol=1e-12):
    if A.shape != B.shape:
        return False
    scale = max(1.0, np.abs(A).max())
    ia = np.lexsort(A.T[::-1])
    ib = np.lexsort(B.T[::-1])
    return bool(np.allclose(A[ia], B[ib], atol=tol * scale, rtol=0))


class Body:
    """Convex body with the origin in its interior.

    Subclasses implement the batched primitives; the public oracle functions
    in this module handle shapes and dimension checks.
    """

    kind = "body"

    def __init__(self, dim, offset=None):
        if dim <= 0 or dim % 2:
            raise ValueError(f"dimension must be even and positive, got {dim}")
        self.dim = int(dim)
        self.offset = np.zeros(dim) if offset is None else np.asarray(offset, dtype=float)

    @property
    def n(self):
        return self.dim // 2

    # batched primitives -------------------------------------------------
    def _gauge2(self, X):
        raise NotImplementedError

    def _subgrad_gauge2(self, X):
        raise NotImplementedError

    def _support(self, U):
        return self._support_point(U)[0]

    def _support_point(self, U):
        raise NotImplementedError

    def _support_smooth(self, U, tau):
        return self._support_point(U)

    def _generators(self, x, rtol):
        """Finite set whose convex hull is the subdifferential of H_K at x."""
        raise NotImplementedError

    def _generator_table(self, X, rtol):
        """Batched generators: array ``(m, F, d)`` and active mask ``(m, F)``."""
        raise NotImplementedError

    def _shifted(self, v):
        raise NotImplementedError

    # conveniences -------------------------------------------------------
    def gauge2(self, x):
        return gauge2(self, x)

    def support(self, u):
        return support(self, u)

    def conj(self, u):
        return conj(self, u)

    def contains(self, x, tol=1e-12):
        return gauge2(self, x) <= 1 + tol

    def boundary_points(self, m, rng=None):
        """Radial projections of Gaussian directions onto the boundary."""
        rng = np.random.default_rng(rng)
        D = rng.standard_normal((m, self.dim))
        return D / np.sqrt(self._gauge2(D))[:, None]

    def volume(self):
        raise NotImplementedError

    def diameter(self):
        raise NotImplementedError

    def to_spec(self):
        raise NotImplementedError

    def __repr__(self):
        return f"<{type(self).__name__} kind={self.kind} dim={self.dim}>"


class Ellipsoid(Body):
    """``{x : (x - c)^T A (x - c) <= 1}`` in working coordinates.

    ``semi_axes`` holds the normal-form parameters ``a_1 <= ... <= a_n`` of
    ``E(a) = {sum_j pi |z_j|^2 / a_j <= 1}`` when the ellipsoid was built in
    that form.
    """

    kind = "ellipsoid"

    def __init__(self, shape, center=None, offset=None, semi_axes=None):
        A = np.asarray(shape, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("shape matrix must be square")
        if not np.allclose(A, A.T, atol=1e-12 * np.abs(A).max()):
            raise ValueError("shape matrix must be symmetric")
        w = np.linalg.eigvalsh(A)
        if w.min() <= 0:
            raise ValueError("shape matrix must be positive definite")
        super().__init__(A.shape[0], offset)
        self.shape = A
        self.center = np.zeros(self.dim) if center is None else np.asarray(center, dtype=float)
        self.shape_inv = np.linalg.inv(A)
        self.semi_axes = None if semi_axes is None else np.sort(np.asarray(semi_axes, float))
        self._a = 1.0 - self.center @ A @ self.center
        if self._a <= 0:
            raise ValueError("origin must lie in the interior of the ellipsoid")

    def _gauge(self, X):
        A, w = self.shape, self.center
        q = np.einsum("ij,jk,ik->i", X, A, X)
        p = X @ (A @ w)
        return (-p + np.sqrt(p * p + self._a * q)) / self._a, p

    def _gauge2(self, X):
        return self._gauge(X)[0] ** 2

    def _subgrad_gauge2(self, X):
        lam, p = self._gauge(X)
        den = self._a * lam + p
        out = np.zeros_like(X)
        nz = den > 0
        out[nz] = (2 * lam[nz] / den[nz])[:, None] * ((X[nz] - lam[nz, None] * self.center) @ self.shape)
        return out

    def _support_point(self, U):
        AU = U @ self.shape_inv
        r = np.sqrt(np.maximum(np.einsum("ij,ij->i", U, AU), 0.0))
        P = np.tile(self.center, (len(U), 1))
        nz = r > 0
        P[nz] += AU[nz] / r[nz, None]
        return r + U @ self.center, P

    def _generators(self, x, rtol):
        return self._subgrad_gauge2(x[None, :])

    def _generator_table(self, X, rtol):
        return self._subgrad_gauge2(X)[:, None, :], np.ones((len(X), 1), dtype=bool)

    def _shifted(self, v):
        return Ellipsoid(self.shape, self.center + v, self.offset, self.semi_axes)

    def volume(self):
        d = self.dim
        unit = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
        return unit / math.sqrt(np.linalg.det(self.shape))

    def diameter(self):
        return 2.0 / math.sqrt(np.linalg.eigvalsh(self.shape).min())

    def to_spec(self):
        if self.semi_axes is not None and not np.any(self.center) and not np.any(self.offset):
            return {"type": "ellipsoid", "a": self.semi_axes.tolist()}
        return {"type": "ellipsoid_matrix", "shape": self.shape.tolist(),
                "center": (self.center + self.offset).tolist()}


class VPolytope(Body):
    kind = "vpolytope"

    def __init__(self, hull, offset=None):
        super().__init__(hull.d, offset)
        self.hull = hull
        if np.any(hull.offsets <= 0):
            raise ValueError("origin must lie in the interior of the polytope")

    @property
    def vertices(self):
        return self.hull.vertices

    def _gauge2(self, X):
        return np.maximum(self.hull.gauge(X), 0.0) ** 2

    def _subgrad_gauge2(self, X):
        g, G = self.hull.gauge_grad(X)
        return 2 * np.maximum(g, 0.0)[:, None] * G

    def _support_point(self, U):
        return self.hull.support_point(U)

    def _support_smooth(self, U, tau):
        return self.hull.support_smooth(U, tau)

    def _generators(self, x, rtol):
        g, G = self.hull.gauge_generators(x, rtol)
        return 2 * max(g, 0.0) * G

    def _generator_table(self, X, rtol):
        g, G, active = self.hull.generator_table(X, rtol)
        return 2 * np.maximum(g, 0.0)[:, None, None] * G[None], active

    def _shifted(self, v):
        return VPolytope(self.hull.shifted(v), self.offset)

    def volume(self):
        return self.hull.volume()

    def diameter(self):
        return self.hull.diameter()

    def to_spec(self):
        return {"type": "vpolytope", "vertices": (self.vertices + self.offset).tolist()}


class LagrangianProduct(Body):
    """``P x Q`` with ``P`` in the x-coordinates and ``Q`` in the y-coordinates."""

    kind = "lagrangian_product"

    def __init__(self, P, Q, offset=None):
        if P.d != Q.d:
            raise ValueError("factors must live in the same R^n")
        super().__init__(2 * P.d, offset)
        if np.any(P.offsets <= 0) or np.any(Q.offsets <= 0):
            raise ValueError("origin must lie in the interior of both factors")
        self.P, self.Q = P, Q

    def _split(self, X):
        n = self.n
        return X[:, :n], X[:, n:]

    def _gauge2(self, X):
        x, y = self._split(X)
        return np.maximum(np.maximum(self.P.gauge(x), self.Q.gauge(y)), 0.0) ** 2

    def _subgrad_gauge2(self, X):
        x, y = self._split(X)
        gp, Gp = self.P.gauge_grad(x)
        gq, Gq = self.Q.gauge_grad(y)
        out = np.zeros_like(X)
        first = gp >= gq
        n = self.n
        out[first, :n] = 2 * np.maximum(gp[first], 0)[:, None] * Gp[first]
        out[~first, n:] = 2 * np.maximum(gq[~first], 0)[:, None] * Gq[~first]
        return out

    def _support_point(self, U):
        u, v = self._split(U)
        hp, pp = self.P.support_point(u)
        hq, pq = self.Q.support_point(v)
        return hp + hq, np.hstack([pp, pq])

    def _support_smooth(self, U, tau):
        u, v = self._split(U)
        hp, gp = self.P.support_smooth(u, tau)
        hq, gq = self.Q.support_smooth(v, tau)
        return hp + hq, np.hstack([gp, gq])

    def _generators(self, x, rtol):
        n = self.n
        gp, Gp = self.P.gauge_generators(x[:n], rtol)
        gq, Gq = self.Q.gauge_generators(x[n:], rtol)
        g = max(gp, gq)
        gens = []
        if gp >= g - rtol * max(abs(g), 1e-300):
            gens.append(np.hstack([2 * max(gp, 0) * Gp, np.zeros((len(Gp), n))]))
        if gq >= g - rtol * max(abs(g), 1e-300):
            gens.append(np.hstack([np.zeros((len(Gq), n)), 2 * max(gq, 0) * Gq]))
        return np.vstack(gens)

    def _generator_table(self, X, rtol):
        x, y = self._split(X)
        n = self.n
        gp, Gp, ap = self.P.generator_table(x, rtol)
        gq, Gq, aq = self.Q.generator_table(y, rtol)
        g = np.maximum(gp, gq)
        lim = g - rtol * np.maximum(np.abs(g), 1e-300)
        m, fp, fq = len(X), len(Gp), len(Gq)
        T = np.zeros((m, fp + fq, 2 * n))
        T[:, :fp, :n] = 2 * np.maximum(gp, 0.0)[:, None, None] * Gp[None]
        T[:, fp:, n:] = 2 * np.maximum(gq, 0.0)[:, None, None] * Gq[None]
        active = np.hstack([ap & (gp >= lim)[:, None], aq & (gq >= lim)[:, None]])
        return T, active

    def _shifted(self, v):
        n = self.n
        return LagrangianProduct(self.P.shifted(v[:n]), self.Q.shifted(v[n:]), self.offset)

    def volume(self):
        return self.P.volume() * self.Q.volume()

    def diameter(self):
        return math.hypot(self.P.diameter(), self.Q.diameter())

    def to_spec(self):
        n = self.n
        return {"type": "lagrangian_product",
                "p_vertices": (self.P.vertices + self.offset[:n]).tolist(),
                "q_vertices": (self.Q.vertices + self.offset[n:]).tolist()}


class Scaled(Body):
    """``lam * K``: support ``lam h_K``, gauge-squared ``H_K / lam^2``."""

    kind = "scaled"

    def __init__(self, inner, lam, offset=None):
        if not lam > 0:
            raise ValueError(f"scale factor must be positive, got {lam}")
        super().__init__(inner.dim, lam * inner.offset if offset is None else offset)
        self.inner = inner
        self.lam = float(lam)

    def _gauge2(self, X):
        return self.inner._gauge2(X) / self.lam**2

    def _subgrad_gauge2(self, X):
        return self.inner._subgrad_gauge2(X) / self.lam**2

    def _support_point(self, U):
        h, p = self.inner._support_point(U)
        return self.lam * h, self.lam * p

    def _support_smooth(self, U, tau):
        h, g = self.inner._support_smooth(U, tau)
        return self.lam * h, self.lam * g

    def _generators(self, x, rtol):
        return self.inner._generators(x, rtol) / self.lam**2

    def _generator_table(self, X, rtol):
        T, active = self.inner._generator_table(X, rtol)
        return T / self.lam**2, active

    def _shifted(self, v):
        return Scaled(self.inner._shifted(np.asarray(v) / self.lam), self.lam, self.offset)

    def volume(self):
        return self.inner.volume() * self.lam**self.dim

    def diameter(self):
        return self.inner.diameter() * self.lam

    def to_spec(self):
        return {"type": "scale", "lambda": self.lam, "body": self.inner.to_spec()}


# ---------------------------------------------------------------------------
# public oracles


def gauge2(body, x):
    """Gauge squared ``H_K(x)``; ``H_K <= 1`` exactly on ``K``."""
    X, single = _batch(x, body.dim)
    return _unbatch(body._gauge2(X), single)


def subgrad_gauge2(body, x):
    """One element of the subdifferential of ``H_K`` at ``x``.

    At nonsmooth points the active facet (or factor) of lowest index is used.
    """
    X, single = _batch(x, body.dim)
    return _unbatch(body._subgrad_gauge2(X), single)


def support(body, u):
    X, single = _batch(u, body.dim)
    return _unbatch(body._support(X), single)


def support_point(body, u):
    """Support value and a maximiser of ``<u, .>`` over the body."""
    X, single = _batch(u, body.dim)
    h, P = body._support_point(X)
    return _unbatch(h, single), _unbatch(P, single)


def conj(body, u):
    """Fenchel conjugate ``H_K^*(u) = h_K(u)^2 / 4``."""
    return support(body, u) ** 2 / 4


def subgrad_conj(body, u):
    """``(h_K(u) / 2) * p`` with ``p`` a support-achieving point."""
    X, single = _batch(u, body.dim)
    h, P = body._support_point(X)
    out = 0.5 * h[:, None] * P
    out[np.all(X == 0, axis=1)] = 0.0
    return _unbatch(out, single)


# ---------------------------------------------------------------------------
# constructors


def make_ellipsoid(a):
    """Normal-form ellipsoid ``E(a_1, ..., a_n)`` centred at the origin."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    if a.ndim != 1 or len(a) == 0 or np.any(a <= 0):
        raise ValueError("semi-axes must be positive")
    d = np.concatenate([np.pi / a, np.pi / a])
    return Ellipsoid(np.diag(d), semi_axes=a)


def make_ellipsoid_matrix(shape, center=None):
    """Ellipsoid ``{(x - c)^T A (x - c) <= 1}`` recentred to the origin."""
    A = np.asarray(shape, dtype=float)
    c = np.zeros(A.shape[0]) if center is None else np.asarray(center, dtype=float)
    return Ellipsoid(A, offset=c)


def make_vpolytope(vertices):
    """Polytope given by its vertices, recentred at its Chebyshev center."""
    V = np.asarray(vertices, dtype=float)
    if V.ndim != 2:
        raise ValueError("vertices must be a 2-D array")
    hull = _Hull(V)
    c = _chebyshev_center(hull)
    return VPolytope(hull.shifted(-c), offset=c)


def make_lagrangian_product(P, Q):
    """Lagrangian product of two polytopes in R^n given by vertex arrays."""
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if Q.ndim == 1:
        Q = Q[:, None]
    hp, hq = _Hull(P), _Hull(Q)
    cp, cq = _chebyshev_center(hp), _chebyshev_center(hq)
    return LagrangianProduct(hp.shifted(-cp), hq.shifted(-cq), offset=np.concatenate([cp, cq]))


def scale(body, lam):
    return Scaled(body, lam)


def translate(body, v):
    """Move the body by ``v`` relative to the working origin.

    The origin must stay in the interior; the result keeps the original
    ``offset`` so reported loops can be mapped back with it.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (body.dim,):
        raise ValueError(f"offset must have shape ({body.dim},)")
    # origin in int(K + v)  <=>  -v in int(K)
    if not body._gauge2(-v[None, :])[0] < 1:
        raise ValueError("translation moves the origin out of the interior")
    out = body._shifted(v)
    out.kind = "translated"
    out.translation = v
    spec = {"type": "translate", "offset": v.tolist(), "body": body.to_spec()}
    out.to_spec = lambda: spec
    return out


def square(r=1.0):
    """Vertices of ``[-r, r]^2`` (the unit ball of the sup-norm for r = 1)."""
    return r * np.array([[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])


def diamond(r=1.0):
    """Vertices of ``{|y_1| + |y_2| <= r}``."""
    return r * np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])


def bxb1():
    """The Lagrangian product ``B_inf x B_1`` in R^4."""
    return make_lagrangian_product(square(), diamond())


def cube_vertices(d, r=1.0):
    grid = np.array(np.meshgrid(*[[-1.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
    return r * grid


# ---------------------------------------------------------------------------
# JSON body specifications


def body_from_spec(spec):
    """Build a body from its JSON description (see README for the schema)."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError("body spec must be an object with a 'type' field")
    kind = spec["type"]
    try:
        if kind == "ellipsoid":
            return make_ellipsoid(spec["a"])
        if kind == "ellipsoid_matrix":
            return make_ellipsoid_matrix(spec["shape"], spec.get("center"))
        if kind == "vpolytope":
            return make_vpolytope(spec["vertices"])
        if kind == "lagrangian_product":
            return make_lagrangian_product(spec["p_vertices"], spec["q_vertices"])
        if kind == "scale":
            return scale(body_from_spec(spec["body"]), float(spec["lambda"]))
        if kind == "translate":
            return translate(body_from_spec(spec["body"]), spec["offset"])
    except KeyError as exc:
        raise ValueError(f"body spec of type {kind!r} is missing field {exc}") from None
    raise ValueError(f"unknown body type {kind!r}")
