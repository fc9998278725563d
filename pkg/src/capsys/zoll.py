"""Heuristic exploration of the systole space.

Multistart minimisers (and any loops injected by hand) are compared modulo
reparametrisation by a circle shift, grouped by single linkage, and probed
for boundary coverage and for distinct systoles through a common point.
None of this computes an index; it is numerical evidence only.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial import cKDTree

from . import dual
from . import geometry as geo
from .loops import FourierLoop

__all__ = [
    "gauge_fix",
    "SystoleCluster",
    "loop_distance",
    "distance_matrix",
    "cluster",
    "ev0_coverage",
    "uniqueness_probe",
    "result_from_loop",
    "select_systoles",
    "default_tolerances",
    "report",
]

COMPARE_GRID = 256
COARSE_PHASES = 64


def gauge_fix(x, rtol=1e-8):
    """Canonical representative of the orbit of ``x`` under circle shifts.

    The shift makes the first coordinate of the first mode ``xhat(1)`` as
    large as possible.  When that entry vanishes the next plane decides, and
    when the whole first mode vanishes the lowest nonvanishing mode is used
    instead (its ``k`` equivalent shifts are resolved by taking the smallest
    nonnegative one).
    """
    c = x.c
    ks = x.ks
    scale = np.abs(c).max()
    if scale == 0:
        return x
    for k in range(1, x.modes + 1):
        row = c[np.searchsorted(ks, k)]
        big = np.flatnonzero(np.abs(row) > rtol * scale)
        if len(big):
            z = row[big[0]]
            theta = (np.angle(z) / (2 * np.pi * k)) % (1.0 / k)
            rot = np.exp(-2j * np.pi * ks * theta)
            return FourierLoop.from_complex(c * rot[:, None])
    return x


@dataclass
class SystoleCluster:
    representative: dual.SystoleResult
    members: int
    spread: float
    indices: tuple = ()

    @property
    def action(self):
        return self.representative.T


def _resample(loop, M):
    """Periodic linear interpolation of the samples onto ``M`` points."""
    s = loop.samples
    if loop.M == M:
        return s
    t = np.arange(loop.M + 1) / loop.M
    ext = np.vstack([s, s[:1]])
    tt = np.arange(M) / M
    return np.column_stack([np.interp(tt, t, ext[:, j]) for j in range(s.shape[1])])


def _prepared(loops, M=COMPARE_GRID):
    return np.stack([_resample(lp, M) for lp in loops])


def _sup(diff, coord_axis):
    """Largest Euclidean norm over time; the other axes are batch axes."""
    return np.sqrt((diff * diff).sum(axis=coord_axis).max(axis=-1))


def _aligned(A, B):
    """``min_m sup_t |A(t) - B(t - m)|`` for each loop ``B`` of a stack."""
    M = A.shape[0]
    step = M // COARSE_PHASES
    sub = slice(None, None, step)
    a = A[sub]
    b = B[:, sub]
    # coarse phases on the subsampled loops
    coarse = np.stack([_sup(a[None] - np.roll(b, m, axis=1), 2)
                       for m in range(COARSE_PHASES)], axis=1)
    best = np.argmin(coarse, axis=1) * step
    # local search over every grid shift between the neighbouring coarse phases
    # roll(B, m)[t] = B[t - m] is the window of the doubled loop starting at M - m
    win = sliding_window_view(np.concatenate([B, B], axis=1), M, axis=1)
    rows = np.arange(len(B))
    out = np.full(len(B), np.inf)
    for k in range(-step, step + 1):
        start = (M - best - k) % M
        out = np.minimum(out, _sup(win[rows, start] - A.T, 1))
    return out


def loop_distance(g1, g2):
    """Uniform distance between two loops after the best circle shift."""
    P = _prepared([g1, g2])
    return float(_aligned(P[0], P[1:])[0])


def distance_matrix(loops):
    P = _prepared(loops)
    m = len(P)
    D = np.zeros((m, m))
    for i in range(m - 1):
        D[i, i + 1:] = _aligned(P[i], P[i + 1:])
        D[i + 1:, i] = D[i, i + 1:]
    return D


def cluster(results, tol, distances=None):
    """Single-linkage groups of results at loop distance ``tol``.

    Each group is represented by its lowest-action member; ``spread`` is the
    largest distance from the representative to another member.  Groups are
    ordered by action, then by size (larger first).  ``distances`` may hold a
    precomputed :func:`distance_matrix` of the results in input order.
    """
    if not results:
        return []
    order = sorted(range(len(results)), key=lambda i: (results[i].T, i))
    if distances is None:
        D = distance_matrix([results[i].loop for i in order])
    else:
        D = np.asarray(distances)[np.ix_(order, order)]
    m = len(order)
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in np.flatnonzero(D[i, i + 1:] <= tol) + i + 1:
            ri, rj = find(i), find(int(j))
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    out = []
    for root, mem in groups.items():
        rep = min(mem)
        out.append(SystoleCluster(results[order[rep]], len(mem), float(D[rep, mem].max()),
                                  tuple(order[i] for i in mem)))
    return sorted(out, key=lambda c: (c.action, -c.members, c.indices))


def ev0_coverage(results, body, eps, boundary_samples=2000, seed=0):
    """Fraction of sampled boundary points within ``eps`` of some loop trace.

    Boundary points are Gaussian directions pushed radially onto the
    boundary, so the sampling is not uniform in surface measure.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if not results:
        warnings.warn("no results to measure coverage with", RuntimeWarning, stacklevel=2)
        return 0.0
    traces = np.vstack([r.loop.samples for r in results])
    pts = body.boundary_points(boundary_samples, np.random.default_rng(seed))
    dist, _ = cKDTree(traces).query(pts)
    return float(np.mean(dist <= eps))


def uniqueness_probe(results, point_tol, loop_tol, distances=None):
    """False when two loops meet at a point yet stay ``loop_tol`` apart.

    Every pair of results farther apart than ``loop_tol`` (after the best
    circle shift) is tested for trace points within ``point_tol`` of each
    other.  Pairs are compared directly rather than through clusters, so a
    chain of intermediate loops cannot hide two distinct systoles.  Traces
    are compared on the ``COMPARE_GRID`` resampling.
    """
    if len(results) < 2:
        raise ValueError("need at least two results")
    loops = [r.loop for r in results]
    D = distance_matrix(loops) if distances is None else np.asarray(distances)
    P = _prepared(loops)
    trees = {}
    for i, j in np.argwhere(np.triu(D > loop_tol, 1)):
        if i not in trees:
            trees[i] = cKDTree(P[i])
        dist, _ = trees[i].query(P[j], distance_upper_bound=point_tol)
        if np.isfinite(dist).any():
            return False
    return True


def result_from_loop(body, loop, T=None, rtol=1e-9):
    """Wrap an analytic loop so that it can join solver results.

    Without a body (for instance a polydisc) the residuals are left as NaN.
    """
    T = loop.action() if T is None else T
    if body is None:
        ires = bres = float("nan")
    else:
        ires = dual.inclusion_residual(body, loop, T, rtol=rtol)
        bres = float(np.max(np.abs(geo.gauge2(body, loop.samples) - 1.0)))
    return dual.SystoleResult(loop, T, np.zeros(loop.dim), ires, bres, None, T,
                              extras={"injected": True})


def select_systoles(results, rel_tol=1e-2):
    """Results whose action is within ``rel_tol`` of the smallest one."""
    if not results:
        return []
    best = min(r.T for r in results)
    return [r for r in results if r.T <= best * (1 + rel_tol)]


def default_tolerances(body):
    d = body.diameter()
    return {"cluster_tol": 0.1 * d, "eps": 0.1 * d, "point_tol": 0.05 * d, "loop_tol": 0.2 * d}


def report(results, body, tol=None, boundary_samples=2000, seed=0):
    """Clusters, coverage and the uniqueness flag for a set of systoles."""
    tols = default_tolerances(body)
    if tol:
        tols.update(tol)
    D = distance_matrix([r.loop for r in results]) if results else None
    return {
        "clusters": cluster(results, tols["cluster_tol"], D),
        "coverage": ev0_coverage(results, body, tols["eps"], boundary_samples, seed),
        "uniqueness": uniqueness_probe(results, tols["point_tol"], tols["loop_tol"], D)
        if len(results) > 1 else True,
        "tolerances": tols,
    }
