"""Gutt-Hutchings capacity sequences, the systolic index and Zoll flags.

Closed forms exist for ellipsoids ``E(a_1, ..., a_n)`` (the sorted multiples
``j * a_i``, merged with repetition) and for polydiscs ``P(a, ..., a)``
(``c_i = i * a``).  The first capacity of any other body comes from the dual
solver.  The systolic index is the length of the plateau ``c_i = c_1``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import geometry as geo

__all__ = [
    "CapacitySequence",
    "ellipsoid_sequence",
    "polydisc_sequence",
    "c1_numeric",
    "numeric_sequence",
    "sys_index",
    "is_generalized_zoll",
    "index_bound",
    "systolic_ratio",
    "symplectic_semi_axes",
    "INDEX_FLAVORS",
]

CLOSED_FORM_RTOL = 1e-6

INDEX_FLAVORS = ("general", "centrally_symmetric", "s1_invariant", "uniqueness_of_systoles")


@dataclass(frozen=True)
class CapacitySequence:
    """``c_1 .. c_m`` with a per-entry ``closed_form`` / ``numeric`` tag."""

    values: tuple
    provenance: tuple
    rel_tol: float = CLOSED_FORM_RTOL

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        prov = tuple(self.provenance)
        if not vals:
            raise ValueError("a capacity sequence needs at least one entry")
        if len(prov) != len(vals):
            raise ValueError("provenance must have one tag per value")
        bad = set(prov) - {"closed_form", "numeric"}
        if bad:
            raise ValueError(f"unknown provenance tags {sorted(bad)}")
        if not vals[0] > 0:
            raise ValueError("c_1 must be positive")
        for a, b in zip(vals, vals[1:]):
            if b < a * (1 - self.rel_tol):
                raise ValueError("capacity sequence must be nondecreasing")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "provenance", prov)

    def __len__(self):
        return len(self.values)

    @property
    def c1(self):
        return self.values[0]

    def scaled(self, s):
        return CapacitySequence(tuple(s * v for v in self.values), self.provenance, self.rel_tol)

    def to_json(self):
        idx, lower = sys_index(self, with_flag=True)
        return {
            "values": list(self.values),
            "provenance": list(self.provenance),
            "rel_tol": self.rel_tol,
            "index": idx,
            "index_is_lower_bound": lower,
        }


def _exact(a):
    # floats convert exactly, strings like "1/3" parse as rationals
    return Fraction(a)


def _check_positive(a):
    for v in a:
        if not v > 0:
            raise ValueError(f"parameters must be positive, got {v}")


def _merged_multiples(a, m):
    """First ``m`` entries of the sorted union of the streams ``j * a_i``."""
    heap = [(ai, i, 1) for i, ai in enumerate(a)]
    heapq.heapify(heap)
    out = []
    while len(out) < m:
        v, i, j = heapq.heappop(heap)
        out.append(v)
        heapq.heappush(heap, ((j + 1) * a[i], i, j + 1))
    return out


def ellipsoid_sequence(a, m):
    """Capacities of ``E(a_1, ..., a_n)``: merged multiples, exact on rationals."""
    a = [_exact(v) for v in a]
    if not a:
        raise ValueError("need at least one semi-axis parameter")
    _check_positive(a)
    if m < 1:
        raise ValueError("m must be at least 1")
    vals = _merged_multiples(a, m)
    return CapacitySequence(tuple(float(v) for v in vals), ("closed_form",) * m)


def polydisc_sequence(a, n, m):
    """Capacities of ``P(a, ..., a)`` with ``n`` factors: ``c_i = i * a``."""
    a = _exact(a)
    _check_positive([a])
    if n < 1 or m < 1:
        raise ValueError("n and m must be at least 1")
    return CapacitySequence(tuple(float(i * a) for i in range(1, m + 1)), ("closed_form",) * m)


def c1_numeric(body, cfg=None):
    """Best dual value over the multistart runs."""
    from .dual import SolveConfig, minimize

    cfg = SolveConfig() if cfg is None else cfg
    return minimize(body, cfg)[0].value


def numeric_sequence(c1, cfg=None):
    """One-entry sequence holding a numeric ``c_1``."""
    from .dual import SolveConfig

    cfg = SolveConfig() if cfg is None else cfg
    return CapacitySequence((c1,), ("numeric",), 2 * cfg.tol)


def sys_index(seq, with_flag=False):
    """Length of the plateau ``c_i <= c_1 (1 + rel_tol)``.

    With ``with_flag`` also returns whether the plateau runs to the last
    computed entry, in which case the index is only a lower bound.
    """
    lim = seq.c1 * (1 + seq.rel_tol)
    idx = 0
    for v in seq.values:
        if v > lim:
            break
        idx += 1
    lower = idx == len(seq)
    return (idx, lower) if with_flag else idx


def is_generalized_zoll(seq, n):
    """``c_n = c_1`` within the sequence tolerance."""
    if len(seq) < n:
        raise ValueError(f"need at least {n} capacities, have {len(seq)}")
    return seq.values[n - 1] <= seq.c1 * (1 + seq.rel_tol)


def index_bound(n, flavor="general"):
    """Upper bound on the systolic index in ``R^{2n}`` for a class of bodies."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if flavor == "general":
        return 4 * n**3
    if flavor == "centrally_symmetric":
        return 2 * n**2
    if flavor in ("s1_invariant", "uniqueness_of_systoles"):
        return n
    raise ValueError(f"unknown flavor {flavor!r}; expected one of {INDEX_FLAVORS}")


def systolic_ratio(c1, volume, n):
    """``c_1^n / (n! vol)``; equal to 1 for balls."""
    if not volume > 0:
        raise ValueError("volume must be positive")
    return c1**n / (math.factorial(n) * volume)


def symplectic_semi_axes(shape):
    """Normal-form parameters ``a_i`` of ``{x : x^T A x <= 1}``, sorted.

    The symplectic eigenvalues ``mu_i`` of ``A`` are the moduli of the
    eigenvalues of ``J0 A``; the ellipsoid is symplectomorphic to ``E(a)``
    with ``a_i = pi / mu_i``.
    """
    A = np.asarray(shape, dtype=float)
    d = A.shape[0]
    if A.shape != (d, d) or d % 2:
        raise ValueError("shape must be a square matrix of even size")
    w, V = np.linalg.eigh(A)
    if w.min() <= 0:
        raise ValueError("shape matrix must be positive definite")
    R = (V * np.sqrt(w)) @ V.T
    S = R @ geo.J0(d) @ R
    mu = np.linalg.eigvalsh(1j * S)
    mu = np.sort(mu[mu > 0])[::-1]
    return np.sort(np.pi / mu)
