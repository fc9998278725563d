"""Explicit systoles used as a regression corpus.

* ``B_inf x B_1``: a square-by-diamond Lagrangian product in R^4 with
  ``c_1 = 4``.  It carries a rectangular systole ``gamma``, zigzag systoles
  ``gamma_n`` converging to it uniformly but not in W^{1,1}, and
  two-parameter families of polygonal systoles (alternating x- and y-legs)
  together with their images under the symmetries of the square.
* the polydisc ``P(1, 1)``: two families of circles, each turning in one
  factor while the other coordinate stays fixed.
* the round ball, whose systoles are the Hopf circles.

All loops are evaluated exactly on uniform grids; piecewise-linear ones come
without derivative samples so that corner handling is exercised.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import dual
from . import geometry as geo
from . import zoll
from .capacities import ellipsoid_sequence, is_generalized_zoll, polydisc_sequence, sys_index
from .loops import TimeLoop, from_time, action

__all__ = [
    "REGRESSION_GRID",
    "bxb1_gamma",
    "bxb1_gamma_n",
    "bxb1_family",
    "bxb1_families",
    "square_symmetries",
    "polydisc_systole",
    "ball_circle",
    "NamedExample",
    "EXAMPLES",
    "manifest",
    "w11_gap",
    "nearest_family",
    "bxb1_gamma_velocity",
    "bxb1_gamma_n_velocity",
    "run_regressions",
    "format_table",
]

REGRESSION_GRID = 10_000


def _polygon(vertices, durations, M):
    """Constant-speed polygonal loop through ``vertices`` sampled at ``j / M``."""
    V = np.asarray(vertices, dtype=float)
    d = np.asarray(durations, dtype=float)
    keep = d > 0
    V = np.vstack([V[:-1][keep], V[-1:]])
    t = np.concatenate([[0.0], np.cumsum(d[keep])])
    t[-1] = 1.0
    tt = np.arange(M) / M
    return TimeLoop(np.column_stack([np.interp(tt, t, V[:, j]) for j in range(V.shape[1])]))


def _pieces(t, breaks, funcs):
    out = np.empty((len(t), 4))
    idx = np.searchsorted(breaks, t, side="right") - 1
    for i, f in enumerate(funcs):
        sel = idx == i
        out[sel] = f(t[sel])
    return out


def bxb1_gamma(M=REGRESSION_GRID):
    """Rectangular systole: x sweeps the horizontal diagonal, then y does."""
    t = np.arange(M) / M
    one, zero = np.ones_like, np.zeros_like
    funcs = [
        lambda s: np.column_stack([-1 + 8 * s, zero(s), -one(s), zero(s)]),
        lambda s: np.column_stack([one(s), zero(s), -1 + 8 * (s - 0.25), zero(s)]),
        lambda s: np.column_stack([1 - 8 * (s - 0.5), zero(s), one(s), zero(s)]),
        lambda s: np.column_stack([-one(s), zero(s), 1 - 8 * (s - 0.75), zero(s)]),
    ]
    return TimeLoop(_pieces(t, [0, 0.25, 0.5, 0.75], funcs))


def bxb1_gamma_n(n, M=REGRESSION_GRID):
    """Zigzag variant of :func:`bxb1_gamma` on ``[0, 1/4]`` with ``2n`` teeth of height ``1/n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    g = bxb1_gamma(M).samples.copy()
    t = np.arange(M) / M
    first = t < 0.25
    # distance in time to the nearest tooth base, mapped to height
    h = 1.0 / (8 * n)
    phase = np.mod(t[first], 2 * h)
    g[first, 1] = 8 * np.where(phase <= h, phase, 2 * h - phase)
    return TimeLoop(g)


def square_symmetries():
    """The eight orthogonal maps of the square, rotations first."""
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    F = np.diag([1.0, -1.0])
    rots = [np.linalg.matrix_power(R, k) for k in range(4)]
    return rots + [r @ F for r in rots]


def bxb1_family(a, b, sym=0, M=REGRESSION_GRID):
    """Polygonal systole with x on the quadrilateral through ``(1, a)`` and y on
    the rectangle with corners ``(+-(1 - b), +-b)``.

    ``a`` in ``[-1, 1]``, ``b`` in ``[0, 1]``; ``sym`` picks one of the eight
    square symmetries applied to x and y simultaneously.
    """
    if not (-1 <= a <= 1 and 0 <= b <= 1):
        raise ValueError("need -1 <= a <= 1 and 0 <= b <= 1")
    c = 1 - b
    xs = [(1, a), (1, a), (-a, -1), (-a, -1), (-1, -a), (-1, -a), (a, 1), (a, 1), (1, a)]
    ys = [(-c, b), (c, b), (c, b), (c, -b), (c, -b), (-c, -b), (-c, -b), (-c, b), (-c, b)]
    dur = np.array([2 * c, 1 + a, 2 * b, 1 - a, 2 * c, 1 + a, 2 * b, 1 - a]) / 8
    O = square_symmetries()[sym]
    V = [np.concatenate([O @ x, O @ y]) for x, y in zip(xs, ys)]
    return _polygon(V, dur, M)


def bxb1_families(a_values=(-0.75, -0.25, 0.25, 0.75), b_values=(0.125, 0.375, 0.625, 0.875),
                  M=REGRESSION_GRID):
    """Family loops over a parameter grid and all square symmetries.

    The default grid is cell-centred, so it avoids the degenerate members
    (``a = +-1`` or ``b`` in ``{0, 1}``) where the eight symmetric copies of
    the family touch each other.
    """
    return [bxb1_family(a, b, s, M) for s in range(8) for a in a_values for b in b_values]


def nearest_family(loop, M=512, refine=5):
    """Closest member of the polygonal families to ``loop``, modulo circle shifts.

    A coarse scan over the parameter square and all eight symmetries is
    refined by Nelder-Mead from the ``refine`` best coarse hits.  Returns
    ``(distance, a, b, sym)``.
    """
    P = zoll._prepared([loop], M)[0]
    grid = [(a, b, s) for s in range(8) for a in np.linspace(-1, 1, 21) for b in np.linspace(0, 1, 11)]
    cands = zoll._prepared([bxb1_family(a, b, s, M) for a, b, s in grid], M)
    d = zoll._aligned(P, cands)

    def dist(p, s):
        a, b = np.clip(p, [-1, 0], [1, 1])
        return float(zoll._aligned(P, bxb1_family(a, b, s, M).samples[None])[0])

    best = (float(d.min()),) + grid[int(np.argmin(d))]
    for k in np.argsort(d)[:refine]:
        a, b, s = grid[k]
        r = minimize(dist, [a, b], args=(s,), method="Nelder-Mead",
                     bounds=[(-1, 1), (0, 1)], options={"xatol": 1e-3, "fatol": 1e-5})
        if r.fun < best[0]:
            best = (float(r.fun), float(r.x[0]), float(r.x[1]), s)
    return best


def polydisc_systole(family, z_fixed, M=REGRESSION_GRID, a=1.0):
    """Circle of ``P(a, a)`` turning in plane ``family`` with the other plane fixed.

    The turning coordinate starts at the real point ``sqrt(a / pi)``.
    """
    if family not in (1, 2):
        raise ValueError("family must be 1 or 2")
    z_fixed = complex(z_fixed)
    if np.pi * abs(z_fixed) ** 2 > a * (1 + 1e-12):
        raise ValueError("fixed coordinate lies outside the disc")
    t = np.arange(M) / M
    r = np.sqrt(a / np.pi)
    w = r * np.exp(2j * np.pi * t)
    dw = 2j * np.pi * w
    fixed = np.full(M, z_fixed)
    z1, z2 = (w, fixed) if family == 1 else (fixed, w)
    d1, d2 = (dw, 0 * dw) if family == 1 else (0 * dw, dw)
    s = np.column_stack([z1.real, z2.real, z1.imag, z2.imag])
    d = np.column_stack([d1.real, d2.real, d1.imag, d2.imag])
    return TimeLoop(s, d)


def ball_circle(direction=(1.0, 0.0), M=REGRESSION_GRID):
    """Hopf circle of the ball ``B(1)`` in R^4 through ``direction`` (complex line)."""
    v = np.asarray(direction, dtype=complex)
    v = v / np.linalg.norm(v) / np.sqrt(np.pi)
    t = np.arange(M) / M
    z = np.exp(2j * np.pi * t)[:, None] * v[None, :]
    dz = 2j * np.pi * z
    return TimeLoop(np.hstack([z.real, z.imag]), np.hstack([dz.real, dz.imag]))


def bxb1_gamma_velocity(t):
    """Right derivative of :func:`bxb1_gamma` at the times ``t``."""
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    table = np.array([[8.0, 0, 0, 0], [0, 0, 8.0, 0], [-8.0, 0, 0, 0], [0, 0, -8.0, 0]])
    return table[np.minimum((4 * t).astype(int), 3)]


def bxb1_gamma_n_velocity(n, t):
    """Right derivative of :func:`bxb1_gamma_n` at the times ``t``."""
    t = np.mod(np.asarray(t, dtype=float), 1.0)
    v = bxb1_gamma_velocity(t)
    first = t < 0.25
    rising = np.mod(t[first], 2.0 / (8 * n)) < 1.0 / (8 * n)
    v[first, 1] = np.where(rising, 8.0, -8.0)
    return v


def w11_gap(n, M=REGRESSION_GRID, upto=0.25):
    """``int_0^upto |gamma' - gamma_n'| dt`` by the midpoint rule on ``M`` cells.

    The integrand is piecewise constant, so only cells holding a breakpoint
    can contribute an error.
    """
    cells = int(round(upto * M))
    t = (np.arange(cells) + 0.5) / M
    d = np.linalg.norm(bxb1_gamma_velocity(t) - bxb1_gamma_n_velocity(n, t), axis=1)
    return float(np.mean(d) * upto)


# ---------------------------------------------------------------------------
# corpus


@dataclass
class NamedExample:
    name: str
    body_spec: dict | None
    loops: object
    expected_action: float
    flags: dict = field(default_factory=dict)

    def body(self):
        return None if self.body_spec is None else geo.body_from_spec(self.body_spec)

    def to_json(self):
        return {"name": self.name, "body": self.body_spec,
                "expected_action": self.expected_action, "flags": self.flags}


_BXB1 = {"type": "lagrangian_product", "p_vertices": geo.square().tolist(),
         "q_vertices": geo.diamond().tolist()}

_ROOT = 1 / np.sqrt(np.pi)

EXAMPLES = [
    NamedExample("ball", {"type": "ellipsoid", "a": [1.0, 1.0]},
                 lambda M: [ball_circle((1, 0), M), ball_circle((1, 1j), M), ball_circle((0.6, 0.8), M)],
                 1.0, {"zoll": True, "index": 2}),
    NamedExample("bxb1-gamma", _BXB1, lambda M: [bxb1_gamma(M)], 4.0, {}),
    NamedExample("bxb1-gamma-n", _BXB1, lambda M: [bxb1_gamma_n(n, M) for n in (2, 4, 8)], 4.0,
                 {"sup_rate": True, "w11_gap": 2.0}),
    NamedExample("bxb1-families", _BXB1, lambda M: [bxb1_gamma(M), bxb1_gamma_n(1, M)] + bxb1_families(M=M), 4.0,
                 {"zoll": True, "uniqueness": False, "coverage": 1.0, "min_clusters": 3}),
    NamedExample("bxb1-degenerate", _BXB1,
                 lambda M: [bxb1_family(-1.0, 0.0, 0, M), bxb1_family(1 / 3, 0.0, 0, M),
                            bxb1_family(1 / 3, 1.0, 5, M), bxb1_family(1.0, 1 / 3, 2, M)],
                 4.0, {}),
    NamedExample("polydisc", None,
                 lambda M: [polydisc_systole(1, _ROOT, M), polydisc_systole(2, _ROOT, M),
                            polydisc_systole(1, 0.3 * _ROOT * 1j, M),
                            polydisc_systole(2, -0.5 * _ROOT, M)],
                 1.0, {"zoll": False, "index": 1, "uniqueness": False}),
]


def manifest():
    """JSON-ready listing of the corpus."""
    return {"grid": REGRESSION_GRID, "examples": [e.to_json() for e in EXAMPLES]}


def write_manifest(path):
    with open(path, "w") as fh:
        json.dump(manifest(), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# regression run


def _row(example, check, value, bound, ok):
    return {"example": example, "check": check, "value": float(value), "bound": bound, "pass": bool(ok)}


def _certify(rows, name, body, loops, T, corner_window):
    for i, lp in enumerate(loops):
        res, info = dual.inclusion_residual(body, lp, T, corner_window=corner_window, return_info=True)
        rows.append(_row(name, f"inclusion[{i}]", res, "<= 1e-9", res <= 1e-9))
        act = lp.action()
        rows.append(_row(name, f"action[{i}]", act, f"{T} +- 1e-6", abs(act - T) <= 1e-6 * T))


def run_regressions(modes=24, starts=4, seed=0, corner_window=2, grid=REGRESSION_GRID, solver=True):
    """Check every corpus example; returns a list of result rows.

    With ``solver`` the numeric first capacity of the ball and of
    ``B_inf x B_1`` is also compared with its known value.
    """
    rows = []
    M = grid
    for ex in EXAMPLES:
        loops = ex.loops(M)
        body = ex.body()
        T = ex.expected_action
        if body is not None:
            _certify(rows, ex.name, body, loops, T, corner_window)
        if ex.name == "ball":
            seq = ellipsoid_sequence([1, 1], 4)
            rows.append(_row(ex.name, "index", sys_index(seq), "== 2", sys_index(seq) == 2))
            rows.append(_row(ex.name, "generalized_zoll", is_generalized_zoll(seq, 2), "true",
                             is_generalized_zoll(seq, 2)))
        if ex.name == "bxb1-gamma-n":
            g = bxb1_gamma(M)
            for n, lp in zip((2, 4, 8), loops):
                sup = float(np.abs(g.samples - lp.samples).max())
                rows.append(_row(ex.name, f"sup[n={n}]", sup, f"<= 1/{n}", sup <= 1 / n + 1e-12))
                gap = w11_gap(n, M)
                rows.append(_row(ex.name, f"w11[n={n}]", gap, ">= 2", gap >= 2))
        if ex.name == "bxb1-families":
            res = [zoll.result_from_loop(body, lp, T) for lp in loops]
            rep = zoll.report(res, body)
            n = len(rep["clusters"])
            rows.append(_row(ex.name, "clusters", n, ">= 3", n >= 3))
            rows.append(_row(ex.name, "coverage", rep["coverage"], "== 1", rep["coverage"] == 1.0))
            rows.append(_row(ex.name, "uniqueness", rep["uniqueness"], "false", not rep["uniqueness"]))
        if ex.name == "polydisc":
            for i, lp in enumerate(loops):
                a = action(from_time(lp, 64))
                rows.append(_row(ex.name, f"action[{i}]", a, "1 +- 1e-6", abs(a - 1) <= 1e-6))
                r = np.sqrt(np.pi) * np.abs(lp.samples[:, [0, 1]] + 1j * lp.samples[:, [2, 3]])
                on = float(np.abs(r.max(axis=1) - 1).max())
                rows.append(_row(ex.name, f"boundary[{i}]", on, "<= 1e-12", on <= 1e-12))
            res = [zoll.result_from_loop(None, lp, 1.0) for lp in loops]
            diam = 2 * np.sqrt(2 / np.pi)
            uq = zoll.uniqueness_probe(res, 0.05 * diam, 0.2 * diam)
            rows.append(_row(ex.name, "uniqueness", uq, "false", not uq))
            seq = polydisc_sequence(1, 2, 4)
            rows.append(_row(ex.name, "index", sys_index(seq), "== 1", sys_index(seq) == 1))
            rows.append(_row(ex.name, "generalized_zoll", is_generalized_zoll(seq, 2), "false",
                             not is_generalized_zoll(seq, 2)))
    if solver:
        cfg = dual.SolveConfig(modes=modes, starts=starts, seed=seed)
        for name, body, target, rel in (("ball", geo.make_ellipsoid([1, 1]), 1.0, 0.01),
                                        ("bxb1", geo.bxb1(), 4.0, 0.02)):
            c1 = dual.minimize(body, cfg)[0].value
            rows.append(_row(name, f"c1_numeric[N={modes}]", c1, f"{target} +- {rel:.0%}",
                             abs(c1 - target) <= rel * target))
    return rows


def format_table(rows):
    """Plain-text pass/fail table."""
    w1 = max(len(r["example"]) for r in rows)
    w2 = max(len(r["check"]) for r in rows)
    lines = [f"{'example':<{w1}}  {'check':<{w2}}  {'value':>22}  {'bound':<14}  result"]
    for r in rows:
        lines.append(f"{r['example']:<{w1}}  {r['check']:<{w2}}  {r['value']:>22.15g}  "
                     f"{r['bound']:<14}  {'PASS' if r['pass'] else 'FAIL'}")
    return "\n".join(lines)
