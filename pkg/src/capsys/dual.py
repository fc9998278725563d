"""Clarke dual minimisation over truncated loop spaces.

The dual functional of a body ``K`` is ``Psi(x) = int H_K^*(-J0 x'(t)) dt`` on
zero-mean loops with action 1.  Minimisers give the systoles of ``dK`` through
``gamma = (Psi x + beta) / sqrt(Psi)``, and the minimum value is the first
Gutt-Hutchings capacity ``c_1(K)``.

The solver works with the 0-homogeneous quotient ``H(x) / A(x)`` in the
coordinates ``z_k = 2 pi |k| c_k`` (the H^1_0 metric becomes Euclidean), runs a
limited-memory quasi-Newton descent with Armijo backtracking on a log-sum-exp
softened support function while annealing the temperature, renormalises onto
``A = 1`` after every step, and finishes with diminishing-step subgradient
descent on the exact functional.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from . import geometry as geo
from .loops import FourierLoop, TimeLoop, analyze, mode_indices, synth

log = logging.getLogger(__name__)

__all__ = [
    "SolveConfig",
    "RunResult",
    "SystoleResult",
    "psi",
    "subgrad_psi",
    "minimize",
    "recover_beta",
    "reconstruct",
    "inclusion_residual",
    "solve",
    "corner_mask",
    "inclusion_profile",
]


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings; ``grid=None`` means ``8 * modes``."""

    modes: int = 24
    grid: int | None = None
    starts: int = 8
    seed: int = 0
    tau0: float = 3e-2
    decay: float = 0.25
    tau_min: float = 1e-4
    max_iter: int = 50_000
    tol: float = 1e-9
    polish_iter: int = 300
    threads: int = 1

    def __post_init__(self):
        if self.grid is None:
            object.__setattr__(self, "grid", 8 * self.modes)
        for name in ("modes", "grid", "starts", "max_iter", "tau0", "tau_min", "tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.decay < 1:
            raise ValueError("decay must lie in (0, 1)")
        if not self.tol <= 1e-3:
            raise ValueError("tol must not exceed 1e-3")
        if self.grid < 4 * self.modes:
            raise ValueError(f"grid M={self.grid} must be at least 4N={4 * self.modes}")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")

    def schedule(self):
        """Temperatures from ``tau0`` down to ``tau_min``."""
        taus = []
        t = self.tau0
        while t > self.tau_min:
            taus.append(t)
            t *= self.decay
        taus.append(self.tau_min)
        return taus


@dataclass
class RunResult:
    loop: FourierLoop
    value: float
    converged: bool
    iterations: int
    run: int


@dataclass
class SystoleResult:
    """A reconstructed closed characteristic with its certificates."""

    loop: TimeLoop
    T: float
    beta: np.ndarray
    inclusion_residual: float
    boundary_residual: float
    minimizer: FourierLoop
    value: float = float("nan")
    converged: bool = True
    extras: dict = field(default_factory=dict)

    def to_json(self, loop_csv=None):
        return {
            "T": self.T,
            "beta": np.asarray(self.beta).tolist(),
            "inclusion_residual": self.inclusion_residual,
            "boundary_residual": self.boundary_residual,
            "loop_csv": loop_csv,
        }


# ---------------------------------------------------------------------------
# objective on complex coefficient arrays


class _Objective:
    """Dual functional and its gradient for one body on a fixed grid."""

    def __init__(self, body, N, M):
        self.body = body
        self.N, self.M = N, M
        self.n = body.dim // 2
        self.ks = mode_indices(N)
        self.kf = self.ks[:, None].astype(float)
        self.w = 2 * np.pi * np.abs(self.kf)  # z = w * c

    def velocity(self, c):
        """Samples of ``-J0 x'`` (complex per plane): ``sum_k 2 pi k c_k e^{..}``."""
        return synth(2 * np.pi * self.kf * c, self.ks, self.M)

    def hamiltonian(self, c, tau, grad=False):
        W = self.velocity(c)
        U = np.hstack([W.real, W.imag])
        h, dh = self.body._support_smooth(U, tau)
        val = float(np.mean(h * h)) / 4
        if not grad:
            return val
        g = 0.5 * h[:, None] * dh
        n = self.n
        G = g[:, :n] + 1j * g[:, n:]
        return val, 2 * np.pi * self.kf * analyze(G, self.ks)

    def action(self, c):
        return float(np.pi * np.sum(self.kf * np.abs(c) ** 2))

    def quotient(self, c, tau):
        """``H / A`` and its gradient, both in the ``z`` coordinates."""
        a = self.action(c)
        if not a > 0:
            return np.inf, None
        hval, hg = self.hamiltonian(c, tau, grad=True)
        q = hval / a
        g = (hg - q * 2 * np.pi * self.kf * c) / a
        return q, g / self.w


def _normalize(c, obj):
    return c / np.sqrt(obj.action(c))


def psi(body, x, M=None, tau=0.0):
    """Trapezoidal value of ``int H^*(-J0 x')`` on ``M`` samples.

    ``tau > 0`` replaces the polytope vertex maximum by its log-sum-exp
    softening, which bounds the exact value from above.
    """
    M = 8 * x.modes if M is None else M
    if M < 4 * x.modes:
        raise ValueError(f"grid M={M} is too small for N={x.modes}")
    return _Objective(body, x.modes, M).hamiltonian(x.c, tau)


def subgrad_psi(body, x, M=None, tau=0.0):
    """H^1_0 gradient representative of ``psi`` at ``x``.

    The returned loop ``g`` satisfies ``d psi(x)[v] = <g, v>_{H^1_0}`` for the
    smoothed functional; at ``tau = 0`` it is assembled from the selected
    subgradients of the conjugate.
    """
    M = 8 * x.modes if M is None else M
    if M < 4 * x.modes:
        raise ValueError(f"grid M={M} is too small for N={x.modes}")
    obj = _Objective(body, x.modes, M)
    _, g = obj.hamiltonian(x.c, tau, grad=True)
    return FourierLoop.from_complex(g / obj.w**2)


# ---------------------------------------------------------------------------
# minimisation


def _initial(rng, obj):
    N, n = obj.N, obj.n
    std = 1.0 / obj.w
    c = (rng.standard_normal((2 * N, n)) + 1j * rng.standard_normal((2 * N, n))) * std / np.sqrt(2)
    c[obj.ks == 1] *= 4
    if obj.action(c) <= 0:
        # reverse time: c_k <-> c_{-k}
        c = c[::-1].copy()
    return _normalize(c, obj)


class _Problem:
    """The quotient ``H/A`` as a function of real vectors ``z`` (H^1_0 coordinates)."""

    def __init__(self, obj, tau):
        self.obj, self.tau = obj, tau
        self.shape = (2 * obj.N, obj.n)

    def to_c(self, z):
        return z.view(complex).reshape(self.shape) / self.obj.w

    def to_z(self, c):
        return np.ascontiguousarray(c * self.obj.w).view(float).ravel()

    def action(self, z):
        zc = z.view(complex).reshape(self.shape)
        return float(np.sum(np.abs(zc) ** 2 / (4 * np.pi * self.obj.kf)))

    def __call__(self, z):
        q, g = self.obj.quotient(self.to_c(z), self.tau)
        if g is None:
            return q, None
        return q, np.ascontiguousarray(g).view(float).ravel()


def _lbfgs_stage(obj, c, tau, max_iter, tol, memory=5):
    """Quasi-Newton descent on ``H/A`` at a fixed temperature.

    Every accepted iterate is rescaled onto ``A = 1``.  Stops once the value
    changes by less than ``tol`` (relative) over 20 iterations.  Returns
    ``(c, value, iterations, failed_line_search)``.
    """
    prob = _Problem(obj, tau)
    z = prob.to_z(c)
    q, g = prob(z)
    S, Y, R = [], [], []
    hist = [q]
    it = 0
    for it in range(1, max_iter + 1):
        d = -g
        alphas = []
        for s, y, rho in zip(reversed(S), reversed(Y), reversed(R)):
            a_ = rho * (s @ d)
            alphas.append(a_)
            d = d - a_ * y
        if S:
            d = d * ((S[-1] @ Y[-1]) / (Y[-1] @ Y[-1]))
        for s, y, rho, a_ in zip(S, Y, R, reversed(alphas)):
            d = d + (a_ - rho * (y @ d)) * s
        slope = g @ d
        if not slope < 0:
            S.clear(), Y.clear(), R.clear()
            d = -g
            slope = -(g @ g)
        if slope == 0:
            break
        step = 1.0 if S else min(1.0, 0.1 * np.sqrt((z @ z) / (d @ d)))
        for _ in range(60):
            zn = z + step * d
            qn, gn = prob(zn)
            if qn <= q + 1e-4 * step * slope:
                break
            step *= 0.5
        else:
            return prob.to_c(z), q, it, True
        scale = np.sqrt(prob.action(zn))
        zn = zn / scale
        gn = gn * scale  # gradient of a 0-homogeneous map scales like 1/|z|
        s, y = zn - z, gn - g
        sy = s @ y
        if sy > 1e-12 * np.sqrt((s @ s) * (y @ y)):
            S.append(s), Y.append(y), R.append(1.0 / sy)
            if len(S) > memory:
                S.pop(0), Y.pop(0), R.pop(0)
        z, q, g = zn, qn, gn
        hist.append(q)
        if len(hist) > 20 and abs(hist[-21] - q) <= tol * abs(q):
            break
    return prob.to_c(z), q, it, False


def _polish(obj, c, iters):
    """Diminishing-step subgradient descent on the exact quotient; keeps the best point."""
    prob = _Problem(obj, 0.0)
    z = prob.to_z(c)
    q, g = prob(z)
    best_z, best_q = z, q
    z0 = np.sqrt(z @ z)
    for j in range(iters):
        gn = np.sqrt(g @ g)
        if gn == 0:
            break
        zn = z - (1e-3 * z0 / (gn * np.sqrt(j + 1))) * g
        a = prob.action(zn)
        if a <= 0:
            break
        z = zn / np.sqrt(a)
        q, g = prob(z)
        if q < best_q:
            best_z, best_q = z, q
    return prob.to_c(best_z), best_q


def _single_run(body, cfg, run, phase=0.0):
    obj = _Objective(body, cfg.modes, cfg.grid)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, run]))
    c = _initial(rng, obj)
    if phase:
        c = c * np.exp(-2j * np.pi * obj.ks * phase)[:, None]
    budget = cfg.max_iter
    total = 0
    converged = True
    taus = cfg.schedule()
    for i, tau in enumerate(taus):
        # intermediate temperatures only need a rough solve
        tol = cfg.tol if i == len(taus) - 1 else max(cfg.tol, 1e-6)
        c, q, its, stalled = _lbfgs_stage(obj, c, tau, max(budget - total, 1), tol)
        total += its
        if total >= budget:
            converged = False
            break
    c, q = _polish(obj, c, cfg.polish_iter)
    return RunResult(FourierLoop.from_complex(c), q, converged, total, run)


def minimize(body, cfg=None, phase=0.0):
    """Independent multistart runs, sorted by value (ties by run index)."""
    cfg = SolveConfig() if cfg is None else cfg
    runs = range(cfg.starts)
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as ex:
            results = list(ex.map(lambda r: _single_run(body, cfg, r, phase), runs))
    else:
        results = [_single_run(body, cfg, r, phase) for r in runs]
    for r in results:
        if not r.converged:
            log.warning("run %d did not converge within %d iterations", r.run, cfg.max_iter)
    return sorted(results, key=lambda r: (r.value, r.run))


# ---------------------------------------------------------------------------
# systole recovery and certificates


def _samples(x, M):
    """Loop samples and samples of ``-J0 x'`` in block real form."""
    ks = x.ks
    c = x.c
    z = synth(c, ks, M)
    w = synth(2 * np.pi * ks[:, None] * c, ks, M)
    return np.hstack([z.real, z.imag]), np.hstack([w.real, w.imag])


def recover_beta(body, x, value, M=None):
    """Least-squares constant in ``value * x(t) + beta in dH^*(-J0 x'(t))``."""
    M = 8 * x.modes if M is None else M
    X, U = _samples(x, M)
    return np.mean(geo.subgrad_conj(body, U) - value * X, axis=0)


def reconstruct(body, x, value, beta, M=None, rtol=None):
    """Closed characteristic ``(value * x + beta) / sqrt(value)`` with certificates.

    ``rtol`` is the relative slack used to decide which facets are active in
    the inclusion check; by default it tracks the boundary residual.
    """
    if not value > 0:
        raise ValueError(f"dual value must be positive, got {value}")
    M = 8 * x.modes if M is None else M
    X, U = _samples(x, M)
    ks = x.ks
    dz = synth(2j * np.pi * ks[:, None] * x.c, ks, M)
    root = np.sqrt(value)
    gamma = TimeLoop((value * X + beta) / root, np.hstack([dz.real, dz.imag]) * root)
    T = gamma.action()
    bres = float(np.max(np.abs(geo.gauge2(body, gamma.samples) - 1.0)))
    if rtol is None:
        rtol = max(1e-6, 4 * bres)
    ires = inclusion_residual(body, gamma, T, rtol=rtol)
    return SystoleResult(gamma, T, np.asarray(beta, float), ires, bres, x, value)


def _dist_to_hull(p, G):
    """Euclidean distance from ``p`` to the convex hull of the rows of ``G``."""
    if len(G) == 1:
        return float(np.linalg.norm(p - G[0]))
    # sum(lambda) = 1 enforced by a heavily weighted extra row
    wgt = 1e4 * max(1.0, np.abs(G).max(), np.abs(p).max())
    A = np.vstack([G.T, wgt * np.ones(len(G))])
    b = np.append(p, wgt)
    lam, _ = nnls(A, b)
    return float(np.linalg.norm(G.T @ lam - p))


def corner_mask(loop, window=2):
    """Samples whose finite-difference velocity may straddle a corner.

    Corners are detected as grid points where the polygonal direction turns
    sharply; every sample within ``window`` cells of one is flagged.
    """
    s = loop.samples
    d1 = np.roll(s, -1, axis=0) - s
    d2 = d1 - np.roll(d1, 1, axis=0)
    n1 = np.linalg.norm(d1, axis=1)
    jumps = np.linalg.norm(d2, axis=1) > 0.1 * np.maximum(n1, np.roll(n1, 1))
    mask = np.zeros(loop.M, dtype=bool)
    for j in np.flatnonzero(jumps):
        idx = np.arange(j - window, j + window + 1) % loop.M
        mask[idx] = True
    return mask, int(np.count_nonzero(jumps))


def _segment_dist(P, A, B):
    """Row-wise distance from ``P`` to the segments ``[A, B]``."""
    D = B - A
    dd = np.einsum("ij,ij->i", D, D)
    t = np.einsum("ij,ij->i", P - A, D) / np.where(dd > 0, dd, 1.0)
    t = np.clip(np.where(dd > 0, t, 0.0), 0.0, 1.0)
    return np.linalg.norm(P - A - t[:, None] * D, axis=1)


def inclusion_profile(body, loop, T, rtol=1e-9):
    """Per-sample distance of ``gamma'/T`` to ``J0 dH_K(gamma)``.

    ``dH_K`` at a sample is the convex hull of the gradients of the facets
    active within relative slack ``rtol`` (a single gradient for ellipsoids).
    """
    if not T > 0:
        raise ValueError(f"action must be positive, got {T}")
    P = loop.velocity() / T
    X = loop.samples
    try:
        G, active = body._generator_table(X, rtol)
    except NotImplementedError:
        out = np.empty(loop.M)
        for j in range(loop.M):
            out[j] = _dist_to_hull(P[j], geo.apply_J0(body._generators(X[j], rtol)))
        return out
    G = geo.apply_J0(G)
    out = np.empty(loop.M)
    patterns, inv = np.unique(active, axis=0, return_inverse=True)
    inv = inv.ravel()
    for p, pat in enumerate(patterns):
        rows = np.flatnonzero(inv == p)
        cols = np.flatnonzero(pat)
        if len(cols) == 1:
            out[rows] = np.linalg.norm(P[rows] - G[rows, cols[0]], axis=1)
        elif len(cols) == 2:
            out[rows] = _segment_dist(P[rows], G[rows, cols[0]], G[rows, cols[1]])
        else:
            for r in rows:
                out[r] = _dist_to_hull(P[r], G[r, cols])
    return out


def inclusion_residual(body, loop, T, rtol=1e-9, corner_window=2, return_info=False):
    """Max distance of ``gamma'/T`` to ``J0 dH_K(gamma)`` over the samples.

    Loops without derivative samples get central differences; samples within
    ``corner_window`` cells of a detected corner are then skipped
    (``corner_window=None`` keeps every sample).  With ``return_info`` the
    number of corners and excluded samples are returned as well.
    """
    prof = inclusion_profile(body, loop, T, rtol)
    corners, excluded = 0, 0
    if loop.derivative is None and corner_window is not None:
        mask, corners = corner_mask(loop, corner_window)
        prof = prof[~mask]
        excluded = int(mask.sum())
    res = float(prof.max()) if len(prof) else 0.0
    if return_info:
        return res, {"corners": corners, "excluded": excluded}
    return res


def solve(body, cfg=None, phase=0.0):
    """Minimise, then reconstruct and certify a systole for every run."""
    cfg = SolveConfig() if cfg is None else cfg
    out = []
    for r in minimize(body, cfg, phase):
        beta = recover_beta(body, r.loop, r.value, cfg.grid)
        res = reconstruct(body, r.loop, r.value, beta, cfg.grid)
        res.converged = r.converged
        res.extras = {"run": r.run, "iterations": r.iterations}
        out.append(res)
    return out
