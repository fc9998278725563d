"""Zero-mean loops in R^{2n}: truncated Fourier form and time samples.

A loop is stored through the expansion ``x(t) = sum_k exp(2 pi k t J0) xhat(k)``
over ``k in [-N, N] \\ {0}``.  Writing each symplectic plane as a complex
number ``z_j = x_j + i y_j`` turns ``J0`` into multiplication by ``i``, so the
expansion is the ordinary complex Fourier series ``z(t) = sum_k c_k e^{2 pi i k t}``
with ``c_k = xhat_x(k) + i xhat_y(k)``.  All transforms below use that view.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FourierLoop",
    "TimeLoop",
    "action",
    "phase_shift",
    "center",
    "to_time",
    "from_time",
    "normalize_action",
    "truncate",
    "mode_indices",
]


def mode_indices(N):
    """Mode numbers in storage order: ``-N, ..., -1, 1, ..., N``."""
    return np.concatenate([np.arange(-N, 0), np.arange(1, N + 1)])


@dataclass(frozen=True)
class FourierLoop:
    """Real coefficients ``xhat(k)`` stacked as rows, shape ``(2N, 2n)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 2 or c.shape[0] % 2 or c.shape[1] % 2 or c.shape[0] == 0:
            raise ValueError(f"coefficient array must have shape (2N, 2n), got {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def modes(self):
        return self.coeffs.shape[0] // 2

    @property
    def dim(self):
        return self.coeffs.shape[1]

    @property
    def ks(self):
        return mode_indices(self.modes)

    @property
    def c(self):
        """Complex per-plane coefficients, shape ``(2N, n)``."""
        n = self.dim // 2
        return self.coeffs[:, :n] + 1j * self.coeffs[:, n:]

    @classmethod
    def from_complex(cls, c):
        c = np.asarray(c)
        return cls(np.hstack([c.real, c.imag]))

    @classmethod
    def from_modes(cls, dim, N, modes):
        """Build from a ``{k: vector}`` mapping."""
        coeffs = np.zeros((2 * N, dim))
        ks = mode_indices(N)
        for k, v in modes.items():
            if k == 0 or abs(k) > N:
                raise ValueError(f"mode {k} outside [-{N}, {N}] \\ {{0}}")
            coeffs[np.searchsorted(ks, k)] = v
        return cls(coeffs)

    def __mul__(self, s):
        return FourierLoop(self.coeffs * s)

    __rmul__ = __mul__

    def __add__(self, other):
        return FourierLoop(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return FourierLoop(self.coeffs - other.coeffs)

    def norm_h1(self):
        """``||xdot||_{L^2}``."""
        k = self.ks
        return float(np.sqrt(np.sum((2 * np.pi * k[:, None]) ** 2 * self.coeffs**2)))

    def to_json(self):
        n = self.dim // 2
        return {
            "n": n,
            "N": self.modes,
            "coeffs": [{"k": int(k), "v": row.tolist()} for k, row in zip(self.ks, self.coeffs)],
        }

    @classmethod
    def from_json(cls, obj):
        n, N = int(obj["n"]), int(obj["N"])
        return cls.from_modes(2 * n, N, {int(e["k"]): e["v"] for e in obj["coeffs"]})


@dataclass(frozen=True)
class TimeLoop:
    """Samples ``gamma(j / M)``, shape ``(M, 2n)``, plus optional derivative samples."""

    samples: np.ndarray
    derivative: np.ndarray | None = field(default=None)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[0] < 2 or s.shape[1] % 2:
            raise ValueError(f"samples must have shape (M >= 2, 2n), got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise ValueError("loop samples must be finite")
        object.__setattr__(self, "samples", s)
        if self.derivative is not None:
            d = np.asarray(self.derivative, dtype=float)
            if d.shape != s.shape:
                raise ValueError("derivative samples must match the loop samples")
            object.__setattr__(self, "derivative", d)

    @property
    def M(self):
        return self.samples.shape[0]

    @property
    def dim(self):
        return self.samples.shape[1]

    @property
    def times(self):
        return np.arange(self.M) / self.M

    def velocity(self):
        """Derivative samples, by periodic central differences when absent."""
        if self.derivative is not None:
            return self.derivative
        s = self.samples
        return (np.roll(s, -1, axis=0) - np.roll(s, 1, axis=0)) * (self.M / 2.0)

    def action(self):
        """Symplectic action ``1/2 int <gamma', J0 gamma>``.

        Uses the derivative samples (trapezoidal rule) when present and the
        exact polygon area of the sample points otherwise.
        """
        n = self.dim // 2
        s = self.samples
        x, y = s[:, :n], s[:, n:]
        if self.derivative is not None:
            d = self.derivative
            return float(0.5 * np.mean(np.sum(d[:, n:] * x - d[:, :n] * y, axis=1)))
        xn, yn = np.roll(x, -1, axis=0), np.roll(y, -1, axis=0)
        return float(0.5 * np.sum(x * yn - xn * y))

    def shifted_samples(self, m):
        """Samples of ``gamma(. - m / M)`` for an integer shift ``m``."""
        return np.roll(self.samples, m, axis=0)

    def __add__(self, v):
        return TimeLoop(self.samples + np.asarray(v, dtype=float), self.derivative)

    def write_csv(self, path):
        n = self.dim // 2
        order = [i for j in range(n) for i in (j, n + j)]
        header = ["t"] + [f"{c}{j + 1}" for j in range(n) for c in ("x", "y")]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for t, row in zip(self.times, self.samples[:, order]):
                w.writerow([format(t, ".17g")] + [format(v, ".17g") for v in row])

    @classmethod
    def read_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], np.array(rows[1:], dtype=float)
        n = (len(header) - 1) // 2
        if header[0] != "t" or len(header) != 2 * n + 1:
            raise ValueError("loop CSV header must be t,x1,y1,...,xn,yn")
        data = body[:, 1:]
        return cls(np.hstack([data[:, 0::2], data[:, 1::2]]))


def action(x):
    """Exact action ``pi * sum_k k |xhat(k)|^2``."""
    return float(np.pi * np.sum(x.ks * np.sum(x.coeffs**2, axis=1)))


def truncate(x, N):
    """Keep the modes ``|k| <= N``."""
    if N > x.modes or N < 1:
        raise ValueError(f"cannot truncate {x.modes} modes to {N}")
    keep = np.abs(x.ks) <= N
    return FourierLoop(x.coeffs[keep])


def phase_shift(x, theta):
    """``x(. - theta)``: rotate ``xhat(k)`` by ``-2 pi k theta`` in each plane."""
    rot = np.exp(-2j * np.pi * x.ks * theta)
    return FourierLoop.from_complex(x.c * rot[:, None])


def center(loop):
    """Subtract the mean of the samples."""
    return TimeLoop(loop.samples - loop.samples.mean(axis=0), loop.derivative)


def _grid(c, ks, M):
    """Place complex coefficients on an FFT grid of length M."""
    G = np.zeros((M, c.shape[1]), dtype=complex)
    G[ks % M] = c
    return G


def synth(c, ks, M):
    """Samples ``sum_k c_k e^{2 pi i k j / M}``, shape ``(M, n)`` complex."""
    return np.fft.ifft(_grid(c, ks, M), axis=0) * M


def analyze(z, ks):
    """Discrete Fourier coefficients of complex samples for the modes ``ks``."""
    M = z.shape[0]
    return (np.fft.fft(z, axis=0) / M)[ks % M]


def to_time(x, M):
    """Samples and exact derivative samples of ``x`` on the grid ``j / M``."""
    if M < 4 * x.modes:
        raise ValueError(f"grid M={M} is too small for N={x.modes} (need M >= 4N)")
    ks = x.ks
    c = x.c
    z = synth(c, ks, M)
    dz = synth(2j * np.pi * ks[:, None] * c, ks, M)
    return TimeLoop(np.hstack([z.real, z.imag]), np.hstack([dz.real, dz.imag]))


def from_time(loop, N):
    """Fourier coefficients ``|k| <= N`` of the centred samples."""
    if loop.M <= 2 * N:
        raise ValueError(f"{loop.M} samples cannot resolve {N} modes")
    n = loop.dim // 2
    s = loop.samples - loop.samples.mean(axis=0)
    z = s[:, :n] + 1j * s[:, n:]
    return FourierLoop.from_complex(analyze(z, mode_indices(N)))


def normalize_action(x):
    """Rescale onto the level set ``action = 1``."""
    a = action(x)
    if not a > 0:
        raise ValueError(f"loop has nonpositive action {a}")
    return x * (1.0 / np.sqrt(a))
