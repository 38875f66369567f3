"""Orthonormal trigonometric system on [0, 1] and uniform-grid transforms.

Index convention (1-based)::

    phi_1(t)    = 1
    phi_{2m}(t) = sqrt(2) cos(2 pi m t)
    phi_{2m+1}(t) = sqrt(2) sin(2 pi m t)

so ``frequency(k) == k // 2``.  Observations live on the grid t_i = i/n,
i = 1..n, which includes t = 1 (identified with 0 by periodicity).
"""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, RangeError

MIN_GRID_SIZE = 16
SQRT2 = np.sqrt(2.0)


def frequency(k):
    """Frequency of basis index ``k`` (0 for the constant function)."""
    k = np.asarray(k)
    if np.any(k < 1):
        raise DomainError("basis index k must be >= 1")
    out = k // 2
    return int(out) if out.ndim == 0 else out


def eval_basis(k, t):
    """Evaluate phi_k at position(s) ``t`` (reduced mod 1)."""
    if int(k) != k or k < 1:
        raise DomainError(f"basis index k must be a positive integer, got {k!r}")
    k = int(k)
    t = np.mod(np.asarray(t, dtype=np.float64), 1.0)
    if k == 1:
        out = np.ones_like(t)
    else:
        arg = 2.0 * np.pi * (k // 2) * t
        out = SQRT2 * (np.cos(arg) if k % 2 == 0 else np.sin(arg))
    return float(out) if out.ndim == 0 else out


def design_matrix(t, L):
    """Matrix with entries phi_k(t_j); shape (len(t), L)."""
    t = np.mod(np.atleast_1d(np.asarray(t, dtype=np.float64)), 1.0)
    out = np.empty((t.size, L))
    if L >= 1:
        out[:, 0] = 1.0
    m = np.arange(1, L // 2 + 1)
    arg = 2.0 * np.pi * np.outer(t, m)
    out[:, 1::2] = (SQRT2 * np.cos(arg))[:, : out[:, 1::2].shape[1]]
    out[:, 2::2] = (SQRT2 * np.sin(arg))[:, : out[:, 2::2].shape[1]]
    return out


@dataclass(frozen=True)
class UniformGrid:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_GRID_SIZE:
            raise DomainError(f"grid size n must be an integer >= {MIN_GRID_SIZE}, got {self.n!r}")

    @property
    def points(self):
        return np.arange(1, self.n + 1) / self.n

    @property
    def projection_cap(self):
        """Largest truncation usable by a projection estimate, floor(n/3)."""
        return self.n // 3

    @property
    def statistic_cap(self):
        """Largest coefficient index touched by block statistics, floor(2n/3)."""
        return (2 * self.n) // 3


def _values(obs):
    y = getattr(obs, "y", obs)
    return np.ascontiguousarray(y, dtype=np.float64)


def _fft_coefficients(y, L):
    n = y.shape[0]
    # numpy's DFT starts at t = 0, which is our last grid point t = 1
    F = np.fft.rfft(np.roll(y, 1))
    out = np.empty(L)
    out[0] = F[0].real / n
    k = np.arange(2, L + 1)
    m = k // 2
    out[1:] = np.where(k % 2 == 0, SQRT2 * F[m].real / n, -SQRT2 * F[m].imag / n)
    return out


def raw_coefficients(obs, L, method="direct"):
    """Empirical coefficients up to ``L <= floor(2n/3)``.

    Block statistics look at indices up to 2N with N <= floor(n/3); this is
    the entry point they use.  ``method`` is ``"direct"`` (reference O(nL)
    sum) or ``"fft"``.
    """
    y = _values(obs)
    n = y.shape[0]
    cap = (2 * n) // 3
    if L < 1:
        raise RangeError("coefficient count L must be >= 1")
    if L > cap:
        raise RangeError(f"L = {L} exceeds the estimable index range floor(2n/3) = {cap}")
    if method == "direct":
        return _kernels.direct_coefficients(y, int(L))
    if method == "fft":
        return _fft_coefficients(y, int(L))
    raise ValueError(f"unknown coefficient method {method!r}")


def empirical_coefficients(obs, L, method="direct"):
    """c(k,n) = n^-1 sum_i y(t_i) phi_k(t_i) for k = 1..L.

    ``L`` is capped at floor(n/3), the projection range; a larger request
    raises :class:`RangeError`.
    """
    n = _values(obs).shape[0]
    cap = n // 3
    if L > cap:
        raise RangeError(f"L = {L} exceeds the projection bound floor(n/3) = {cap}")
    return raw_coefficients(obs, L, method=method)


def synthesize(coeffs, t, weights=None):
    """Evaluate sum_k coeffs(k) [weights(k)] phi_k(t).

    ``weights`` may be a sequence of multipliers or an object with a
    ``values(L)`` method (a :class:`~spectral_cutoff.spectrum.WeightSequence`).
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if not np.all(np.isfinite(coeffs)):
        raise DomainError("coefficients must be finite")
    L = coeffs.size
    if weights is not None:
        w = weights.values(L) if hasattr(weights, "values") else np.asarray(weights, dtype=np.float64)[:L]
        coeffs = coeffs * w
    scalar = np.ndim(t) == 0
    out = design_matrix(t, L) @ coeffs
    return float(out[0]) if scalar else out


def l2_distance_on_spectrum(a, b):
    """Squared L2 distance between two coefficient vectors (zero padded)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    L = max(a.size, b.size)
    d = np.zeros(L)
    d[: a.size] += a
    d[: b.size] -= b
    return float(d @ d)
