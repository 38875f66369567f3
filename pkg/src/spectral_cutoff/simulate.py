"""Synthetic observations y(t_i) = g(t_i) + sigma * eps_i and the RSS scale estimate."""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import zeta

from .basis import UniformGrid, design_matrix, raw_coefficients
from .errors import ConfigError, DomainError, RangeError

NOISE_FAMILIES = ("gaussian", "subweibull", "student_t")

# coefficients below this fraction of max|c| are dropped by the truncated synthesis
_TRUNC_REL = 1e-14
_MAX_TERMS = 1 << 24


def _subweibull_scale(q):
    # Weibull(q, lam) has E X^2 = lam^2 Gamma(1 + 2/q); pick lam for unit variance
    return 1.0 / math.sqrt(gamma_fn(1.0 + 2.0 / q))


@dataclass(frozen=True)
class NoiseModel:
    """Standardized (mean 0, variance 1) noise families.

    ``subweibull(q, Q)``: symmetric, |eps| Weibull with shape q, so
    P(eps > u) = exp(-(u/lam)^q) / 2 <= exp(-(u/Q)^q) whenever Q >= lam.
    ``gaussian`` declares (q, Q) = (2, sqrt 2).  ``student_t`` (df >= 5) has
    four finite moments but no exponential tail.
    """
    family: str = "gaussian"
    q: Optional[float] = None
    Q: Optional[float] = None
    df: Optional[float] = None

    def __post_init__(self):
        if self.family not in NOISE_FAMILIES:
            raise ConfigError("noise.family", f"unknown noise family {self.family!r}")
        if self.family == "subweibull":
            if self.q is None or not self.q > 0:
                raise ConfigError("noise.q", "subweibull tail exponent q must be > 0")
            lam = _subweibull_scale(self.q)
            if self.Q is None:
                object.__setattr__(self, "Q", lam)
            elif not self.Q >= lam * (1 - 1e-12):
                raise ConfigError("noise.Q", f"tail scale Q must be >= {lam:.6g} for unit variance at q={self.q:g}")
        elif self.family == "student_t":
            if self.df is None or not self.df >= 5:
                raise ConfigError("noise.df", "student_t needs df >= 5")

    @classmethod
    def gaussian(cls):
        return cls("gaussian")

    @classmethod
    def subweibull(cls, q, Q=None):
        return cls("subweibull", float(q), None if Q is None else float(Q))

    @classmethod
    def student_t(cls, df=5):
        return cls("student_t", df=float(df))

    def tail_params(self):
        """Declared (q, Q) of the exponential tail bound, or None."""
        if self.family == "gaussian":
            return 2.0, math.sqrt(2.0)
        if self.family == "subweibull":
            return self.q, self.Q
        return None

    def sample(self, rng, size):
        if self.family == "gaussian":
            return rng.standard_normal(size)
        if self.family == "subweibull":
            mag = _subweibull_scale(self.q) * rng.weibull(self.q, size)
            sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
            return sign * mag
        return rng.standard_t(self.df, size) / math.sqrt(self.df / (self.df - 2.0))

    def to_config(self):
        out = {"family": self.family}
        if self.family == "subweibull":
            out.update(q=self.q, Q=self.Q)
        elif self.family == "student_t":
            out["df"] = self.df
        return out

    @classmethod
    def from_config(cls, block):
        if block is None:
            return cls.gaussian()
        if not isinstance(block, dict):
            raise ConfigError("noise", "expected an object")
        fam = block.get("family", "gaussian")
        if fam == "subweibull":
            return cls.subweibull(block.get("q"), block.get("Q"))
        if fam == "student_t":
            return cls.student_t(block.get("df", 5))
        return cls(fam)


@dataclass(frozen=True)
class ObservationSet:
    grid: UniformGrid
    y: np.ndarray
    sigma_true: Optional[float] = None
    seed: Optional[int] = None
    noise_family: Optional[str] = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=np.float64)
        if y.shape != (self.grid.n,):
            raise DomainError(f"expected {self.grid.n} observations, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise DomainError("observations must be finite")
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    @property
    def n(self):
        return self.grid.n

    @property
    def t(self):
        return self.grid.points

    @classmethod
    def from_values(cls, y, **kw):
        y = np.asarray(y, dtype=np.float64)
        return cls(UniformGrid(y.size), y, **kw)


def _fold_finite(c, n):
    K = c.size
    mmax = K // 2
    Z = np.zeros(mmax + 1, dtype=complex)
    Z[0] = c[0]
    padded = np.concatenate((c, [0.0]))
    m = np.arange(1, mmax + 1)
    Z[1:] = math.sqrt(2.0) * (padded[2 * m - 1] - 1j * padded[2 * m])
    Zf = np.zeros(n, dtype=complex)
    np.add.at(Zf, np.arange(mmax + 1) % n, Z)
    return Zf


def _fold_power_law(sig, n):
    # sum over all frequencies m congruent to r (mod n), via Hurwitz zeta
    d = sig.delta
    r = np.arange(n, dtype=np.float64)
    q_even = np.where(r == 0, 1.0, r / n)
    q_odd = np.where(r == 0, 1.0 + 1.0 / (2 * n), (2 * r + 1) / (2 * n))
    base = (2.0 * n) ** (-d)
    s_even = -1.0 if sig.signs == "alternating" else 1.0
    Zf = math.sqrt(2.0) * sig.scale * base * (s_even * zeta(d, q_even) - 1j * zeta(d, q_odd))
    Zf[0] += sig.scale
    return Zf


def forward(sig, weights, grid):
    """g(t_i) = sum_k c(k) phi_k(t_i) on the grid.

    The convolution is diagonal in the trigonometric basis, so g is
    determined by c(k) alone; ``weights`` is accepted for interface
    symmetry with the solution side.  Frequencies are folded onto the grid
    (aliasing is exact on t_i = i/n).  Power laws with delta > 1 are summed
    in closed form; otherwise the series is cut where |c(k)| drops below
    1e-14 max|c|.
    """
    n = grid.n
    if sig.model == "power_law":
        if sig.delta > 1.0:
            Zf = _fold_power_law(sig, n)
        else:
            K = int(min(_MAX_TERMS, math.ceil(_TRUNC_REL ** (-1.0 / sig.delta))))
            Zf = _fold_finite(sig.coefficients(K), n)
    else:
        Zf = _fold_finite(sig.coefficients(len(sig.explicit_values)), n)
    G = np.real(np.fft.ifft(Zf)) * n
    return G[np.arange(1, n + 1) % n]


def observe(g_values, sigma, noise=None, seed=None, provenance=None):
    """Add sigma-scaled noise drawn from ``noise`` with a fresh generator.

    The same (seed, noise, n) always yields the same observations.
    """
    if not sigma >= 0:
        raise DomainError("sigma must be >= 0")
    noise = noise or NoiseModel.gaussian()
    g = np.asarray(g_values, dtype=np.float64)
    if sigma == 0:
        y = g.copy()
    else:
        rng = np.random.default_rng(seed)
        y = g + sigma * noise.sample(rng, g.size)
    return ObservationSet(UniformGrid(g.size), y, float(sigma), seed, noise.family,
                          dict(provenance or {}))


def icbrt(n):
    """Integer cube root floor(n ** (1/3)) without float rounding surprises."""
    r = int(round(n ** (1.0 / 3.0)))
    while r ** 3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def default_pre_truncation(n):
    return max(1, icbrt(n))


def estimate_sigma(obs, pre_N=None):
    """RSS scale estimate sqrt(sum (y - fit)^2 / (n - 1)).

    ``fit`` is the projection of y onto the first ``pre_N`` basis functions
    (default Ent(n^(1/3))); it approximates g, the function actually
    observed.
    """
    n = obs.n
    pre_N = default_pre_truncation(n) if pre_N is None else int(pre_N)
    if pre_N < 1 or n <= 3 * pre_N:
        raise RangeError(f"preliminary truncation {pre_N} needs 1 <= pre_N and n > 3*pre_N (n={n})")
    c = raw_coefficients(obs, pre_N)
    fit = design_matrix(obs.t, pre_N) @ c
    r = obs.y - fit
    return math.sqrt(float(r @ r) / (n - 1))
