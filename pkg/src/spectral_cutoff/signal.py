"""True-signal models and the oracle quantities built from them.

``SignalSpectrum`` holds the coefficients c(k) of g = R*f; the solution f
has coefficients c(k) w(k).  Tails of power-law spectra are evaluated in
closed form through the Hurwitz zeta function, so rho(N) carries no
truncation error.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import binom, zeta

from .errors import ConfigError, DomainError, ModelError
from .spectrum import Gamma_limit, LimitRatio, WeightSequence, _num, cumulative_S

SIGNAL_MODELS = ("power_law", "explicit", "trig_poly")
SIGN_PATTERNS = ("all-positive", "alternating")


@dataclass(frozen=True)
class SignalSpectrum:
    """Coefficients c(k) of g.

    ``power_law``: c(k) = scale * s(k) * k**(-delta) with s(k) = 1 or
    (-1)**(k+1).  ``explicit`` / ``trig_poly``: a finite list c(1..K); the
    two differ only in that a trig polynomial is declared exactly band
    limited, so its tail ratio is reported as non-applicable.
    """
    model: str = "power_law"
    delta: float = 0.0
    scale: float = 1.0
    signs: str = "alternating"
    explicit_values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.model not in SIGNAL_MODELS:
            raise ConfigError("signal.model", f"unknown signal model {self.model!r}")
        if self.model == "power_law":
            if not (np.isfinite(self.delta) and self.delta > 0):
                raise ConfigError("signal.delta", f"delta must be > 0, got {self.delta!r}")
            if not np.isfinite(self.scale):
                raise ConfigError("signal.scale", "scale must be finite")
            if self.signs not in SIGN_PATTERNS:
                raise ConfigError("signal.signs", f"expected one of {SIGN_PATTERNS}")
        else:
            v = np.asarray(self.explicit_values, dtype=np.float64)
            if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)):
                raise ConfigError("signal.values", "need a non-empty list of finite coefficients")
            object.__setattr__(self, "explicit_values", tuple(float(x) for x in v))

    @classmethod
    def power_law(cls, delta, scale=1.0, signs="alternating"):
        return cls("power_law", float(delta), float(scale), signs)

    @classmethod
    def explicit(cls, values):
        return cls("explicit", explicit_values=tuple(values))

    @classmethod
    def trig_poly(cls, values):
        return cls("trig_poly", explicit_values=tuple(values))

    @property
    def support(self):
        """Last index of a finite spectrum (None for power laws)."""
        if self.model == "power_law":
            return None
        v = np.asarray(self.explicit_values)
        nz = np.flatnonzero(v)
        return int(nz[-1]) + 1 if nz.size else 0

    def coefficients(self, L):
        """Array (c(1), ..., c(L)); finite spectra are zero padded."""
        L = int(L)
        if self.model == "power_law":
            k = np.arange(1, L + 1, dtype=np.float64)
            c = self.scale * k ** (-self.delta)
            if self.signs == "alternating":
                c[1::2] *= -1.0
            return c
        out = np.zeros(L)
        v = np.asarray(self.explicit_values)
        m = min(L, v.size)
        out[:m] = v[:m]
        return out

    def __call__(self, k):
        if int(k) != k or k < 1:
            raise DomainError("basis index k must be >= 1")
        return float(self.coefficients(int(k))[-1])

    def to_config(self):
        if self.model == "power_law":
            return {"model": "power_law", "delta": self.delta, "scale": self.scale,
                    "signs": self.signs}
        return {"model": self.model, "values": list(self.explicit_values)}

    @classmethod
    def from_config(cls, block):
        if not isinstance(block, dict):
            raise ConfigError("signal", "expected an object")
        model = block.get("model", "power_law")
        if model == "power_law":
            return cls.power_law(_num(block, "signal", "delta"),
                                 _num(block, "signal", "scale", 1.0),
                                 block.get("signs", "alternating"))
        if model in ("explicit", "trig_poly"):
            if "values" not in block:
                raise ConfigError("signal.values", "missing")
            return cls(model, explicit_values=tuple(block["values"]))
        raise ConfigError("signal.model", f"unknown signal model {model!r}")


def _power_tail(a, b, N):
    """sum_{k>N} k**(-a) * max(k//2, 1)**b, exactly (a - b > 1)."""
    total = 0.0
    K = max(2, N + (N % 2))
    for k in range(N + 1, K + 1):
        total += k ** (-a) * max(k // 2, 1) ** b
    M0 = K // 2
    s = a - b
    # even k = 2m, m > M0
    even = 2.0 ** (-a) * zeta(s, M0 + 1)
    # odd k = 2m+1, m >= M0: m**b = (m+1/2)**b (1 - 1/(2m+1))**b, binomial series
    odd = 0.0
    q = M0 + 0.5
    for j in range(0, 200):
        coef = binom(b, j) * (-0.5) ** j
        if coef == 0.0:
            if float(b).is_integer() and j > b:
                break
            continue
        term = coef * zeta(s + j, q)
        odd += term
        if abs(term) <= 1e-18 * abs(odd):
            break
    odd *= 2.0 ** (-a)
    return total + even + odd


def _exponents(sig, weights, wpow):
    theta = weights.degree
    if theta is None:
        raise ModelError("a power-law signal needs an analytic (identity or power-law) kernel")
    a = 2.0 * sig.delta
    b = theta * wpow
    if a - b <= 1.0:
        raise ModelError(
            f"sum c(k)^2 w(k)^{wpow} diverges: need delta > {wpow / 4:g}*theta + 1/2 "
            f"(delta={sig.delta:g}, theta={theta:g})")
    scale = weights.scale if weights.model == "power_law" else 1.0
    return a, b, sig.scale ** 2 * scale ** wpow


def weighted_tail(sig, weights, N, wpow=2):
    """sum_{k>N} c(k)^2 w(k)^wpow."""
    if N < 0:
        raise DomainError("N must be >= 0")
    N = int(N)
    if sig.model == "power_law":
        a, b, const = _exponents(sig, weights, wpow)
        return const * _power_tail(a, b, N)
    K = len(sig.explicit_values)
    if N >= K:
        return 0.0
    weights.require(K, "this signal")
    c = sig.coefficients(K)[N:]
    w = weights.values(K)[N:]
    return float(np.sum(c * c * np.abs(w) ** wpow))


def tail_array(sig, weights, L, wpow=2):
    """Array (rho(0), rho(1), ..., rho(L)) for the given weight power."""
    base = weighted_tail(sig, weights, L, wpow)
    c = sig.coefficients(L)
    if sig.model != "power_law":
        weights.require(min(L, len(sig.explicit_values)), "this signal")
        K = min(L, len(sig.explicit_values))
        w = np.ones(L)
        w[:K] = np.abs(weights.values(K))
    else:
        w = np.abs(weights.values(L))
    e = c * c * w ** wpow
    return np.concatenate((np.cumsum(e[::-1])[::-1], [0.0])) + base


def check_summable(sig, weights, wpow=2):
    """Raise :class:`ModelError` unless sum c^2 w^wpow converges."""
    if sig.model == "power_law":
        _exponents(sig, weights, wpow)


def rho(sig, weights, N):
    """rho(N) = sum_{k>N} c(k)^2 w(k)^2, the squared bias of truncation at N."""
    return weighted_tail(sig, weights, N, 2)


def rho2(sig, weights, N):
    """rho2(N) = sum_{k=N+1}^{2N} c(k)^2 w(k)^4."""
    if N < 1:
        raise DomainError("N must be >= 1")
    c = sig.coefficients(2 * N)[N:]
    w = weights.values(2 * N)[N:]
    return float(np.sum(c * c * w ** 4))


def energy(sig, weights):
    """H(f) = ||f||^2 = sum c(k)^2 w(k)^2."""
    return weighted_tail(sig, weights, 0, 2)


def b_norm_sq(sig, weights):
    """||f||^2 in B(w) = sum c(k)^2 w(k)^4."""
    return weighted_tail(sig, weights, 0, 4)


def gamma_limit(sig, weights):
    """gamma = lim rho(2N)/rho(N); 2**-(2 delta - 2 theta - 1) for power laws."""
    if sig.model == "power_law" and weights.degree is not None:
        check_summable(sig, weights)
        return LimitRatio(2.0 ** (-(2 * sig.delta - 2 * weights.degree - 1)))
    if sig.model == "trig_poly":
        return LimitRatio(None)
    K = len(sig.explicit_values)
    N = K // 4
    if N < 1:
        return LimitRatio(None)
    r1 = rho(sig, weights, N)
    if r1 <= 0:
        return LimitRatio(None)
    return LimitRatio(None, rho(sig, weights, 2 * N) / r1, N)


def N_plus(n, weights):
    """Upper end of every truncation search.

    min(Ent(n/log(n+8)), Ent((n/log(n+8))**(1/(2 theta)))), natural log,
    further capped at floor(n/3).  theta = 0 drops the second term; explicit
    kernels (theta unknown) use the first term only.
    """
    if n < 16:
        raise DomainError("n must be >= 16")
    base = n / math.log(n + 8)
    out = int(base)
    theta = weights.degree
    if theta is not None and theta > 0:
        # log space: base ** (1/(2 theta)) overflows for tiny theta
        e = math.log(base) / (2.0 * theta)
        if e < math.log(out + 1):
            out = min(out, int(base ** (1.0 / (2.0 * theta))))
    return max(1, min(out, n // 3))


@dataclass(frozen=True)
class OracleRisk:
    N_plus: int
    A_curve: np.ndarray
    A_star: float
    N0: int
    U: Optional[float]
    gamma: LimitRatio
    Gamma: LimitRatio

    def A(self, N):
        return float(self.A_curve[N - 1])


def U_constant(gamma, Gamma):
    """U = min(1 - gamma_-, Gamma_- - 1) with the lower limits taken as the limits."""
    if gamma is None or Gamma is None:
        return None
    return min(1.0 - gamma, Gamma - 1.0)


def oracle_risk(sig, weights, n, sigma):
    """A(N,n) = sigma^2 S(N)/n + rho(N) over N in [1, N+], its min and argmin.

    Ties go to the smallest N.
    """
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    Np = N_plus(n, weights)
    weights.require(2 * Np, "the truncation search")
    tails = tail_array(sig, weights, Np)
    A = sigma ** 2 * cumulative_S(weights, Np) / n + tails[1:]
    i = int(np.argmin(A))
    gam = gamma_limit(sig, weights)
    Gam = Gamma_limit(weights)
    return OracleRisk(Np, A, float(A[i]), i + 1, U_constant(gam.value, Gam.best()), gam, Gam)
