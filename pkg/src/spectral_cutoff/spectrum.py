"""Kernel spectra w(k), their partial sums, and weighted modular norms.

The kernel R enters only through w(k), the reciprocal of its Fourier
coefficients: g = R*f has coefficients c(k) and f has c(k) w(k).
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, DomainError, ModelError, RangeError

MODELS = ("identity", "power_law", "explicit")


@dataclass(frozen=True)
class LimitRatio:
    """A dyadic limit ratio such as lim S(2N)/S(N).

    ``value`` is the analytic limit or ``None`` when no limit can be read
    off the model; ``empirical`` is a finite-N ratio kept as a diagnostic.
    """
    value: Optional[float]
    empirical: Optional[float] = None
    at_N: Optional[int] = None

    @property
    def available(self):
        return self.value is not None

    @property
    def source(self):
        if self.value is not None:
            return "analytic"
        return "empirical" if self.empirical is not None else "unavailable"

    def best(self):
        """Analytic value if known, else the empirical diagnostic."""
        return self.value if self.value is not None else self.empirical


@dataclass(frozen=True)
class WeightSequence:
    """Kernel spectrum.

    ``power_law``: w(k) = scale * max(frequency(k), 1) ** theta, so the
    cosine and sine of one frequency share a weight.  ``identity`` is w = 1
    (the regression case R = delta).  ``explicit`` takes a finite list.
    """
    model: str = "identity"
    theta: float = 0.0
    scale: float = 1.0
    explicit_values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError("kernel.model", f"unknown kernel model {self.model!r}")
        if self.model == "power_law":
            if not np.isfinite(self.theta) or self.theta < 0:
                raise ConfigError("kernel.theta", f"theta must be >= 0, got {self.theta!r}")
            if not np.isfinite(self.scale) or self.scale <= 0:
                raise ConfigError("kernel.scale", f"scale must be > 0, got {self.scale!r}")
        elif self.model == "explicit":
            v = np.asarray(self.explicit_values, dtype=np.float64)
            if v.ndim != 1 or v.size == 0:
                raise ConfigError("kernel.values", "explicit weights need a non-empty list")
            if not np.all(np.isfinite(v)) or np.min(np.abs(v)) <= 0:
                raise ConfigError("kernel.values", "explicit weights must be finite with inf |w(k)| > 0")
            object.__setattr__(self, "explicit_values", tuple(float(x) for x in v))

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def power_law(cls, theta, scale=1.0):
        return cls("power_law", float(theta), float(scale))

    @classmethod
    def explicit(cls, values):
        return cls("explicit", explicit_values=tuple(values))

    @property
    def is_identity(self):
        if self.model == "identity":
            return True
        if self.model == "power_law":
            return self.theta == 0 and self.scale == 1.0
        return all(v == 1.0 for v in self.explicit_values)

    @property
    def degree(self):
        """Ill-posedness exponent theta (None for explicit lists)."""
        if self.model == "identity":
            return 0.0
        if self.model == "power_law":
            return self.theta
        return None

    @property
    def length(self):
        """Number of available entries (``None`` means unbounded)."""
        return len(self.explicit_values) if self.model == "explicit" else None

    def values(self, L):
        """Array (w(1), ..., w(L))."""
        L = int(L)
        if self.model == "identity":
            return np.ones(L)
        if self.model == "power_law":
            if self.theta == 0:
                return np.full(L, self.scale)
            f = np.maximum(np.arange(1, L + 1) // 2, 1).astype(np.float64)
            return self.scale * f ** self.theta
        if L > len(self.explicit_values):
            raise RangeError(
                f"explicit kernel has {len(self.explicit_values)} weights, {L} requested")
        return np.asarray(self.explicit_values[:L])

    def __call__(self, k):
        if int(k) != k or k < 1:
            raise DomainError("basis index k must be >= 1")
        return float(self.values(int(k))[-1])

    def squared(self):
        """The sequence w(k)^2, e.g. for ||f||_B(w) via g-coefficients."""
        if self.model == "identity":
            return self
        if self.model == "power_law":
            return WeightSequence.power_law(2 * self.theta, self.scale ** 2)
        return WeightSequence.explicit([v * v for v in self.explicit_values])

    def require(self, L, what="this run"):
        """Fail fast when an explicit list cannot cover ``L`` indices."""
        if self.length is not None and self.length < L:
            raise ModelError(
                f"explicit kernel supplies {self.length} weights but {what} needs {L}")

    def to_config(self):
        if self.model == "explicit":
            return {"model": "explicit", "values": list(self.explicit_values)}
        if self.model == "power_law":
            return {"model": "power_law", "theta": self.theta, "scale": self.scale}
        return {"model": "identity"}

    @classmethod
    def from_config(cls, block):
        if not isinstance(block, dict):
            raise ConfigError("kernel", "expected an object")
        model = block.get("model", "identity")
        if model == "power_law":
            for key in ("theta",):
                if key not in block:
                    raise ConfigError(f"kernel.{key}", "missing")
            return cls.power_law(_num(block, "kernel", "theta"),
                                 _num(block, "kernel", "scale", 1.0))
        if model == "explicit":
            if "values" not in block:
                raise ConfigError("kernel.values", "missing")
            return cls.explicit(block["values"])
        if model == "identity":
            return cls.identity()
        raise ConfigError("kernel.model", f"unknown kernel model {model!r}")


def _num(block, prefix, key, default=None):
    if key not in block:
        if default is None:
            raise ConfigError(f"{prefix}.{key}", "missing")
        return float(default)
    v = block[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{prefix}.{key}", f"expected a number, got {v!r}")
    return float(v)


def S(weights, N):
    """S(N) = sum_{k<=N} w(k)^2."""
    if N < 1:
        raise DomainError("N must be >= 1")
    w = weights.values(N)
    return float(np.sum(w * w))


def S2(weights, N):
    """S2(N) = sum_{k=N+1}^{2N} w(k)^4."""
    if N < 1:
        raise DomainError("N must be >= 1")
    w = weights.values(2 * N)[N:]
    return float(np.sum(w ** 4))


def cumulative_S(weights, L):
    """Array (S(1), ..., S(L))."""
    w = weights.values(L)
    return np.cumsum(w * w)


def Gamma_limit(weights):
    """Gamma = lim S(2N)/S(N): 2**(2 theta + 1) for power laws.

    Explicit lists have no limit; the ratio at the largest N the list
    supports is attached as a diagnostic.
    """
    theta = weights.degree
    if theta is not None:
        return LimitRatio(2.0 ** (2 * theta + 1))
    N = weights.length // 2
    if N < 1:
        return LimitRatio(None)
    return LimitRatio(None, S(weights, 2 * N) / S(weights, N), N)


@dataclass(frozen=True)
class ModularNorm:
    p: float
    weight: WeightSequence

    def __post_init__(self):
        if not (self.p > 1 and np.isfinite(self.p)):
            raise DomainError(f"modular exponent p must lie in (1, inf), got {self.p!r}")


def modular_norm_sq(coeffs, norm):
    """(sum_k w(k)^p |coeffs(k)|^p) ** (2/p).

    For p = 2 this is sum w^2 c^2.  Passing g-coefficients with weight w^2
    gives ||f||^2 in B(w), i.e. sum c^2 w^4.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    w = norm.weight.values(coeffs.size)
    s = float(np.sum((w * np.abs(coeffs)) ** norm.p))
    return s if norm.p == 2 else s ** (2.0 / norm.p)
