"""Energy estimation and confidence regions.

Gaussian quantiles come from ``scipy.special.ndtri`` (exact inverse of the
normal CDF to double precision).
"""
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri

from .basis import raw_coefficients
from .errors import DomainError, PreconditionError
from .simulate import estimate_sigma

ROUGH_FACTOR = 1.05
# tail-bound constant C in P(xi > Q u) <= exp(-C u^r); fixed, conservative
TAIL_C = 0.5


def z_quantile(level):
    """Two-sided standard normal multiplier z_{(1+level)/2}."""
    if not 0 < level < 1:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    return float(ndtri(0.5 * (1.0 + level)))


@dataclass(frozen=True)
class EnergyEstimate:
    H_hat: float
    M_used: int
    anti_penalty: float
    sigma_used: float
    B_norm_sq_hat: float
    n: int
    identity_kernel: bool = False

    def to_json(self):
        return asdict(self)


@dataclass(frozen=True)
class ConfidenceRegion:
    kind: str
    level: Optional[float]
    lower: float
    upper: float
    pivot_law: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError("lower bound exceeds upper bound")
        if self.level is not None and not 0 < self.level < 1:
            raise DomainError("level must lie in (0, 1)")

    def contains(self, x):
        return self.lower <= x <= self.upper

    @property
    def half_width(self):
        return 0.5 * (self.upper - self.lower)

    def to_json(self):
        return {"kind": self.kind, "level": self.level, "lower": self.lower,
                "upper": self.upper, "pivot_law": self.pivot_law,
                "diagnostics": dict(self.diagnostics)}


def energy_estimate(obs, weights, selection, sigma=None, method="direct", coeffs=None):
    """H(n, f) = sum_{k<=M} c(k,n)^2 w(k)^2 - sigma^2 S(M)/n with M = selection.M.

    The subtracted anti-penalty removes the noise contribution to the
    squared coefficients.  The B(w) norm used for interval widths is
    estimated the same way with w^4.  H_hat is reported raw and may be
    negative for small n.
    """
    M = selection.M
    if sigma is None:
        sigma = selection.sigma_used if selection.sigma_used is not None else estimate_sigma(obs)
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    c = raw_coefficients(obs, M, method) if coeffs is None else np.asarray(coeffs)[:M]
    w2 = weights.values(M) ** 2
    n = obs.n
    anti = sigma ** 2 * float(np.sum(w2)) / n
    H = float(np.sum(c * c * w2)) - anti
    B = float(np.sum(c * c * w2 * w2)) - sigma ** 2 * float(np.sum(w2 * w2)) / n
    return EnergyEstimate(H, M, anti, float(sigma), B, n, weights.is_identity)


def _xi_scale(selection, sigma, scale):
    n = selection.n
    if scale == "sigma":
        s = sigma
    elif scale == "sigma2":
        s = sigma ** 2
    else:
        raise ValueError(f"unknown xi scale {scale!r}")
    return s * math.sqrt(2.0 * selection.M / n)


def function_ci(selection, sigma, level=0.95, scale="sigma"):
    """Two-sided interval for ||f_tilde - f||^2: tau1* +- z sigma sqrt(2 M1 / n).

    ``scale="sigma2"`` replaces sigma by sigma^2 in the pivot normalisation
    (kept for comparison; the default follows the stated representation).
    The lower end is clamped at 0.
    """
    if not selection.penalized:
        raise DomainError("function_ci needs the penalized selection (M1, tau1*)")
    if sigma < 0:
        raise DomainError("sigma must be >= 0")
    z = z_quantile(level)
    s = _xi_scale(selection, sigma, scale)
    centre = selection.tau_star
    return ConfidenceRegion(
        "function_l2", level, max(0.0, centre - z * s), centre + z * s,
        "asymptotic_gaussian",
        {"tau_star": centre, "M1": selection.M, "xi_scale": s, "scale": scale, "z": z})


def function_ci_rough(selection, gamma_plus, level=None):
    """One-sided region [0, 1.05 tau* / (1 - gamma_plus)^2] for ||f_hat - f||^2.

    Needs the upper tail ratio gamma_plus, which is known only when the
    signal class is; ``level`` is accepted for interface symmetry and unused.
    """
    if selection.variant != "plain":
        raise DomainError("function_ci_rough is stated for the plain selection M(n)")
    if not 0 < gamma_plus < 1:
        raise DomainError(f"gamma_plus must lie in (0, 1), got {gamma_plus!r}")
    upper = ROUGH_FACTOR * selection.tau_star / (1.0 - gamma_plus) ** 2
    return ConfidenceRegion("function_l2", None, 0.0, upper, "asymptotic_gaussian",
                            {"tau_star": selection.tau_star, "M": selection.M,
                             "gamma_plus": gamma_plus, "rough": True})


def tail_exponent(q):
    """r(q) = min(q/2, 2)."""
    return min(q / 2.0, 2.0)


def function_ci_tail(selection, sigma, noise, level=0.95):
    """Non-asymptotic interval from the exponential tail bound on xi.

    With P(|xi| > Q u) <= 2 exp(-u^r / 2) the half-width is
    sigma sqrt(2 M1/n) Q (2 log(2/(1-level)))^(1/r).
    """
    params = noise.tail_params()
    if params is None:
        raise DomainError(f"noise family {noise.family!r} declares no (q, Q) tail bound")
    if not 0 < level < 1:
        raise DomainError("level must lie in (0, 1)")
    if selection.n < 16:
        raise DomainError("n must be >= 16")
    q, Q = params
    r = tail_exponent(q)
    u = (math.log(2.0 / (1.0 - level)) / TAIL_C) ** (1.0 / r)
    half = _xi_scale(selection, sigma, "sigma") * Q * u
    centre = selection.tau_star
    return ConfidenceRegion(
        "function_l2", level, max(0.0, centre - half), centre + half,
        f"tail_bound(q={q:g},Q={Q:g},r={r:g})",
        {"tau_star": centre, "M1": selection.M, "u": u, "C": TAIL_C})


def energy_ci(est, sigma, n, level=0.95):
    """H_hat +- z 2 sigma sqrt(B_hat) / sqrt(n), with B_hat clamped at 0."""
    z = z_quantile(level)
    B = max(est.B_norm_sq_hat, 0.0)
    half = z * 2.0 * sigma * math.sqrt(B) / math.sqrt(n)
    return ConfidenceRegion("energy", level, est.H_hat - half, est.H_hat + half,
                            "asymptotic_gaussian",
                            {"H_hat": est.H_hat, "B_norm_sq_hat": B, "M": est.M_used})


def energy_ci_fisher(est, sigma, n, level=0.95):
    """Interval from the square-root transform sqrt(n)(sqrt(H_hat) - sqrt(H))/sigma.

    Only valid for the identity kernel (w = 1), where ||f||_B(w) = H(f).
    """
    if not est.identity_kernel:
        raise DomainError("the square-root pivot holds only for the identity kernel (w = 1)")
    if est.H_hat <= 0:
        raise PreconditionError(
            f"H_hat = {est.H_hat:.3g} <= 0; the square-root transform needs more data (larger n)")
    z = z_quantile(level)
    root = math.sqrt(est.H_hat)
    d = z * sigma / math.sqrt(n)
    return ConfidenceRegion("energy_fisher", level, max(root - d, 0.0) ** 2, (root + d) ** 2,
                            "asymptotic_gaussian", {"H_hat": est.H_hat, "M": est.M_used})


def fisher_statistic(H_hat, H, sigma, n):
    """sqrt(n) (sqrt(H_hat_+) - sqrt(H)) / sigma."""
    return math.sqrt(n) * (math.sqrt(max(H_hat, 0.0)) - math.sqrt(H)) / sigma
