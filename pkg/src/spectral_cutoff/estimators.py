"""Projection estimates of f and data-driven choices of the cutoff.

All cutoff rules minimise a dyadic block statistic

    tau(N, n) = sum_{k=N+1}^{2N} w(k)^2 c(k, n)^2

(or a variant of it) by exhaustive scan over N = 1..N+, breaking ties
towards the smallest N.  Curves are not assumed unimodal.
"""
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .basis import design_matrix, raw_coefficients
from .errors import DomainError, PreconditionError, RangeError
from .signal import N_plus, tail_array
from .simulate import estimate_sigma
from .spectrum import Gamma_limit, cumulative_S

# curve values within this fraction of max|curve| of the minimum count as ties
TIE_RTOL = 1e-12
GAMMA_CLAMP = (0.0, 0.99)


@dataclass(frozen=True)
class AdaptiveSelection:
    variant: str
    tau_curve: np.ndarray
    M: int
    tau_star: float
    N_plus: int
    n: int = 0
    plain_curve: Optional[np.ndarray] = None
    gamma_hat: Optional[float] = None
    gamma_used: Optional[float] = None
    gamma_clamped: bool = False
    G: Optional[int] = None
    Gamma: Optional[float] = None
    penalty_coefficient: Optional[float] = None
    clamped: bool = False
    sigma_used: Optional[float] = None
    sigma_origin: Optional[str] = None
    p: float = 2.0

    @property
    def penalized(self):
        return self.variant == "penalized"

    def summary(self):
        return {
            "variant": self.variant, "M": self.M, "tau_star": self.tau_star,
            "N_plus": self.N_plus, "n": self.n, "gamma_hat": self.gamma_hat,
            "gamma_used": self.gamma_used, "gamma_clamped": self.gamma_clamped,
            "G": self.G, "Gamma": self.Gamma,
            "penalty_coefficient": self.penalty_coefficient, "clamped": self.clamped,
            "sigma_used": self.sigma_used, "sigma_origin": self.sigma_origin, "p": self.p,
        }


@dataclass(frozen=True)
class EstimateReport:
    """Truncated estimate f(N, n, t) = sum_{k<=N} c(k,n) w(k) phi_k(t)."""
    coefficients: np.ndarray
    selection: Optional[AdaptiveSelection] = None
    sigma_used: Optional[float] = None
    sigma_origin: Optional[str] = None
    extra: dict = field(default_factory=dict)

    @property
    def M(self):
        return self.coefficients.size

    def __call__(self, t):
        scalar = np.ndim(t) == 0
        out = design_matrix(t, self.M) @ self.coefficients
        return float(out[0]) if scalar else out

    def risk(self, sig, weights):
        """Exact ||f_hat - f||^2 against a known signal (Parseval + analytic tail)."""
        return spectral_risk(self.coefficients, sig, weights)


def spectral_risk(f_coeffs, sig, weights, tails=None):
    """sum_{k<=M} (f_coeffs(k) - c(k) w(k))^2 + rho(M)."""
    f_coeffs = np.asarray(f_coeffs, dtype=np.float64)
    M = f_coeffs.size
    truth = sig.coefficients(M) * weights.values(M)
    tail = tails[M] if tails is not None else tail_array(sig, weights, M)[M]
    d = f_coeffs - truth
    return float(d @ d) + float(tail)


def _coefficients(obs, L, method, coeffs):
    if coeffs is not None:
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.size < L:
            raise RangeError(f"precomputed coefficients cover {coeffs.size} indices, {L} needed")
        return coeffs[:L]
    return raw_coefficients(obs, L, method=method)


def _block_energy(obs, weights, L, method, coeffs, p=2.0):
    c = _coefficients(obs, L, method, coeffs)
    w = np.abs(weights.values(L))
    if p == 2.0:
        return (w * c) ** 2
    return (w * np.abs(c)) ** p


def projection_estimate(obs, weights, N, method="direct", coeffs=None):
    """Projection (truncated series) estimate of f at a fixed cutoff N."""
    cap = obs.n // 3
    if not 1 <= N <= cap:
        raise RangeError(f"truncation N = {N} outside [1, floor(n/3) = {cap}]")
    c = _coefficients(obs, N, method, coeffs)
    return EstimateReport(c * weights.values(N))


def tau(obs, weights, N, method="direct", coeffs=None):
    """tau(N, n) = sum_{k=N+1}^{2N} w(k)^2 c(k,n)^2."""
    if N < 1:
        raise DomainError("N must be >= 1")
    cap = (2 * obs.n) // 3
    if 2 * N > cap:
        raise RangeError(f"tau({N}) needs indices up to {2 * N} > floor(2n/3) = {cap}")
    e = _block_energy(obs, weights, 2 * N, method, coeffs)
    return float(np.sum(e[N:]))


def tau_curve(obs, weights, nmax, method="direct", coeffs=None, p=2.0):
    """Array (tau(1), ..., tau(nmax)) of dyadic block sums of w^p |c|^p."""
    e = _block_energy(obs, weights, 2 * nmax, method, coeffs, p)
    return _kernels.block_sums(np.ascontiguousarray(e), int(nmax))


def _pick(curve):
    i = _kernels.argmin_first(np.ascontiguousarray(curve, dtype=np.float64), TIE_RTOL)
    return i + 1, float(curve[i])


def _search_range(obs, weights):
    Np = N_plus(obs.n, weights)
    weights.require(2 * Np, "the truncation search")
    return Np


def select_adaptive(obs, weights, method="direct", coeffs=None):
    """M(n) = argmin_{1<=N<=N+} tau(N, n)."""
    Np = _search_range(obs, weights)
    curve = tau_curve(obs, weights, Np, method, coeffs)
    M, ts = _pick(curve)
    return AdaptiveSelection("plain", curve, M, ts, Np, obs.n, plain_curve=curve)


def gamma_block(n):
    """G(n) = Ent(exp(sqrt(log n)))."""
    return int(math.exp(math.sqrt(math.log(n))))


def estimate_gamma(obs, weights, method="direct", coeffs=None):
    """Plug-in tail ratio (tau(4G) - 2 tau(2G)) / (tau(2G) - 2 tau(G)).

    Returns ``(gamma_hat, G)``; ``gamma_hat`` is the raw ratio (nan for 0/0).
    """
    n = obs.n
    G = gamma_block(n)
    cap = (2 * n) // 3
    if 8 * G > cap:
        raise PreconditionError(
            f"n too small for gamma plug-in: G(n) = {G} needs coefficients up to 8G = {8 * G} "
            f"but only floor(2n/3) = {cap} are estimable (n = {n})")
    weights.require(8 * G, "the gamma plug-in")
    e = _block_energy(obs, weights, 8 * G, method, coeffs)
    t1, t2, t4 = (float(np.sum(e[N:2 * N])) for N in (G, 2 * G, 4 * G))
    num = t4 - 2.0 * t2
    den = t2 - 2.0 * t1
    if den == 0.0:
        return (math.nan if num == 0.0 else math.copysign(math.inf, num)), G
    return num / den, G


def select_penalized(obs, weights, Gamma=None, sigma=None, gamma_override=None,
                     penalty_override=None, method="direct", coeffs=None):
    """M1(n) = argmin tau1(N, n), tau1 = tau + (2 - gamma(n) - Gamma) sigma^2 S(N)/n.

    The plug-in gamma(n) is clamped into [0, 0.99]; a negative penalty
    coefficient is clamped to 0 (``clamped`` flag) unless
    ``penalty_override`` fixes the coefficient outright.  ``sigma=None``
    falls back to the RSS estimate.
    """
    Np = _search_range(obs, weights)
    if Gamma is None:
        Gamma = Gamma_limit(weights).best()
        if Gamma is None:
            raise PreconditionError("Gamma is unavailable for this kernel; pass it explicitly")
    if sigma is None:
        sigma_used, origin = estimate_sigma(obs), "RSS"
    else:
        if sigma < 0:
            raise DomainError("sigma must be >= 0")
        sigma_used, origin = float(sigma), "known"

    gamma_hat = gamma_used = G = None
    gamma_clamped = clamped = False
    if penalty_override is not None:
        coef = float(penalty_override)
    else:
        if gamma_override is not None:
            gamma_hat = float(gamma_override)
        else:
            need = max(2 * Np, 8 * gamma_block(obs.n))
            if coeffs is None and 8 * gamma_block(obs.n) <= (2 * obs.n) // 3:
                coeffs = raw_coefficients(obs, need, method=method)
            gamma_hat, G = estimate_gamma(obs, weights, method, coeffs)
        lo, hi = GAMMA_CLAMP
        gamma_used = 0.0 if not math.isfinite(gamma_hat) else min(max(gamma_hat, lo), hi)
        gamma_clamped = gamma_used != gamma_hat
        coef = 2.0 - gamma_used - Gamma
        if coef < 0:
            coef, clamped = 0.0, True

    base = tau_curve(obs, weights, Np, method, coeffs)
    curve = base + coef * sigma_used ** 2 * cumulative_S(weights, Np) / obs.n
    M, ts = _pick(curve)
    return AdaptiveSelection(
        "penalized", curve, M, ts, Np, obs.n, plain_curve=base, gamma_hat=gamma_hat,
        gamma_used=gamma_used, gamma_clamped=gamma_clamped, G=G, Gamma=float(Gamma),
        penalty_coefficient=coef, clamped=clamped, sigma_used=sigma_used,
        sigma_origin=origin)


def select_adaptive_p(obs, weights, p, method="direct", coeffs=None):
    """argmin over N in [1, Ent(N+^(1/p))] of sum_{k=N+1}^{2N} w^p |c(k,n)|^p."""
    if not (p > 1 and math.isfinite(p)):
        raise DomainError(f"p must lie in (1, inf), got {p!r}")
    Np = _search_range(obs, weights)
    top = max(1, int(Np ** (1.0 / p)))
    curve = tau_curve(obs, weights, top, method, coeffs, p=p)
    M, ts = _pick(curve)
    return AdaptiveSelection(f"p={p:g}", curve, M, ts, top, obs.n, p=float(p))


def select_unweighted(obs, method="direct", coeffs=None):
    """N1(n) = argmin_{1<=N<=floor(n/3)} sum_{k=N+1}^{2N} c(k,n)^2 (the g-first rule)."""
    top = obs.n // 3
    c = _coefficients(obs, 2 * top, method, coeffs)
    curve = _kernels.block_sums(np.ascontiguousarray(c * c), top)
    M, ts = _pick(curve)
    return AdaptiveSelection("unweighted", curve, M, ts, top, obs.n, plain_curve=curve)


def adaptive_estimate(obs, weights, variant="plain", method="direct", coeffs=None, **kw):
    """Select a cutoff by ``variant`` and return the resulting estimate of f."""
    if variant == "plain":
        sel = select_adaptive(obs, weights, method, coeffs)
    elif variant == "penalized":
        sel = select_penalized(obs, weights, method=method, coeffs=coeffs, **kw)
    elif variant == "plug_in":
        sel = select_unweighted(obs, method, coeffs)
    elif variant.startswith("p="):
        sel = select_adaptive_p(obs, weights, float(variant[2:]), method, coeffs)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    c = _coefficients(obs, sel.M, method, coeffs)
    return EstimateReport(c * weights.values(sel.M), sel, sel.sigma_used, sel.sigma_origin)


@dataclass(frozen=True)
class PlugInComparison:
    M: int
    N1: int
    f_hat_risk: Optional[float]
    f1_risk: Optional[float]


def plug_in_comparison(obs, weights, signal=None, method="direct", coeffs=None):
    """Compare f_hat (weighted rule M(n)) with f1_hat (cutoff N1(n) chosen for g).

    Risks are filled in only when the true ``signal`` is supplied.
    """
    Np = _search_range(obs, weights)
    top = obs.n // 3
    c = _coefficients(obs, max(2 * top, 2 * Np), method, coeffs)
    sel = select_adaptive(obs, weights, coeffs=c)
    sel1 = select_unweighted(obs, coeffs=c)
    r_hat = r1 = None
    if signal is not None:
        L = max(sel.M, sel1.M)
        tails = tail_array(signal, weights, L)
        w = weights.values(L)
        r_hat = spectral_risk(c[:sel.M] * w[:sel.M], signal, weights, tails)
        r1 = spectral_risk(c[:sel1.M] * w[:sel1.M], signal, weights, tails)
    return PlugInComparison(sel.M, sel1.M, r_hat, r1)
