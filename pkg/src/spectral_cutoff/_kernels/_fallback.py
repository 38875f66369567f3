"""Pure numpy versions of the compiled kernels (same contracts)."""
import numpy as np

_CHUNK = 1 << 22  # entries of the (n, frequencies) index block per pass


def direct_coefficients(y, L):
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = y.shape[0]
    out = np.zeros(L)
    if L < 1:
        return out
    out[0] = y.sum() / n
    mmax = L // 2
    if mmax == 0:
        return out
    j = np.arange(n)
    ct = np.cos(2.0 * np.pi * j / n)
    st = np.sin(2.0 * np.pi * j / n)
    i = np.arange(1, n + 1, dtype=np.int64)
    step = max(1, _CHUNK // n)
    root2 = np.sqrt(2.0)
    for m0 in range(1, mmax + 1, step):
        m = np.arange(m0, min(mmax, m0 + step - 1) + 1, dtype=np.int64)
        idx = np.outer(i, m) % n
        cc = root2 * (y @ ct[idx]) / n
        ss = root2 * (y @ st[idx]) / n
        out[2 * m - 1] = cc
        keep = 2 * m < L
        out[2 * m[keep]] = ss[keep]
    return out


def block_sums(energy, nmax):
    energy = np.asarray(energy, dtype=np.float64)
    if 2 * nmax > energy.shape[0]:
        raise ValueError("energy vector shorter than 2*nmax")
    cs = np.concatenate(([0.0], np.cumsum(energy)))
    N = np.arange(1, nmax + 1)
    return cs[2 * N] - cs[N]


def argmin_first(curve, rtol):
    curve = np.asarray(curve, dtype=np.float64)
    if curve.size == 0:
        raise ValueError("empty curve")
    lo = curve.min()
    scale = np.abs(curve).max()
    return int(np.flatnonzero(curve <= lo + rtol * scale)[0])
