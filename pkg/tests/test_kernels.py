import numpy as np
import pytest

from spectral_cutoff import _kernels
from spectral_cutoff._kernels import _fallback


def _impls():
    out = [("python", _fallback)]
    if _kernels.compiled_available():
        from spectral_cutoff._kernels import _core
        out.append(("cython", _core))
    return out


IMPLS = _impls()


def test_compiled_core_built():
    # the extension is part of the build; the fallback still covers its absence
    assert _kernels.compiled_available()
    assert _kernels.BACKEND == "cython"


@pytest.mark.parametrize("n,L", [(16, 5), (97, 64), (1024, 682), (4096, 100)])
def test_direct_coefficients_agree(rng, n, L):
    y = np.ascontiguousarray(rng.standard_normal(n))
    ref = _fallback.direct_coefficients(y, L)
    for name, impl in IMPLS:
        np.testing.assert_allclose(impl.direct_coefficients(y, L), ref, atol=1e-12, err_msg=name)
    fft = np.fft.rfft(np.roll(y, 1))
    assert abs(ref[0] - fft[0].real / n) < 1e-12


def test_block_sums_agree(rng):
    e = np.ascontiguousarray(rng.random(300))
    ref = np.array([e[N:2 * N].sum() for N in range(1, 151)])
    for name, impl in IMPLS:
        np.testing.assert_allclose(impl.block_sums(e, 150), ref, rtol=1e-12, err_msg=name)


@pytest.mark.parametrize("curve,expect", [([3.0, 1.0, 1.0, 2.0], 1), ([0.0, 0.0], 0),
                                          ([5.0, 3.0 + 1e-13, 3.0], 1),
                                          ([5.0, 3.0 + 1e-9, 3.0], 2)])
def test_argmin_first(curve, expect):
    c = np.ascontiguousarray(curve, dtype=float)
    for name, impl in IMPLS:
        assert impl.argmin_first(c, 1e-12) == expect, name
