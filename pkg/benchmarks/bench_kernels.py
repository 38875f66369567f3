"""Timing of the compiled kernels against the numpy fallback and the FFT path.

    python3 benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from spectral_cutoff import _kernels
from spectral_cutoff._kernels import _fallback
from spectral_cutoff.basis import UniformGrid, raw_coefficients
from spectral_cutoff.simulate import ObservationSet


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1024, 4096, 16384, 65536])
    args = ap.parse_args(argv)
    try:
        from spectral_cutoff._kernels import _core
    except ImportError:
        _core = None
        print("compiled core not built; timing the fallback only")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>7}{'L':>6}{'cython ms':>12}{'numpy ms':>12}{'fft ms':>10}")
    for n in args.sizes:
        y = rng.standard_normal(n)
        # cutoff searches touch about 2 N+ coefficients, far below 2n/3
        L = min((2 * n) // 3, 256)
        obs = ObservationSet(UniformGrid(n), y)
        py = best(lambda: _fallback.direct_coefficients(y, L), args.repeat)
        cy = best(lambda: _core.direct_coefficients(y, L), args.repeat) if _core else float("nan")
        ft = best(lambda: raw_coefficients(obs, L, method="fft"), args.repeat)
        if _core:
            assert np.allclose(_core.direct_coefficients(y, L),
                               _fallback.direct_coefficients(y, L), atol=1e-10)
        print(f"{'direct_coefficients':<22}{n:>7}{L:>6}{cy * 1e3:>12.3f}{py * 1e3:>12.3f}{ft * 1e3:>10.3f}", flush=True)

        e = rng.random(L)
        nmax = L // 2
        py = best(lambda: _fallback.block_sums(e, nmax), args.repeat)
        cy = best(lambda: _core.block_sums(e, nmax), args.repeat) if _core else float("nan")
        print(f"{'block_sums':<22}{n:>7}{nmax:>6}{cy * 1e3:>12.3f}{py * 1e3:>12.3f}{'':>10}")

        py = best(lambda: _fallback.argmin_first(e, 1e-12), args.repeat)
        cy = best(lambda: _core.argmin_first(e, 1e-12), args.repeat) if _core else float("nan")
        print(f"{'argmin_first':<22}{n:>7}{L:>6}{cy * 1e3:>12.3f}{py * 1e3:>12.3f}{'':>10}")
    print(f"active backend: {_kernels.BACKEND}")


if __name__ == "__main__":
    main()
