"""Compare the compiled and numpy energy-statistic kernels.

    python benchmarks/bench_kernels.py --k 1 2 4 --batch 4096
"""
import argparse
import math
import time

import numpy as np

from usbc.codebook import build_codebook, generate_reader_code
from usbc.kernels import compiled_energy_statistics, energy_statistics, python_energy_statistics
from usbc.tagphy import FrameGrid, make_monocycle


def make_inputs(k, batch, seed=0):
    rng = np.random.default_rng(seed)
    book = build_codebook(None, k)
    pulse = make_monocycle(FrameGrid.from_product(book.n_f)).samples
    return (
        book.codewords.astype(float),
        generate_reader_code(book.n_f, seed).elements.astype(float),
        rng.integers(0, book.n_bc, batch),
        rng.gamma(1.0, 1.0, batch)[:, None] * pulse[None, :],
        rng.gamma(1.0, 1.0, batch),
        pulse,
        rng.standard_normal((batch, book.n_f, pulse.size)),
        math.sqrt(0.5),
    )


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--batch", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    impls = {"python": python_energy_statistics}
    if compiled_energy_statistics is not None:
        impls["cython"] = compiled_energy_statistics
    else:
        print("compiled extension not built; timing the numpy kernel only")

    print(f"{'k':>2} {'impl':>7} {'seconds':>9} {'symbols/s':>11} {'speedup':>8}")
    for k in args.k:
        inputs = make_inputs(k, args.batch)
        ref = energy_statistics(*inputs, impl=python_energy_statistics)
        base = None
        for name, impl in impls.items():
            out = energy_statistics(*inputs, impl=impl)
            np.testing.assert_allclose(out, ref, rtol=1e-10, atol=1e-9)
            t = best_time(lambda: energy_statistics(*inputs, impl=impl), args.repeat)
            base = base or t
            print(f"{k:>2} {name:>7} {t:>9.4f} {args.batch / t:>11.0f} {base / t:>7.2f}x")


if __name__ == "__main__":
    main()
