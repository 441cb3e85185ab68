"""Compare the compiled and numpy kernel backends on gossip-sized inputs.

    python benchmarks/bench_kernels.py [--n 5000] [--d 16] [--repeat 50]
"""

import argparse
import timeit

import numpy as np

from finitemix import _pykernels
from finitemix.builders import base_graph, exponential, ring

try:
    from finitemix import _ckernels
except ImportError:
    _ckernels = None


def bench(label, fn, repeat):
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    print(f"  {label:<10} {best * 1e6:10.1f} us")
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--d", type=int, default=16)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is timed")
    y = np.ascontiguousarray(np.random.default_rng(0).standard_normal((args.n, args.d)))
    graphs = {"ring": ring(args.n), "exp": exponential(args.n), "base:k=3": base_graph(args.n, 3)}
    for name, seq in graphs.items():
        w = seq.mixing_matrices[0]
        print(f"csr_mix {name} (n={args.n}, d={args.d}, nnz={len(w.data)})")
        t_py = bench("numpy", lambda: _pykernels.csr_mix(w.indptr, w.indices, w.data, y), args.repeat)
        if _ckernels is not None:
            t_c = bench("cython", lambda: _ckernels.csr_mix(w.indptr, w.indices, w.data, y), args.repeat)
            print(f"  speedup    {t_py / t_c:10.2f}x")
    print(f"consensus_error (n={args.n}, d={args.d})")
    t_py = bench("numpy", lambda: _pykernels.consensus_error(y), args.repeat)
    if _ckernels is not None:
        t_c = bench("cython", lambda: _ckernels.consensus_error(y), args.repeat)
        print(f"  speedup    {t_py / t_c:10.2f}x")


if __name__ == "__main__":
    main()
