"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel is timed on inputs typical of the cat models (dimension 4) and
of larger synthetic models. The first numba call (compilation, or cache
load) is excluded from timing.
"""

import argparse
import time

import numpy as np

from gramqfi import _kernels_numba as nb
from gramqfi import _kernels_numpy as npk
from gramqfi.validation import random_synthetic_model


def timeit(fn, args, repeat):
    fn(*args)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def cases(dim, rng):
    m, _ = random_synthetic_model(rng, dim, max(1, dim // 2), 3)
    SR, RS = m.S @ m.R, m.R @ m.S
    K = npk.kron_sylvester(SR, RS)
    rhs = (2 * m.D[0]).reshape(-1)
    Ls = np.ascontiguousarray(np.stack(m.D))
    p, V = np.linalg.eigh(m.R)
    dmus = np.ascontiguousarray(np.stack([V.conj().T @ d @ V for d in m.D]))
    return {
        "kron_sylvester": (SR, RS),
        "minnorm_lstsq": (K, rhs, 1e-10),
        "trace_chain_table": (m.R, m.S, Ls),
        "eigen_qfi_table": (np.ascontiguousarray(p), dmus, 1e-12),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=2000)
    ap.add_argument("--dims", default="4,6,8")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'dim':>4}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for dim in (int(d) for d in args.dims.split(",")):
        for name, call_args in cases(dim, rng).items():
            reps = max(10, args.repeat // (dim * dim // 16))
            t_np = timeit(getattr(npk, name), call_args, reps)
            t_nb = timeit(getattr(nb, name), call_args, reps)
            print(f"{name:<20}{dim:>4}{t_np * 1e6:>14.2f}{t_nb * 1e6:>14.2f}{t_np / t_nb:>10.2f}")


if __name__ == "__main__":
    main()
