"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat R]

Both paths are checked for agreement before timing.  The first numba call
(JIT compile, or a cache load) is reported separately.
"""
import argparse
import time

import numpy as np

from crystalflex import _kernels, gallery, supercell
from crystalflex.flexes import _edge_arrays
from crystalflex.transfer import transfer_function


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def eval_case(name, reps, samples):
    fw = supercell(gallery(name), reps)
    tf = transfer_function(fw)
    rows, cols, coef, exps = tf._terms
    rng = np.random.default_rng(0)
    z = np.exp(2j * np.pi * rng.uniform(size=(samples, fw.d)))
    label = f"eval_terms {name}x{'x'.join(map(str, reps))} ({tf.shape[0]}x{tf.shape[1]}, {samples} pts)"
    return label, (lambda impl: impl(z, rows, cols, coef, exps, tf.shape))


def residual_case(name, size):
    fw = gallery(name)
    rng = np.random.default_rng(1)
    vals = rng.normal(size=(size,) * fw.d + (fw.d * fw.n,)).astype(complex)
    args = _edge_arrays(fw)
    label = f"edge_residuals {name} ({size}^{fw.d} window)"
    return label, (lambda impl: impl(vals, *args, fw.d))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    cases = [
        eval_case("kagome_rational", (1, 1), 4096),
        eval_case("kagome_rational", (3, 3), 1024),
        eval_case("doubled3d", (2, 2, 2), 2000),
        residual_case("diag_grid", 64),
        residual_case("kagome_rational", 200),
        residual_case("doubled3d", 24),
    ]
    impls = {
        "eval_terms": (_kernels.eval_terms_numpy, _kernels.eval_terms_numba),
        "edge_residuals": (_kernels.edge_residuals_numpy, _kernels.edge_residuals_numba),
    }
    print(f"{'case':62s} {'numpy':>9s} {'numba':>9s} {'speedup':>8s} {'first':>8s}")
    for label, call in cases:
        np_impl, nb_impl = impls[label.split()[0]]
        t0 = time.perf_counter()
        b = call(nb_impl)
        first = time.perf_counter() - t0
        a = call(np_impl)
        assert np.allclose(np.nan_to_num(a), np.nan_to_num(b), atol=1e-10), label
        t_np = best_of(lambda: call(np_impl), args.repeat)
        t_nb = best_of(lambda: call(nb_impl), args.repeat)
        print(f"{label:62s} {t_np * 1e3:8.2f}ms {t_nb * 1e3:8.2f}ms {t_np / t_nb:7.1f}x {first * 1e3:7.1f}ms")


if __name__ == "__main__":
    main()
