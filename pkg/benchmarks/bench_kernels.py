"""Compare the compiled and pure-Python kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Times each kernel on representative inputs and the full pure-state
estimator (which calls ``purity_terms`` in its inner loop) with each
backend swapped in.
"""

import argparse
import timeit

import numpy as np

from sicmultiport import kernels
from sicmultiport.compiler import qutrit_sic_netlist, reck_decompose
from sicmultiport.optics import run_sic_experiment
from sicmultiport.qstate import random_pure_state
from sicmultiport.tomography import project_to_pure_manifold, qutrit_lines


def haar(n, seed):
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def cases():
    lines = qutrit_lines().as_array()
    p = np.random.default_rng(0).dirichlet(np.ones(9))
    P = np.random.default_rng(1).dirichlet(np.ones(9), size=1000)
    sic = qutrit_sic_netlist().kernel_arrays()
    mesh = reck_decompose(haar(16, 0)).kernel_arrays()
    states9 = np.random.default_rng(2).standard_normal((1000, 9)).astype(complex)
    states16 = np.random.default_rng(3).standard_normal((1000, 16)).astype(complex)
    freqs = [
        run_sic_experiment(random_pure_state(3, s), "qutrit", 10**4, s)[0].frequencies for s in range(5)
    ]

    def estimator(impl):
        old = kernels._impl
        kernels._impl = impl
        try:
            for f in freqs:
                project_to_pure_manifold(f)
        finally:
            kernels._impl = old

    return {
        "propagate qutrit SIC netlist, 1000 states": lambda m: kernels.apply_elements(*sic, states9, impl=m),
        "propagate 16-mode Reck mesh, 1000 states": lambda m: kernels.apply_elements(*mesh, states16, impl=m),
        "purity_terms (value, jacobian, hessian)": lambda m: kernels.purity_terms(p, lines, impl=m),
        "purity residuals, 1000 vectors": lambda m: kernels.purity_residuals_batch(P, lines, impl=m),
        "pure-state estimator, 5 records": estimator,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    try:
        backends = {"python": kernels.backend_module("python"), "cython": kernels.backend_module("cython")}
    except ImportError:
        print("compiled kernels unavailable; build with `pip install -e . --no-build-isolation`")
        return
    print(f"{'case':<44} {'python':>12} {'cython':>12} {'speedup':>9}")
    for name, fn in cases().items():
        times = {}
        for b, mod in backends.items():
            fn(mod)  # warm-up
            number = 1
            while timeit.timeit(lambda: fn(mod), number=number) < 0.05:
                number *= 4
            best = min(timeit.repeat(lambda: fn(mod), number=number, repeat=args.repeat))
            times[b] = best / number
        print(
            f"{name:<44} {times['python'] * 1e3:>10.3f}ms {times['cython'] * 1e3:>10.3f}ms"
            f" {times['python'] / times['cython']:>8.1f}x"
        )


if __name__ == "__main__":
    main()
