"""Time the numba kernels against the pure-numpy fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.  Each kernel is
called once per backend before timing so JIT compilation is excluded.
"""
import argparse
import timeit

import numpy as np

from cavitysim import kernels
from cavitysim.field import binomial_amplitudes
from cavitysim.model import AtomPrep, ExactEngine, ModelParams


def husimi_impl():
    # the dispatcher routes both backends to numpy for this kernel, so time
    # the compiled loop directly to keep the comparison visible
    return kernels._husimi_numba if kernels.BACKEND == "numba" else kernels._husimi_numpy


def workloads(rng):
    h = rng.normal(size=(2000, 4, 4)) + 1j * rng.normal(size=(2000, 4, 4))
    h = 0.5 * (h + h.conj().transpose(0, 2, 1))
    u = np.linalg.qr(rng.normal(size=(74, 4, 4)) + 1j * rng.normal(size=(74, 4, 4)))[0]
    omega = rng.normal(size=(74, 74, 4, 4)) + 1j * rng.normal(size=(74, 74, 4, 4))
    amps = rng.normal(size=(74, 4)) + 1j * rng.normal(size=(74, 4))
    weights = np.array([0.5, 0.2, 0.2, 0.1])
    a = rng.normal(size=(72, 72)) + 1j * rng.normal(size=(72, 72))
    rho = a @ a.conj().T / np.trace(a @ a.conj().T).real
    axis = np.linspace(-12, 12, 201)
    engine = ExactEngine(ModelParams(k=1, gamma1=1.0, gamma2=0.2), binomial_amplitudes(0.2, 70))
    prep = AtomPrep(0.0, np.pi / 4)
    return {
        "jacobi_batch (2000 x 4x4)": lambda: kernels.jacobi_batch(h),
        "conjugate_blocks (74x74 blocks)": lambda: kernels.conjugate_blocks(u, omega),
        "mixture_blocks (74 labels)": lambda: kernels.mixture_blocks(u, amps, weights),
        "husimi loop (72 levels, 201x201)": lambda: husimi_impl()(rho, axis, axis),
        "exact evolve, m=70": lambda: engine.evolve(prep, 7.3),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    backends = sorted(kernels._IMPLS)
    previous = kernels.BACKEND
    results = {}
    for backend in backends:
        kernels.set_backend(backend)
        for name, fn in workloads(np.random.default_rng(0)).items():
            fn()
            best = min(timeit.repeat(fn, number=1, repeat=args.repeat))
            results.setdefault(name, {})[backend] = best
    kernels.set_backend(previous)
    print(f"{'kernel':36s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, row in results.items():
        line = f"{name:36s}" + "".join(f"{row[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) == 2:
            line += f"   {row['numpy'] / row['numba']:8.1f}x"
        print(line)


if __name__ == "__main__":
    main()
