"""Time each hot kernel under the numba and numpy backends.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit

import numpy as np

from beamentropy import _kernels
from beamentropy.array import ArrayGeometry, dft_codebook
from beamentropy.channel import scenario_defaults
from beamentropy.montecarlo import ExperimentSpec, run, simulate_run


def _cases():
    rng = np.random.default_rng(0)
    spec = ExperimentSpec(scenario_defaults("UMi", 28), ArrayGeometry(256), ArrayGeometry(16), 1, 0)
    real, h = simulate_run(spec, 0)
    gains, aod, aoa, delays = real.as_arrays()
    tcb, rcb = dft_codebook(spec.tx_geom), dft_codebook(spec.rx_geom)
    g = np.abs(rcb.weights.conj().T @ h.entries @ tcb.weights)
    a = rng.normal(size=(16, 64)) + 1j * rng.normal(size=(16, 64))
    gram = a @ a.conj().T
    return {
        "synthesize 16x256": lambda k: k.synthesize(gains, aod, aoa, delays, 28e9, 256, 0.5, 16, 0.5),
        "gain_grid 16x256": lambda k: k.gain_grid(h.entries, tcb.weights, rcb.weights),
        "argmax_first 16x256": lambda k: k.argmax_first(g),
        "jacobi 16x16": lambda k: k.jacobi_eigvalsh(gram, 1e-12),
        "run() call, 1 run": lambda k: _full_run(k, spec),
    }


def _full_run(impl, spec):
    prev, _kernels.active = _kernels.active, impl
    try:
        run(spec, run_range=(0, 1))
    finally:
        _kernels.active = prev


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    impls = [i for i in (_kernels.numba_impl, _kernels.numpy_impl) if i is not None]
    print(f"{'kernel':<22}" + "".join(f"{i.name + ' (us)':>14}" for i in impls) + f"{'speedup':>10}")
    for name, fn in _cases().items():
        times = []
        for impl in impls:
            fn(impl)  # warm-up / JIT compile
            n, _ = timeit.Timer(lambda: fn(impl)).autorange()
            best = min(timeit.repeat(lambda: fn(impl), number=n, repeat=args.repeat)) / n
            times.append(best * 1e6)
        speed = f"{times[-1] / times[0]:>9.1f}x" if len(times) == 2 else ""
        print(f"{name:<22}" + "".join(f"{t:>14.1f}" for t in times) + speed)


if __name__ == "__main__":
    main()
