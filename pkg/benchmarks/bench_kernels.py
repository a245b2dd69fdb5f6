"""Benchmark the compiled LSTM recurrence kernel against the pure-numpy
fallback, plus an end-to-end training-epoch comparison.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from sketchrec.core import _pykernels

try:
    from sketchrec.core import _ckernels
except ImportError:
    _ckernels = None


def time_kernel(mod, s, t, h, repeats=30, seed=0):
    rng = np.random.default_rng(seed)
    xp = np.ascontiguousarray(rng.normal(size=(s, t, 4 * h)))
    wh = np.ascontiguousarray(rng.normal(scale=0.3, size=(h, 4 * h)))
    lengths = rng.integers(max(1, t // 2), t + 1, size=s)
    dh = np.ascontiguousarray(rng.normal(size=(s, h)))

    fwd_best = bwd_best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        h_all, c_all, gates, _ = mod.lstm_forward(xp, wh, lengths)
        fwd_best = min(fwd_best, time.perf_counter() - t0)
        t0 = time.perf_counter()
        mod.lstm_backward(wh, lengths, h_all, c_all, gates, dh)
        bwd_best = min(bwd_best, time.perf_counter() - t0)
    return fwd_best, bwd_best


def bench_recurrence():
    print("LSTM recurrence kernel (best of 30, milliseconds)")
    print(f"{'S x T x H':>14} {'pure fwd':>10} {'pure bwd':>10}"
          f" {'cext fwd':>10} {'cext bwd':>10} {'speedup':>8}")
    # the first row is the shape the model actually runs per sketch
    for s, t, h in [(5, 12, 32), (16, 12, 32), (64, 16, 32), (128, 24, 64)]:
        pf, pb = time_kernel(_pykernels, s, t, h)
        if _ckernels is None:
            print(f"{s:>4} x{t:>3} x{h:>3} {pf*1e3:>10.3f} {pb*1e3:>10.3f}"
                  f" {'n/a':>10} {'n/a':>10}")
            continue
        cf, cb = time_kernel(_ckernels, s, t, h)
        speedup = (pf + pb) / (cf + cb)
        print(f"{s:>4} x{t:>3} x{h:>3} {pf*1e3:>10.3f} {pb*1e3:>10.3f}"
              f" {cf*1e3:>10.3f} {cb*1e3:>10.3f} {speedup:>7.1f}x")


def bench_training_epoch():
    import os

    from sketchrec.core import kernels
    from sketchrec.synthetic import SynthSpec, synthesize_dataset
    from sketchrec.training import RunConfig, train

    spec = SynthSpec(n_categories=5, n_components=8, samples_per_category=10)
    train_set, _ = synthesize_dataset(spec, seed=0)
    cfg = RunConfig(epochs=2, batch_size=16, out_dir="/tmp/sketchrec-bench")
    t0 = time.perf_counter()
    train(cfg, train_set=train_set, test_set=None, quiet=True)
    dt = time.perf_counter() - t0
    print(f"\ntwo desk-preset epochs over {len(train_set)} sketches: "
          f"{dt:.2f}s with the {kernels.backend_name()} backend")
    if kernels.COMPILED:
        print("re-run with SKETCHREC_PURE=1 to time the fallback backend")
    _ = os


if __name__ == "__main__":
    bench_recurrence()
    bench_training_epoch()
