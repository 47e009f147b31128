"""Time the numba and pure-numpy flavours of each hot kernel.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. The numba
timings exclude compilation (one warm-up call per kernel). Setting
``SQUIDQKD_DISABLE_NUMBA=1`` does not affect this script; it always calls both
flavours explicitly.
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from squidqkd import _kernels
from squidqkd._accel import HAVE_NUMBA
from squidqkd.fock import auto_dim, coherent_state, label_to_alpha


def _best(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(rng: np.random.Generator):
    a = label_to_alpha(4.0, 4.0)
    amps = coherent_state(a, auto_dim(a)).amps
    x = np.linspace(-6.0, 16.0, 4096)
    yield ("hermite_sum (dim %d, 4096 pts)" % amps.size,
           lambda: _kernels.hermite_sum_numba(amps, x),
           lambda: _kernels.hermite_sum_numpy(amps, x))

    n = 50_000
    alice = rng.integers(0, 2, n, dtype=np.uint8)
    bob = alice ^ (rng.random(n) < 0.08).astype(np.uint8)
    perms = np.stack([np.arange(n)] + [rng.permutation(n) for _ in range(3)]).astype(np.int64)
    sizes = np.array([9, 18, 36, 72], dtype=np.int64)
    yield ("cascade (50k bits, QBER 0.08)",
           lambda: _kernels.cascade_numba(alice, bob, perms, sizes),
           lambda: _kernels.cascade_numpy(alice, bob, perms, sizes))

    bits = rng.integers(0, 2, 20_000, dtype=np.uint8)
    m = 8_000
    seq = rng.integers(0, 2, bits.size + m - 1, dtype=np.uint8)
    yield ("toeplitz_hash (20k -> 8k)",
           lambda: _kernels.toeplitz_numba(seq, bits, m),
           lambda: _kernels.toeplitz_numpy(seq, bits, m))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed; both columns time the numpy path")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<34}{'numba [ms]':>12}{'numpy [ms]':>12}{'speed-up':>10}")
    for name, fast, slow in cases(rng):
        fast()  # compile
        tf = _best(fast, args.repeat)
        ts = _best(slow, args.repeat)
        print(f"{name:<34}{tf * 1e3:>12.3f}{ts * 1e3:>12.3f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
