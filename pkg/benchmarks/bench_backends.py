#!/usr/bin/env python3
"""Compare the numba-compiled kernels against the pure-Python fallback.

Both flavours are loaded side by side (ignoring MOTKIP_NO_NUMBA, which
only affects the package's own selection) and timed on the hot paths:
RC4 keystream XOR, Michael absorption, and phase-2 mixing.  Outputs are
cross-checked for equality while timing, so this doubles as a coarse
parity check.

Usage: python benchmarks/bench_backends.py [--mib N] [--packets N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from motkip import _kernels_python
from motkip.keymix import _SBOX_ARR

try:
    from motkip import _kernels_numba
except ImportError:
    _kernels_numba = None


def _rc4(kernels, key: np.ndarray, data: np.ndarray) -> bytes:
    s = kernels.rc4_ksa(key)
    out = np.empty(len(data), dtype=np.uint8)
    kernels.rc4_xor(s, 0, 0, data, out)
    return out.tobytes()


def _michael(kernels, data: np.ndarray) -> tuple:
    return kernels.michael_core(0x01234567, 0x89ABCDEF, data)


def _phase2_burst(kernels, tk: np.ndarray, ta: np.ndarray, n: int) -> int:
    p1k = kernels.phase1_mix(tk, ta, 0x42, _SBOX_ARR)
    acc = 0
    for iv16 in range(n):
        acc ^= int(kernels.phase2_mix(p1k, tk, iv16, _SBOX_ARR)[15])
    return acc


def timed(fn, *args) -> tuple[float, object]:
    started = time.perf_counter()
    result = fn(*args)
    return time.perf_counter() - started, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mib", type=int, default=8, help="payload MiB for rc4/michael")
    parser.add_argument("--packets", type=int, default=20000, help="phase-2 invocations")
    args = parser.parse_args()

    rng = np.random.Generator(np.random.PCG64(1))
    key = rng.integers(0, 256, 16, dtype=np.uint8)
    ta = rng.integers(0, 256, 6, dtype=np.uint8)
    data = rng.integers(0, 256, args.mib * 1024 * 1024, dtype=np.uint8)

    backends = [("python", _kernels_python)]
    if _kernels_numba is not None:
        # warm the JIT outside the timed region
        _rc4(_kernels_numba, key, data[:64])
        _michael(_kernels_numba, data[:64])
        _phase2_burst(_kernels_numba, key, ta, 2)
        backends.insert(0, ("numba", _kernels_numba))
    else:
        print("numba unavailable; timing the fallback only")

    cases = [
        (f"rc4 xor {args.mib} MiB", _rc4, (key, data)),
        (f"michael {args.mib} MiB", _michael, (data,)),
        (f"phase2 x{args.packets}", _phase2_burst, (key, ta, args.packets)),
    ]

    print(f"{'kernel':24} " + " ".join(f"{name:>12}" for name, _ in backends) + "   speedup")
    for label, fn, fnargs in cases:
        times = []
        results = []
        for _, kernels in backends:
            elapsed, result = timed(fn, kernels, *fnargs)
            times.append(elapsed)
            results.append(result)
        assert all(r == results[0] for r in results[1:]), f"backend mismatch in {label}"
        cells = " ".join(f"{t * 1000:>10.1f}ms" for t in times)
        speedup = f"{times[-1] / times[0]:>8.1f}x" if len(times) == 2 else "       -"
        print(f"{label:24} {cells} {speedup}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
