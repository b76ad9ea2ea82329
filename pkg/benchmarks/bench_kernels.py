#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Usage: python benchmarks/bench_kernels.py [--seconds-of-audio 30] [--repeats 5]

The same benchmark drives both implementations on identical inputs and
checks they agree, so the numbers are comparable. The service selects the
implementation at import time via MODCOACH_NUMBA; this script imports both
explicitly regardless of the flag.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from modcoach import _kernels


def time_fn(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seconds-of-audio", type=float, default=30.0)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--sample-rate", type=int, default=16000)
    args = parser.parse_args()

    sr = args.sample_rate
    n = int(args.seconds_of_audio * sr)
    rng = np.random.default_rng(0)
    samples = rng.normal(0, 0.2, n).clip(-1, 1)

    hop = sr // 100
    rms_len = int(0.03 * sr)
    pitch_len = int(0.04 * sr)
    n_frames = 1 + (n - pitch_len) // hop
    idx = np.arange(pitch_len)[None, :] + (np.arange(n_frames) * hop)[:, None]
    frames = np.ascontiguousarray(samples[idx])
    tau_max = int(np.ceil(sr / 60)) + 2

    print(f"audio: {args.seconds_of_audio:.0f}s at {sr} Hz "
          f"({n_frames} frames, tau_max {tau_max})")
    if _kernels.diff_frames_numba is None:
        print("numba unavailable or disabled; timing the numpy path only")

    rows = []
    rms_np = time_fn(_kernels.rms_frames_numpy, samples, rms_len, hop,
                     n_frames, repeats=args.repeats)
    rows.append(("rms_frames", "numpy", rms_np, 1.0))
    if _kernels.rms_frames_numba is not None:
        _kernels.rms_frames_numba(samples[:sr], rms_len, hop, 10)  # compile
        rms_nb = time_fn(_kernels.rms_frames_numba, samples, rms_len, hop,
                         n_frames, repeats=args.repeats)
        rows.append(("rms_frames", "numba", rms_nb, rms_np / rms_nb))
        a = _kernels.rms_frames_numpy(samples, rms_len, hop, n_frames)
        b = _kernels.rms_frames_numba(samples, rms_len, hop, n_frames)
        assert np.allclose(a, b, rtol=1e-9, atol=1e-12), "rms paths disagree"

    diff_np = time_fn(_kernels.diff_frames_numpy, frames, tau_max,
                      repeats=args.repeats)
    rows.append(("diff_frames", "numpy", diff_np, 1.0))
    if _kernels.diff_frames_numba is not None:
        _kernels.diff_frames_numba(frames[:4], tau_max)  # compile
        diff_nb = time_fn(_kernels.diff_frames_numba, frames, tau_max,
                          repeats=args.repeats)
        rows.append(("diff_frames", "numba", diff_nb, diff_np / diff_nb))
        a = _kernels.diff_frames_numpy(frames[:32], tau_max)
        b = _kernels.diff_frames_numba(frames[:32], tau_max)
        assert np.allclose(a, b, rtol=1e-8, atol=1e-8), "diff paths disagree"

    print(f"{'kernel':<14}{'path':<8}{'best (ms)':>12}{'speedup vs numpy':>20}")
    for kernel, path, seconds, speedup in rows:
        print(f"{kernel:<14}{path:<8}{seconds * 1e3:>12.2f}{speedup:>19.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
