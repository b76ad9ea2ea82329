"""Hot numeric kernels with numba and pure-numpy implementations.

The numba path is the default; set MODCOACH_NUMBA=0 to force the numpy
fallback (it is also used automatically when numba is unavailable).
Both paths compute the same quantities; benchmarks/bench_kernels.py
compares them.
"""

from __future__ import annotations

import os

import numpy as np


def numba_requested() -> bool:
    flag = os.environ.get("MODCOACH_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


_HAVE_NUMBA = False
if numba_requested():
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False


def numba_active() -> bool:
    """True when the jitted kernels are the selected implementation."""
    return _HAVE_NUMBA


# ---------------------------------------------------------------------------
# Framewise RMS


def rms_frames_numpy(samples: np.ndarray, frame_len: int, hop: int,
                     n_frames: int) -> np.ndarray:
    sq = np.concatenate(([0.0], np.cumsum(samples * samples)))
    starts = np.arange(n_frames) * hop
    ends = np.minimum(starts + frame_len, len(samples))
    sums = sq[ends] - sq[starts]
    return np.sqrt(sums / frame_len)


def _rms_frames_py(samples, frame_len, hop, n_frames):
    out = np.empty(n_frames, dtype=np.float64)
    n = samples.shape[0]
    for i in range(n_frames):
        start = i * hop
        end = min(start + frame_len, n)
        acc = 0.0
        for j in range(start, end):
            acc += samples[j] * samples[j]
        out[i] = np.sqrt(acc / frame_len)
    return out


# ---------------------------------------------------------------------------
# Difference function for lag-domain pitch search
#
# d[f, tau] = sum_{j < W - tau} (x[j] - x[j + tau])^2 over frame f of width W.
# The numpy path evaluates it via cumulative energies plus an FFT
# autocorrelation; the numba path runs the direct double loop.


def diff_frames_numpy(frames: np.ndarray, tau_max: int) -> np.ndarray:
    n_frames, width = frames.shape
    energy = np.concatenate(
        (np.zeros((n_frames, 1)), np.cumsum(frames * frames, axis=1)), axis=1)
    size = 1
    while size < 2 * width:
        size <<= 1
    spec = np.fft.rfft(frames, size, axis=1)
    auto = np.fft.irfft(spec * np.conj(spec), size, axis=1)[:, :tau_max]
    taus = np.arange(tau_max)
    # head energy: sum of x[j]^2 for j < W - tau; tail: for j >= tau
    head = energy[:, np.maximum(width - taus, 0)]
    tail = energy[:, width:width + 1] - energy[:, taus]
    return head + tail - 2.0 * auto


def _diff_frames_py(frames, tau_max):
    n_frames, width = frames.shape
    out = np.zeros((n_frames, tau_max), dtype=np.float64)
    for f in range(n_frames):
        for tau in range(1, tau_max):
            acc = 0.0
            for j in range(width - tau):
                delta = frames[f, j] - frames[f, j + tau]
                acc += delta * delta
            out[f, tau] = acc
    return out


if _HAVE_NUMBA:
    from numba import prange

    rms_frames_numba = njit(cache=True)(_rms_frames_py)

    # Rows are independent, so parallel + fastmath is deterministic per
    # input; fastmath only reassociates the inner reduction.
    @njit(cache=True, parallel=True, fastmath=True)
    def diff_frames_numba(frames, tau_max):  # pragma: no cover - jitted
        n_frames, width = frames.shape
        out = np.zeros((n_frames, tau_max), dtype=np.float64)
        for f in prange(n_frames):
            for tau in range(1, tau_max):
                acc = 0.0
                for j in range(width - tau):
                    delta = frames[f, j] - frames[f, j + tau]
                    acc += delta * delta
                out[f, tau] = acc
        return out

    rms_frames = rms_frames_numba
    diff_frames = diff_frames_numba
else:
    rms_frames_numba = None
    diff_frames_numba = None

    rms_frames = rms_frames_numpy
    diff_frames = diff_frames_numpy
