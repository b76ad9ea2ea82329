"""The MODCOACH_NUMBA=0 fallback must select the numpy kernels and produce
the same analysis results. Runs in a subprocess so the import-time switch
is exercised for real."""

import os
import subprocess
import sys
import textwrap

CHECK = textwrap.dedent("""
    import numpy as np
    from modcoach import _kernels
    from modcoach.audio import SampleBuffer, frame_rms, track_pitch

    assert not _kernels.numba_active(), "fallback not selected"
    assert _kernels.diff_frames is _kernels.diff_frames_numpy
    assert _kernels.rms_frames is _kernels.rms_frames_numpy

    sr = 16000
    t = np.arange(sr) / sr
    sine = 0.5 * np.sin(2 * np.pi * 220 * t)
    series = track_pitch(SampleBuffer(sine, sr))
    voiced = series.values[series.values > 0]
    assert len(voiced) > 0.8 * len(series)
    assert abs(np.median(voiced) - 220) < 5

    rms = frame_rms(SampleBuffer(0.8 * np.sin(2 * np.pi * 200 * t), sr))
    assert np.max(np.abs(rms.values - 0.8 / np.sqrt(2))) < 1e-3
    print("fallback ok")
""")


def test_numpy_fallback_path():
    env = dict(os.environ, MODCOACH_NUMBA="0")
    result = subprocess.run([sys.executable, "-c", CHECK], env=env,
                            capture_output=True, text=True, timeout=120)
    assert result.returncode == 0, result.stderr
    assert "fallback ok" in result.stdout


def test_flag_parsing():
    from modcoach._kernels import numba_requested
    old = os.environ.get("MODCOACH_NUMBA")
    try:
        for off in ("0", "false", "no", "OFF"):
            os.environ["MODCOACH_NUMBA"] = off
            assert not numba_requested()
        for on in ("1", "true", "yes"):
            os.environ["MODCOACH_NUMBA"] = on
            assert numba_requested()
        os.environ.pop("MODCOACH_NUMBA")
        assert numba_requested()
    finally:
        if old is None:
            os.environ.pop("MODCOACH_NUMBA", None)
        else:
            os.environ["MODCOACH_NUMBA"] = old
