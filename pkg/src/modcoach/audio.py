"""Audio decoding and word-level acoustic features.

WAV in, per-frame RMS and f0 series out, aggregated per word into
WordAcoustics (volume, pitch statistics, articulation rate, trailing gap).
The pitch tracker is a normalized-difference (YIN-style) lag search with
parabolic interpolation; frames whose normalized-difference minimum stays
above the voicing threshold are reported unvoiced (f0 = 0).

All operations are pure and safe to run in parallel on distinct buffers.
"""

from __future__ import annotations

import io
import re
import wave
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .corpus import SentenceRecord
from .errors import AudioFormatError, ValidationError

PCM_SCALE = 32768.0

DEFAULT_RMS_FRAME_MS = 30.0
DEFAULT_PITCH_FRAME_MS = 40.0
DEFAULT_HOP_MS = 10.0
DEFAULT_F_MIN = 60.0
DEFAULT_F_MAX = 500.0
DEFAULT_VOICING_THRESHOLD = 0.45


@dataclass(frozen=True)
class SampleBuffer:
    """Mono float samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValidationError("sample_rate must be > 0")
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValidationError("samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValidationError("samples must be finite")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def slice_seconds(self, start: float, end: float) -> "SampleBuffer":
        lo = max(0, int(round(start * self.sample_rate)))
        hi = min(len(self.samples), int(round(end * self.sample_rate)))
        return SampleBuffer(self.samples[lo:max(lo, hi)], self.sample_rate)


@dataclass(frozen=True)
class FrameSeries:
    """One value per analysis frame, with the frame geometry that produced it."""

    values: np.ndarray
    frame_length: int
    hop: int
    start_times: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        object.__setattr__(self, "start_times",
                           np.asarray(self.start_times, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.values)

    def to_list(self) -> list[float]:
        return [float(v) for v in self.values]


@dataclass(frozen=True)
class WordAcoustics:
    """Per-word acoustic summary feeding the technique labeler."""

    mean_volume: float
    mean_f0: float
    f0_sd: float
    duration: float
    syllables: int
    spm: float
    gap_after: float


def decode_wav(data: bytes) -> SampleBuffer:
    """Decode RIFF/PCM16/mono bytes to floats scaled by 1/32768."""
    try:
        with wave.open(io.BytesIO(data), "rb") as wav:
            n_channels = wav.getnchannels()
            sampwidth = wav.getsampwidth()
            rate = wav.getframerate()
            n_frames = wav.getnframes()
            if n_channels != 1:
                raise AudioFormatError(
                    f"expected mono audio, got {n_channels} channels")
            if sampwidth != 2:
                raise AudioFormatError(
                    f"expected 16-bit PCM, got sample width {sampwidth * 8} bits")
            payload = wav.readframes(n_frames)
    except wave.Error as exc:
        raise AudioFormatError(f"not a readable RIFF/PCM wav: {exc}") from exc
    except EOFError as exc:
        raise AudioFormatError("truncated wav file") from exc
    if len(payload) < n_frames * 2:
        raise AudioFormatError(
            f"truncated wav data: header declares {n_frames} frames, "
            f"payload holds {len(payload) // 2}")
    samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / PCM_SCALE
    return SampleBuffer(samples=samples, sample_rate=rate)


def encode_wav(buf: SampleBuffer) -> bytes:
    """Inverse of decode_wav: PCM16 mono WAV bytes."""
    clipped = np.clip(buf.samples, -1.0, 32767.0 / PCM_SCALE)
    pcm = np.round(clipped * PCM_SCALE).astype("<i2")
    out = io.BytesIO()
    with wave.open(out, "wb") as wav:
        wav.setnchannels(1)
        wav.setsampwidth(2)
        wav.setframerate(buf.sample_rate)
        wav.writeframes(pcm.tobytes())
    return out.getvalue()


def _frame_grid(n_samples: int, frame_len: int, hop: int) -> int:
    """Number of full frames; at least one (the short-buffer case pads)."""
    if n_samples < frame_len:
        return 1
    return 1 + (n_samples - frame_len) // hop


def _frame_matrix(samples: np.ndarray, frame_len: int, hop: int,
                  n_frames: int) -> np.ndarray:
    needed = (n_frames - 1) * hop + frame_len
    if needed > len(samples):
        samples = np.concatenate([samples, np.zeros(needed - len(samples))])
    idx = np.arange(frame_len)[None, :] + (np.arange(n_frames) * hop)[:, None]
    return samples[idx]


def frame_rms(buf: SampleBuffer, frame_ms: float = DEFAULT_RMS_FRAME_MS,
              hop_ms: float = DEFAULT_HOP_MS) -> FrameSeries:
    """Root-mean-square per frame. A buffer shorter than one frame yields a
    single zero-padded frame."""
    if not (frame_ms >= hop_ms > 0):
        raise ValidationError("require frame_ms >= hop_ms > 0")
    frame_len = max(1, int(round(buf.sample_rate * frame_ms / 1000.0)))
    hop = max(1, int(round(buf.sample_rate * hop_ms / 1000.0)))
    n_frames = _frame_grid(len(buf.samples), frame_len, hop)
    samples = buf.samples
    if len(samples) < frame_len:
        samples = np.concatenate([samples, np.zeros(frame_len - len(samples))])
    values = _kernels.rms_frames(samples, frame_len, hop, n_frames)
    times = np.arange(n_frames) * (hop / buf.sample_rate)
    return FrameSeries(values=values, frame_length=frame_len, hop=hop,
                       start_times=times)


def track_pitch(buf: SampleBuffer, frame_ms: float = DEFAULT_PITCH_FRAME_MS,
                hop_ms: float = DEFAULT_HOP_MS, f_min: float = DEFAULT_F_MIN,
                f_max: float = DEFAULT_F_MAX,
                voicing_threshold: float = DEFAULT_VOICING_THRESHOLD) -> FrameSeries:
    """Per-frame fundamental frequency; 0 marks unvoiced frames."""
    if not (0 < f_min < f_max < buf.sample_rate / 2):
        raise ValidationError("require 0 < f_min < f_max < sample_rate/2")
    if not (frame_ms >= hop_ms > 0):
        raise ValidationError("require frame_ms >= hop_ms > 0")
    frame_len = max(2, int(round(buf.sample_rate * frame_ms / 1000.0)))
    hop = max(1, int(round(buf.sample_rate * hop_ms / 1000.0)))
    n_frames = _frame_grid(len(buf.samples), frame_len, hop)
    frames = _frame_matrix(buf.samples, frame_len, hop, n_frames)
    f0 = pitch_for_frames(frames, buf.sample_rate, f_min=f_min, f_max=f_max,
                          voicing_threshold=voicing_threshold)
    times = np.arange(n_frames) * (hop / buf.sample_rate)
    return FrameSeries(values=f0, frame_length=frame_len, hop=hop,
                       start_times=times)


def pitch_for_frames(frames: np.ndarray, sample_rate: int,
                     f_min: float = DEFAULT_F_MIN, f_max: float = DEFAULT_F_MAX,
                     voicing_threshold: float = DEFAULT_VOICING_THRESHOLD) -> np.ndarray:
    """f0 per row of a pre-framed signal matrix (0 = unvoiced)."""
    frame_len = frames.shape[1]
    tau_min = max(1, int(sample_rate / f_max))
    tau_max = min(frame_len - 1, int(np.ceil(sample_rate / f_min)) + 1)
    if tau_max <= tau_min + 1:
        raise ValidationError("frame too short for the requested f_min")
    diffs = _kernels.diff_frames(np.ascontiguousarray(frames), tau_max + 1)
    return _f0_from_diffs(diffs, sample_rate, tau_min, tau_max, f_min, f_max,
                          voicing_threshold)


def _f0_from_diffs(diffs: np.ndarray, sample_rate: int, tau_min: int, tau_max: int,
                   f_min: float, f_max: float, threshold: float) -> np.ndarray:
    """Normalize the difference rows and pick a lag per frame (0 = unvoiced)."""
    n_frames, width = diffs.shape
    taus = np.arange(1, width, dtype=np.float64)
    denom = np.cumsum(diffs[:, 1:], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        norm = diffs[:, 1:] * taus / denom
    norm = np.where(np.isfinite(norm), norm, 1.0)
    cmndf = np.concatenate([np.ones((n_frames, 1)), norm], axis=1)

    out = np.zeros(n_frames)
    for i in range(n_frames):
        row = cmndf[i]
        window = row[tau_min:tau_max + 1]
        best_rel = int(np.argmin(window))
        if window[best_rel] > threshold:
            continue  # unvoiced
        # Absolute-threshold step: first dip below threshold, walked to its
        # local minimum, avoids subharmonic (octave-down) picks.
        below = np.nonzero(window < threshold)[0]
        if below.size:
            t = below[0]
            while t + 1 < len(window) and window[t + 1] < window[t]:
                t += 1
        else:
            t = best_rel
        tau = t + tau_min
        tau_hat = _parabolic_min(row, tau)
        f0 = sample_rate / tau_hat
        out[i] = min(max(f0, f_min), f_max)
    return out


def _parabolic_min(row: np.ndarray, tau: int) -> float:
    if tau <= 0 or tau + 1 >= len(row):
        return float(tau)
    a, b, c = row[tau - 1], row[tau], row[tau + 1]
    denom = a - 2.0 * b + c
    if denom <= 0:
        return float(tau)
    shift = 0.5 * (a - c) / denom
    return float(tau + np.clip(shift, -1.0, 1.0))


_VOWELS = set("aeiou")
_LETTERS = re.compile(r"[a-z]+")


def count_syllables(word_text: str) -> int:
    """Vowel-group heuristic; always >= 1. See count_syllables_detailed."""
    count, _ = count_syllables_detailed(word_text)
    return count


def count_syllables_detailed(word_text: str) -> tuple[int, bool]:
    """Count vowel groups (a e i o u, plus non-initial y), drop a word-final
    silent 'e' unless that empties the word, floor at 1.

    Returns (count, fallback) where fallback marks tokens with no letters,
    which count as one syllable.
    """
    letters = "".join(_LETTERS.findall(word_text.lower()))
    if not letters:
        return 1, True
    groups = 0
    in_group = False
    for i, ch in enumerate(letters):
        is_vowel = ch in _VOWELS or (ch == "y" and i > 0)
        if is_vowel and not in_group:
            groups += 1
        in_group = is_vowel
    if letters.endswith("e") and groups > 1:
        groups -= 1
    return max(1, groups), False


def word_acoustics(buf: SampleBuffer, sentence: SentenceRecord,
                   rms_frame_ms: float = DEFAULT_RMS_FRAME_MS,
                   pitch_frame_ms: float = DEFAULT_PITCH_FRAME_MS,
                   hop_ms: float = DEFAULT_HOP_MS,
                   f_min: float = DEFAULT_F_MIN, f_max: float = DEFAULT_F_MAX,
                   voicing_threshold: float = DEFAULT_VOICING_THRESHOLD,
                   time_offset: float = 0.0) -> list[WordAcoustics]:
    """Aggregate frame features per word of a sentence.

    Word timings are interpreted relative to the buffer start after
    subtracting time_offset (pass the sentence start when the buffer holds
    a sentence sliced out of a longer talk). A word span shorter than one
    frame borrows the single nearest frame.
    """
    if not sentence.words:
        raise ValidationError("sentence has no words")
    duration = buf.duration
    for i, word in enumerate(sentence.words):
        if word.end - time_offset > duration + 0.05:
            raise ValidationError(
                f"word {i} ends at {word.end - time_offset:.3f}s, "
                f"beyond the {duration:.3f}s buffer")

    rms = frame_rms(buf, frame_ms=rms_frame_ms, hop_ms=hop_ms)
    pitch = track_pitch(buf, frame_ms=pitch_frame_ms, hop_ms=hop_ms,
                        f_min=f_min, f_max=f_max,
                        voicing_threshold=voicing_threshold)

    out = []
    words = sentence.words
    for i, word in enumerate(words):
        start = word.start - time_offset
        end = word.end - time_offset
        vol_vals = _span_values(rms, start, end)
        f0_vals = _span_values(pitch, start, end)
        voiced = f0_vals[f0_vals > 0]
        mean_f0 = float(voiced.mean()) if voiced.size else 0.0
        f0_sd = float(voiced.std()) if voiced.size else 0.0
        word_dur = word.end - word.start
        syllables = count_syllables(word.text)
        gap = 0.0
        if i + 1 < len(words):
            gap = max(0.0, words[i + 1].start - word.end)
        out.append(WordAcoustics(
            mean_volume=float(vol_vals.mean()),
            mean_f0=mean_f0,
            f0_sd=f0_sd,
            duration=word_dur,
            syllables=syllables,
            spm=syllables / (word_dur / 60.0),
            gap_after=gap,
        ))
    return out


def _span_values(series: FrameSeries, start: float, end: float) -> np.ndarray:
    """Frame values whose start time falls in [start, end); nearest frame if none."""
    mask = (series.start_times >= start) & (series.start_times < end)
    if mask.any():
        return series.values[mask]
    center = (start + end) / 2.0
    nearest = int(np.argmin(np.abs(series.start_times - center)))
    return series.values[nearest:nearest + 1]
