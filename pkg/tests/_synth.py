"""Audio synthesis helpers shared by the tests.

Words are rendered as constant-frequency sine segments so volume, pitch,
speed and pauses are all independently controllable per word.
"""

from __future__ import annotations

import numpy as np

from modcoach.audio import SampleBuffer, encode_wav
from modcoach.corpus import SentenceRecord, TimedWord

SR = 16000


def sine(freq: float, duration: float, amp: float = 0.3, sr: int = SR) -> np.ndarray:
    t = np.arange(int(round(duration * sr))) / sr
    return amp * np.sin(2 * np.pi * freq * t)


def noise(duration: float, amp: float = 0.3, sr: int = SR, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.clip(rng.normal(0.0, amp, int(round(duration * sr))), -0.999, 0.999)


def render_words(word_specs, sr: int = SR, lead_in: float = 0.05):
    """Render [(text, duration, f0, amp, gap_after), ...] to audio + timings.

    f0 == 0 renders the word as silence; f0 < 0 renders white noise with
    sigma = amp (a voiced-less word with volume). Returns
    (samples, [TimedWord, ...]).
    """
    pieces = [np.zeros(int(round(lead_in * sr)))]
    words = []
    cursor = lead_in
    for w_index, (text, duration, f0, amp, gap) in enumerate(word_specs):
        n = int(round(duration * sr))
        if f0 > 0:
            t = np.arange(n) / sr
            pieces.append(amp * np.sin(2 * np.pi * f0 * t))
        elif f0 < 0:
            rng = np.random.default_rng(1000 + w_index)
            pieces.append(np.clip(rng.normal(0.0, amp, n), -0.999, 0.999))
        else:
            pieces.append(np.zeros(n))
        words.append(TimedWord(text=text, start=cursor, end=cursor + duration))
        cursor += duration
        if gap > 0:
            pieces.append(np.zeros(int(round(gap * sr))))
            cursor += gap
    pieces.append(np.zeros(int(round(0.05 * sr))))
    return np.concatenate(pieces), words


def planned_specs(rows, gap: float = 0.05):
    """Build render_words specs from per-word plans.

    rows: (text, syllables, spm, f0, rms) with f0 None meaning white noise
    (unvoiced). Duration follows from syllables and the planned spm, so the
    speed channel is exact arithmetic; rms sets the sine amplitude (rms *
    sqrt(2)) or the noise sigma.
    """
    specs = []
    for i, (text, syllables, spm, f0, rms) in enumerate(rows):
        duration = syllables * 60.0 / spm
        if f0 is None:
            specs.append((text, duration, -1.0, rms, gap))
        elif f0 == 0:
            specs.append((text, duration, 0.0, 0.0, gap))
        else:
            specs.append((text, duration, f0, min(0.95, rms * np.sqrt(2)), gap))
    return specs


def render_sentence(word_specs, sentence_id: str = "s:0", talk_id: str = "s",
                    sr: int = SR):
    """render_words wrapped into (SampleBuffer, SentenceRecord)."""
    samples, words = render_words(word_specs, sr=sr)
    record = SentenceRecord(
        id=sentence_id, talk_id=talk_id, words=tuple(words),
        text=" ".join(w.text for w in words))
    return SampleBuffer(samples, sr), record


def wav_bytes(samples: np.ndarray, sr: int = SR) -> bytes:
    return encode_wav(SampleBuffer(np.asarray(samples, dtype=np.float64), sr))
