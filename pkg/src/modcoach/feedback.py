"""Practice sessions: live pitch/volume frames plus per-attempt scoring.

A session streams PCM chunks in, emits one LiveFrame per completed 10 ms
hop, and on finish_attempt labels the whole attempt offline and reports
which channels missed the target on each focus word. The previous attempt
always becomes the new baseline overlay.

One writer per session; distinct sessions are fully independent.
"""

from __future__ import annotations

import math
import uuid
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import audio
from .corpus import SentenceRecord, TimedWord, validate_word_timings
from .errors import SessionStateError, ValidationError
from .labeling import TechniqueLabel, TechniqueSequence, ThresholdConfig, label_sentence

CHANNELS = ("speed", "volume", "stress", "pause_after")


@dataclass(frozen=True)
class PracticeTarget:
    """Script words plus the desired label on each focus word."""

    words: tuple[str, ...]
    targets: dict[int, TechniqueLabel]

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))
        if not self.words:
            raise ValidationError("script must have at least one word")
        for idx in self.targets:
            if not (0 <= idx < len(self.words)):
                raise ValidationError(
                    f"focus index {idx} out of range for {len(self.words)} words")

    @property
    def focus_word_indices(self) -> set[int]:
        return set(self.targets)


@dataclass(frozen=True)
class LiveFrame:
    t: float
    volume: float
    f0: float

    def to_dict(self) -> dict:
        return {"t": self.t, "vol": self.volume, "f0": self.f0}


@dataclass(frozen=True)
class PracticeResult:
    attempt_index: int
    word_timings: tuple[TimedWord, ...]
    labels: TechniqueSequence
    mismatches: dict[int, set[str]]
    delta_vs_previous: int

    @property
    def mismatch_total(self) -> int:
        return sum(len(v) for v in self.mismatches.values())

    @property
    def mismatched_words(self) -> list[int]:
        return sorted(i for i, chans in self.mismatches.items() if chans)

    def to_dict(self) -> dict:
        return {
            "attempt": self.attempt_index,
            "labels": self.labels.to_dict(),
            "mismatches": {str(i): sorted(chans)
                           for i, chans in sorted(self.mismatches.items())},
            "mismatch_total": self.mismatch_total,
            "mismatched_words": self.mismatched_words,
            "delta_vs_previous": self.delta_vs_previous,
        }


class PracticeSession:
    """Accumulates one attempt's audio at a time on a session-global frame grid."""

    def __init__(self, target: PracticeTarget, cfg: ThresholdConfig = ThresholdConfig(),
                 sample_rate: int = 16000, hop_ms: float = audio.DEFAULT_HOP_MS,
                 rms_frame_ms: float = audio.DEFAULT_RMS_FRAME_MS,
                 pitch_frame_ms: float = audio.DEFAULT_PITCH_FRAME_MS):
        self.id = uuid.uuid4().hex[:12]
        self.target = target
        self.cfg = cfg
        self.sample_rate = sample_rate
        self.hop = max(1, int(round(sample_rate * hop_ms / 1000.0)))
        self.rms_len = max(1, int(round(sample_rate * rms_frame_ms / 1000.0)))
        self.pitch_len = max(2, int(round(sample_rate * pitch_frame_ms / 1000.0)))
        self.closed = False
        self.history: list[PracticeResult] = []
        self._chunks: list[np.ndarray] = []
        self._attempt_len = 0
        self._base = 0            # session samples consumed by finished attempts
        self._emitted = 0         # frames emitted so far (global index)
        self._attempt_first_frame = 0
        self._attempt_frames: list[LiveFrame] = []
        self._baseline: Optional[list[LiveFrame]] = None

    @property
    def attempt_count(self) -> int:
        return len(self.history)

    def push_audio(self, chunk: audio.SampleBuffer) -> list[LiveFrame]:
        """Append a chunk and return the newly completed frames.

        A chunk of N samples always completes floor(total/hop) - emitted
        frames; analysis windows at the live edge are zero-padded so frames
        never wait on future audio.
        """
        if self.closed:
            raise SessionStateError("session is closed")
        if chunk.sample_rate != self.sample_rate:
            raise ValidationError(
                f"chunk rate {chunk.sample_rate} != session rate {self.sample_rate}")
        if len(chunk.samples):
            self._chunks.append(chunk.samples)
            self._attempt_len += len(chunk.samples)

        total = self._base + self._attempt_len
        n_frames = total // self.hop
        if n_frames <= self._emitted:
            return []
        attempt = np.concatenate(self._chunks) if self._chunks else np.zeros(0)
        window_len = max(self.rms_len, self.pitch_len)
        new: list[LiveFrame] = []
        pitch_windows = []
        for f in range(self._emitted, n_frames):
            start = f * self.hop - self._base
            window = np.zeros(window_len)
            if 0 <= start < len(attempt):
                got = attempt[start:start + window_len]
                window[:len(got)] = got
            vol = float(np.sqrt(np.mean(window[:self.rms_len] ** 2)))
            pitch_windows.append(window[:self.pitch_len])
            new.append(LiveFrame(t=f * self.hop / self.sample_rate, volume=vol, f0=0.0))
        f0s = audio.pitch_for_frames(np.stack(pitch_windows), self.sample_rate)
        new = [LiveFrame(t=fr.t, volume=fr.volume, f0=float(f0))
               for fr, f0 in zip(new, f0s)]
        self._attempt_frames.extend(new)
        self._emitted = n_frames
        return new

    def finish_attempt(self, word_timings: Sequence[TimedWord]) -> PracticeResult:
        """Label the attempt offline and score focus words against the target."""
        if self.closed:
            raise SessionStateError("session is closed")
        if self._emitted == self._attempt_first_frame:
            raise SessionStateError("no audio frames pushed for this attempt")
        timings = tuple(word_timings)
        if len(timings) != len(self.target.words):
            raise ValidationError(
                f"got {len(timings)} word timings for a {len(self.target.words)}-word script")
        validate_word_timings(timings)

        attempt = np.concatenate(self._chunks) if self._chunks else np.zeros(0)
        duration = len(attempt) / self.sample_rate
        last_end = timings[-1].end
        if last_end > duration + 0.05:
            raise ValidationError(
                f"timings end at {last_end:.3f}s but only {duration:.3f}s of audio arrived")
        if last_end > duration:
            pad = int(math.ceil((last_end - duration) * self.sample_rate))
            attempt = np.concatenate([attempt, np.zeros(pad)])

        attempt_index = len(self.history) + 1
        record = SentenceRecord(
            id=f"{self.id}:attempt{attempt_index}",
            talk_id=self.id,
            words=tuple(TimedWord(text=w, start=t.start, end=t.end)
                        for w, t in zip(self.target.words, timings)),
            text=" ".join(self.target.words),
        )
        buf = audio.SampleBuffer(attempt, self.sample_rate)
        acoustics = audio.word_acoustics(buf, record)
        labels = label_sentence(acoustics, self.cfg, sentence_id=record.id)

        mismatches: dict[int, set[str]] = {}
        for idx, wanted in self.target.targets.items():
            achieved = labels.labels[idx]
            mismatches[idx] = {ch for ch in CHANNELS
                               if getattr(achieved, ch) != getattr(wanted, ch)}
        total_mismatch = sum(len(v) for v in mismatches.values())
        previous_total = (self.history[-1].mismatch_total if self.history else None)
        delta = 0 if previous_total is None else total_mismatch - previous_total

        result = PracticeResult(
            attempt_index=attempt_index,
            word_timings=record.words,
            labels=labels,
            mismatches=mismatches,
            delta_vs_previous=delta,
        )
        self.history.append(result)

        # This attempt becomes the baseline; the next one starts on the
        # next hop boundary of the session-global frame grid.
        self._baseline = list(self._attempt_frames)
        self._attempt_frames = []
        self._base = self._emitted * self.hop
        self._attempt_first_frame = self._emitted
        self._chunks = []
        self._attempt_len = 0
        return result

    def get_baseline(self) -> Optional[tuple[list[float], list[float]]]:
        """(volume series, f0 series) of the previous attempt; None before any."""
        if self._baseline is None:
            return None
        return ([f.volume for f in self._baseline], [f.f0 for f in self._baseline])

    def baseline_frames(self) -> Optional[list[LiveFrame]]:
        return list(self._baseline) if self._baseline is not None else None

    def close(self) -> None:
        self.closed = True


class PracticeRegistry:
    """Session registry keyed by opaque ids (the service facade's view)."""

    def __init__(self):
        self._sessions: dict[str, PracticeSession] = {}

    def start_session(self, target: PracticeTarget,
                      cfg: ThresholdConfig = ThresholdConfig(),
                      sample_rate: int = 16000) -> str:
        session = PracticeSession(target, cfg=cfg, sample_rate=sample_rate)
        self._sessions[session.id] = session
        return session.id

    def get(self, session_id: str) -> PracticeSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise SessionStateError(f"unknown session {session_id!r}")
        return session

    def push_audio(self, session_id: str, chunk: audio.SampleBuffer) -> list[LiveFrame]:
        return self.get(session_id).push_audio(chunk)

    def finish_attempt(self, session_id: str,
                       word_timings: Sequence[TimedWord]) -> PracticeResult:
        return self.get(session_id).finish_attempt(word_timings)

    def get_baseline(self, session_id: str):
        return self.get(session_id).get_baseline()

    def close(self, session_id: str) -> None:
        session = self._sessions.pop(session_id, None)
        if session is not None:
            session.close()


def uniform_word_timings(words: Sequence[str], duration: float,
                         start: float = 0.0) -> list[TimedWord]:
    """Evenly split a duration across words (the documented client fallback
    when no tap-to-mark timings exist). Approximate by construction."""
    if not words:
        return []
    if duration <= 0:
        raise ValidationError("duration must be > 0")
    step = duration / len(words)
    return [TimedWord(text=w, start=start + i * step, end=start + (i + 1) * step)
            for i, w in enumerate(words)]
