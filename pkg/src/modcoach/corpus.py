"""Benchmark corpus: word-timed transcripts segmented into sentences.

Persistence is newline-delimited JSON (one sentence per line) with a
sidecar stats file; records are immutable once loaded. Ingestion is
single-writer; readers may share loaded records freely.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .errors import DuplicateTalkError, ValidationError

SENTENCE_TERMINATORS = (".", "!", "?")


@dataclass(frozen=True)
class TimedWord:
    """A transcript token with start/end seconds; punctuation preserved."""

    text: str
    start: float
    end: float

    def to_dict(self) -> dict:
        return {"text": self.text, "start": self.start, "end": self.end}

    @classmethod
    def from_dict(cls, data: dict) -> "TimedWord":
        return cls(text=data["text"], start=float(data["start"]), end=float(data["end"]))


@dataclass(frozen=True)
class AudioRef:
    """Reference into a talk's WAV file: path plus a sample span (never embedded audio)."""

    path: str
    start_sample: int
    end_sample: int
    sample_rate: int

    def to_dict(self) -> dict:
        return {"path": self.path, "start_sample": self.start_sample,
                "end_sample": self.end_sample, "sample_rate": self.sample_rate}

    @classmethod
    def from_dict(cls, data: dict) -> "AudioRef":
        return cls(path=data["path"], start_sample=int(data["start_sample"]),
                   end_sample=int(data["end_sample"]), sample_rate=int(data["sample_rate"]))


@dataclass(frozen=True)
class SentenceRecord:
    """One sentence of a talk: ordered timed words plus the joined text."""

    id: str
    talk_id: str
    words: tuple[TimedWord, ...]
    text: str
    audio_ref: Optional[AudioRef] = None

    def __post_init__(self):
        object.__setattr__(self, "words", tuple(self.words))

    @property
    def start(self) -> float:
        return self.words[0].start

    @property
    def end(self) -> float:
        return self.words[-1].end

    def to_dict(self) -> dict:
        record = {"id": self.id, "talk_id": self.talk_id, "text": self.text,
                  "words": [w.to_dict() for w in self.words]}
        if self.audio_ref is not None:
            record["audio_ref"] = self.audio_ref.to_dict()
        return record

    @classmethod
    def from_dict(cls, data: dict) -> "SentenceRecord":
        audio_ref = data.get("audio_ref")
        return cls(
            id=data["id"],
            talk_id=data["talk_id"],
            words=tuple(TimedWord.from_dict(w) for w in data["words"]),
            text=data["text"],
            audio_ref=AudioRef.from_dict(audio_ref) if audio_ref else None,
        )


@dataclass(frozen=True)
class CorpusStats:
    talk_count: int
    total_duration_hours: float
    sentence_count: int
    word_count: int
    mean_words_per_sentence: float

    def to_dict(self) -> dict:
        return {"talk_count": self.talk_count,
                "total_duration_hours": self.total_duration_hours,
                "sentence_count": self.sentence_count,
                "word_count": self.word_count,
                "mean_words_per_sentence": self.mean_words_per_sentence}


def validate_word_timings(words: Sequence[TimedWord]) -> None:
    """Reject malformed or out-of-order timings, naming the offending index."""
    prev_end = None
    for i, word in enumerate(words):
        if word.start < 0:
            raise ValidationError(f"word {i}: start must be >= 0, got {word.start}")
        if word.end <= word.start:
            raise ValidationError(
                f"word {i}: end ({word.end}) must be > start ({word.start})")
        if prev_end is not None and word.start < prev_end - 1e-9:
            raise ValidationError(
                f"word {i}: overlaps previous word (start {word.start} < end {prev_end})")
        prev_end = word.end


def segment_transcript(words: Sequence[TimedWord], talk_id: str = "") -> list[SentenceRecord]:
    """Split a time-ordered word stream into sentences.

    A boundary falls after every word whose text ends with '.', '!' or '?';
    a trailing run without a terminator becomes the final sentence.
    Abbreviation periods are deliberately not special-cased.
    """
    sentences: list[SentenceRecord] = []
    current: list[TimedWord] = []
    for word in words:
        current.append(word)
        if word.text.endswith(SENTENCE_TERMINATORS):
            sentences.append(_make_sentence(talk_id, len(sentences), current))
            current = []
    if current:
        sentences.append(_make_sentence(talk_id, len(sentences), current))
    return sentences


def _make_sentence(talk_id: str, index: int, words: list[TimedWord]) -> SentenceRecord:
    return SentenceRecord(
        id=f"{talk_id}:{index}",
        talk_id=talk_id,
        words=tuple(words),
        text=" ".join(w.text for w in words),
    )


class CorpusStore:
    """In-memory corpus with JSONL persistence.

    Single-writer: callers must serialize ingest_talk; reads are safe to
    share because records are frozen.
    """

    def __init__(self):
        self._records: list[SentenceRecord] = []
        self._by_id: dict[str, SentenceRecord] = {}
        self._talks: set[str] = set()

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[SentenceRecord]:
        return iter(self._records)

    def __contains__(self, sentence_id: str) -> bool:
        return sentence_id in self._by_id

    @property
    def talk_ids(self) -> set[str]:
        return set(self._talks)

    def get(self, sentence_id: str) -> Optional[SentenceRecord]:
        return self._by_id.get(sentence_id)

    def ingest_talk(self, talk_id: str, words: Sequence[TimedWord],
                    audio_path: Optional[str] = None,
                    sample_rate: Optional[int] = None) -> list[SentenceRecord]:
        """Segment a talk and append its sentences with ids "{talk_id}:{index}".

        When the talk has audio, each sentence gets an AudioRef spanning its
        words as sample offsets at the given rate.
        """
        if not talk_id:
            raise ValidationError("talk_id must be non-empty")
        if talk_id in self._talks:
            raise DuplicateTalkError(f"talk {talk_id!r} already ingested")
        validate_word_timings(words)

        sentences = segment_transcript(words, talk_id=talk_id)
        if audio_path is not None:
            rate = sample_rate or 16000
            sentences = [
                SentenceRecord(
                    id=s.id, talk_id=s.talk_id, words=s.words, text=s.text,
                    audio_ref=AudioRef(
                        path=audio_path,
                        start_sample=int(round(s.start * rate)),
                        end_sample=int(round(s.end * rate)),
                        sample_rate=rate,
                    ),
                )
                for s in sentences
            ]
        for s in sentences:
            self._records.append(s)
            self._by_id[s.id] = s
        self._talks.add(talk_id)
        return sentences

    def extend(self, records: Iterable[SentenceRecord]) -> None:
        """Append already-built records (used by load); ids must stay unique."""
        for record in records:
            if record.id in self._by_id:
                raise ValidationError(f"duplicate sentence id {record.id!r}")
            self._records.append(record)
            self._by_id[record.id] = record
            self._talks.add(record.talk_id)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with path.open("w", encoding="utf-8") as fh:
            for record in self._records:
                fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
        stats = corpus_stats(self)
        stats_path(path).write_text(
            json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "CorpusStore":
        store = cls()
        with Path(path).open("r", encoding="utf-8") as fh:
            records = [SentenceRecord.from_dict(json.loads(line))
                       for line in fh if line.strip()]
        store.extend(records)
        return store


def stats_path(corpus_path: str | Path) -> Path:
    return Path(f"{corpus_path}.stats.json")


def labels_path(corpus_path: str | Path) -> Path:
    return Path(f"{corpus_path}.labels.jsonl")


def corpus_stats(store: CorpusStore) -> CorpusStats:
    """Counts over all persisted records; an empty store is all zeros."""
    sentence_count = len(store)
    word_count = sum(len(s.words) for s in store)
    spans: dict[str, tuple[float, float]] = {}
    for s in store:
        lo, hi = spans.get(s.talk_id, (float("inf"), 0.0))
        spans[s.talk_id] = (min(lo, s.start), max(hi, s.end))
    total_seconds = sum(hi - lo for lo, hi in spans.values())
    return CorpusStats(
        talk_count=len(spans),
        total_duration_hours=total_seconds / 3600.0,
        sentence_count=sentence_count,
        word_count=word_count,
        mean_words_per_sentence=(word_count / sentence_count) if sentence_count else 0.0,
    )
