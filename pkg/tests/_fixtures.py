"""Planted-corpus fixture shared by the service, CLI and acceptance tests.

Twenty one-sentence talks with synthesized audio. Twelve of them share the
query's structure and carry a planted combination: "an" spoken fast (spm
700 vs 300 elsewhere) and "enemy" stressed (the only voiced word). One of
the twelve is an exact duplicate of the query, audio included. The other
eight talks are unrelated filler with flat audio.

The focus words sit exactly at the sentence mean on the volume channel
while flanking words alternate far above/below it (ratio-decided louder and
softer with wide margins), so measurement noise can never flip any label;
speed is exact arithmetic from the planned word durations.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

import _synth
from modcoach.audio import count_syllables

SR = _synth.SR

QUERY_TEXT = "Tact is the art of making a point without making an enemy."

PLANTED_TEXTS = [
    QUERY_TEXT,  # the duplicate
    "Skill is the art of making a point without making an enemy.",
    "Tact is the way of making a point without making an enemy.",
    "Grace is the art of keeping a friend without making an enemy.",
    "Wit is the art of making a joke without making an enemy.",
    "Tact is the art of winning a debate without making an enemy.",
    "Charm is the art of holding a room without making an enemy.",
    "Tact is the art of making a point without provoking an enemy.",
    "Poise is the art of staying a course without making an enemy.",
    "Candor is the art of sharing a truth without making an enemy.",
    "Patience is the art of awaiting a moment without making an enemy.",
    "Tact is the skill of making a point without making an enemy.",
]

FILLER_TEXTS = [
    "The quarterly revenue grew beyond every forecast.",
    "Bright morning light filled the quiet valley.",
    "Engineers measured the bridge before the storm.",
    "A gentle rain followed the long drought.",
    "The committee approved the budget after lunch.",
    "Seven datasets were archived on friday.",
    "Music from the old radio drifted upstairs.",
    "The harvest finished early this year.",
]

FAST_INDEX = 10   # "an"
STRESS_INDEX = 11  # "enemy."

BASE_SPM = 300.0
FAST_SPM = 700.0
STRESS_F0 = 200.0
BASE_RMS = 0.2
RMS_SPREAD = 0.12  # flank ratios 1.6 / 0.4: louder/softer by a wide margin


def planted_rows(text: str):
    """Per-word (text, syllables, spm, f0, rms) plan with the planted techniques."""
    tokens = text.split()
    rows = []
    flank = 0
    for i, token in enumerate(tokens):
        syllables = count_syllables(token)
        if i == FAST_INDEX:
            rows.append((token, syllables, FAST_SPM, None, BASE_RMS))
        elif i == STRESS_INDEX:
            rows.append((token, syllables, BASE_SPM, STRESS_F0, BASE_RMS))
        else:
            rms = BASE_RMS + (RMS_SPREAD if flank % 2 == 0 else -RMS_SPREAD)
            flank += 1
            rows.append((token, syllables, BASE_SPM, None, rms))
    return rows


def flat_rows(text: str):
    tokens = text.split()
    rows = []
    for i, token in enumerate(tokens):
        rms = BASE_RMS + (RMS_SPREAD if i % 2 == 0 else -RMS_SPREAD)
        rows.append((token, count_syllables(token), BASE_SPM, None, rms))
    return rows


def render_talk(text: str, planted: bool):
    rows = planted_rows(text) if planted else flat_rows(text)
    specs = _synth.planned_specs(rows)
    return _synth.render_words(specs)


def query_wav_and_timings():
    samples, words = render_talk(QUERY_TEXT, planted=True)
    return _synth.wav_bytes(samples), words


def write_transcripts(root: Path) -> Path:
    """Write per-talk transcript JSON + WAV files; returns the directory."""
    transcripts = root / "transcripts"
    transcripts.mkdir(parents=True, exist_ok=True)
    texts = [(t, True) for t in PLANTED_TEXTS] + [(t, False) for t in FILLER_TEXTS]
    for n, (text, planted) in enumerate(texts):
        talk_id = f"talk{n:02d}"
        samples, words = render_talk(text, planted)
        (transcripts / f"{talk_id}.wav").write_bytes(_synth.wav_bytes(samples))
        (transcripts / f"{talk_id}.json").write_text(json.dumps({
            "talk_id": talk_id,
            "audio": f"{talk_id}.wav",
            "sample_rate": SR,
            "words": [w.to_dict() for w in words],
        }), encoding="utf-8")
    return transcripts


def build_corpus(root: Path):
    """Run the CLI builder + reindex; returns (corpus_path, index_path)."""
    from modcoach.cli import main as cli_main

    transcripts = write_transcripts(root)
    corpus_path = root / "corpus.jsonl"
    index_path = root / "corpus.index.json"
    rc = cli_main(["corpus", "build", str(transcripts), "-o", str(corpus_path)])
    assert rc == 0, "corpus build failed"
    rc = cli_main(["reindex", "--corpus", str(corpus_path),
                   "-o", str(index_path)])
    assert rc == 0, "reindex failed"
    return corpus_path, index_path


def pcm16_bytes(samples: np.ndarray) -> bytes:
    clipped = np.clip(samples, -1.0, 32767.0 / 32768.0)
    return (np.round(clipped * 32768.0).astype("<i2")).tobytes()
