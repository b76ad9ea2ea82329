"""Regenerate three_attempts.json by driving the real practice protocol.

Run from the repository root:
    PYTHONPATH=tests python3 frontend/tests/fixtures/generate_fixture.py

Three attempts at the "making an enemy" target (fast "an", stressed
"enemy"): the first applies neither technique, the second fixes the speed,
the third fixes both. The recorded result messages are what the practice
WebSocket emits.
"""

import json
from pathlib import Path

import numpy as np

import _synth
from modcoach.feedback import PracticeRegistry
from modcoach.service import PracticeProtocol
from modcoach.wire import FrameDecoder, encode_json_frame, encode_pcm_frame

SR = _synth.SR

WORDS = ["making", "an", "enemy"]
TARGETS = {
    "1": {"speed": "faster", "volume": "none", "stress": "none",
          "pause_after": "none"},
    "2": {"speed": "none", "volume": "none", "stress": "stress",
          "pause_after": "none"},
}

ATTEMPTS = [
    # (spm making, spm an, spm enemy, enemy voiced?)
    (360.0, 270.0, 270.0, False),  # neither technique: both words flagged
    (300.0, 700.0, 300.0, False),  # "an" now fast: one flag left
    (300.0, 700.0, 300.0, True),   # "enemy" now stressed too: clean
]


def attempt_rows(spms, enemy_voiced):
    f0s = [None, None, 200.0 if enemy_voiced else None]
    rms = [0.24, 0.18, 0.18]
    return [(w, _syllables(w), spm, f0, r)
            for w, spm, f0, r in zip(WORDS, spms, f0s, rms)]


def _syllables(word):
    from modcoach.audio import count_syllables
    return count_syllables(word)


def pcm16(samples):
    return (np.round(np.clip(samples, -1, 32767 / 32768) * 32768)
            .astype("<i2").tobytes())


def main():
    protocol = PracticeProtocol(PracticeRegistry())
    decoder = FrameDecoder()
    out = {"words": WORDS, "targets": TARGETS, "attempts": []}

    replies, _ = protocol.handle(decoder.feed(encode_json_frame(
        {"type": "start", "words": WORDS, "targets": TARGETS,
         "sample_rate": SR}))[0])
    out["session"] = FrameDecoder().feed(replies[0])[0].json()

    for making, an, enemy, voiced in ATTEMPTS:
        specs = _synth.planned_specs(attempt_rows((making, an, enemy), voiced))
        samples, words = _synth.render_words(specs)
        frame_messages = []
        chunk = SR // 10
        for i in range(0, len(samples), chunk):
            replies, _ = protocol.handle(decoder.feed(
                encode_pcm_frame(pcm16(samples[i:i + chunk])))[0])
            frame_messages.append(FrameDecoder().feed(replies[0])[0].json())
        replies, _ = protocol.handle(decoder.feed(encode_json_frame(
            {"type": "finish",
             "word_timings": [w.to_dict() for w in words]}))[0])
        result = FrameDecoder().feed(replies[0])[0].json()
        frames = [f for m in frame_messages for f in m["frames"]]
        out["attempts"].append({"frames": frames, "result": result})

    target = Path(__file__).parent / "three_attempts.json"
    target.write_text(json.dumps(out, indent=1), encoding="utf-8")
    counts = [len(a["result"]["mismatched_words"]) for a in out["attempts"]]
    print(f"wrote {target} (marker counts {counts})")


if __name__ == "__main__":
    main()
