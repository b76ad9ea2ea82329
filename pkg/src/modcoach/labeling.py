"""Word-level voice modulation labeling.

Each word gets a composite label over four independent channels:

* speed       faster / slower / none
* volume      louder / softer / none
* stress      stress / none          (pitch-based emphasis)
* pause_after brief / master / long / none

Channel decisions combine a ratio test against the sentence mean with a
z-score test against the sentence's population standard deviation. The
default thresholds are coach-calibrated and adjustable via ThresholdConfig.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Sequence

import numpy as np

from .errors import ValidationError

NONE = "none"

SPEED_FASTER = "faster"
SPEED_SLOWER = "slower"
VOLUME_LOUDER = "louder"
VOLUME_SOFTER = "softer"
STRESS = "stress"
PAUSE_BRIEF = "brief"
PAUSE_MASTER = "master"
PAUSE_LONG = "long"

SPEED_VALUES = frozenset({SPEED_FASTER, SPEED_SLOWER, NONE})
VOLUME_VALUES = frozenset({VOLUME_LOUDER, VOLUME_SOFTER, NONE})
STRESS_VALUES = frozenset({STRESS, NONE})
PAUSE_VALUES = frozenset({PAUSE_BRIEF, PAUSE_MASTER, PAUSE_LONG, NONE})

#: Every channel value that denotes an actual technique (wire vocabulary).
TECHNIQUE_VALUES = frozenset(
    {SPEED_FASTER, SPEED_SLOWER, VOLUME_LOUDER, VOLUME_SOFTER, STRESS,
     PAUSE_BRIEF, PAUSE_MASTER, PAUSE_LONG}
)


@dataclass(frozen=True)
class ThresholdConfig:
    """Adjustable labeling thresholds (the user-panel knobs).

    Pause bands are left-inclusive: [pause_brief, pause_master) is a brief
    pause, [pause_master, pause_long) a master pause, [pause_long, inf) a
    long pause. Ratio thresholds are multiples of the sentence mean; the
    *_sd fields are z-score multipliers.
    """

    pause_brief: float = 0.5
    pause_master: float = 1.0
    pause_long: float = 2.5
    vol_louder_ratio: float = 1.1
    vol_softer_ratio: float = 0.67
    vol_sd: float = 1.0
    pitch_ratio: float = 1.25
    pitch_sd: float = 1.0
    speed_faster_ratio: float = 1.5
    speed_slower_ratio: float = 0.67
    speed_sd: float = 1.0

    def __post_init__(self):
        if not (0 < self.pause_brief < self.pause_master < self.pause_long):
            raise ValidationError("pause bands must be ordered and positive")
        for name in ("vol_louder_ratio", "vol_softer_ratio", "pitch_ratio",
                     "speed_faster_ratio", "speed_slower_ratio"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be > 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ThresholdConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown threshold fields: {sorted(unknown)}")
        return cls(**data)


@dataclass(frozen=True)
class TechniqueLabel:
    """Composite per-word label; channels are independent."""

    speed: str = NONE
    volume: str = NONE
    stress: str = NONE
    pause_after: str = NONE

    def __post_init__(self):
        if self.speed not in SPEED_VALUES:
            raise ValidationError(f"bad speed value: {self.speed!r}")
        if self.volume not in VOLUME_VALUES:
            raise ValidationError(f"bad volume value: {self.volume!r}")
        if self.stress not in STRESS_VALUES:
            raise ValidationError(f"bad stress value: {self.stress!r}")
        if self.pause_after not in PAUSE_VALUES:
            raise ValidationError(f"bad pause value: {self.pause_after!r}")

    @property
    def is_none(self) -> bool:
        return (self.speed == NONE and self.volume == NONE
                and self.stress == NONE and self.pause_after == NONE)

    def values(self) -> set[str]:
        """The technique values present on this label (no 'none' entries)."""
        return {v for v in (self.speed, self.volume, self.stress, self.pause_after)
                if v != NONE}

    def as_tuple(self) -> tuple[str, str, str, str]:
        return (self.speed, self.volume, self.stress, self.pause_after)

    def to_dict(self) -> dict:
        return {"speed": self.speed, "volume": self.volume,
                "stress": self.stress, "pause_after": self.pause_after}

    @classmethod
    def from_dict(cls, data: dict) -> "TechniqueLabel":
        return cls(speed=data.get("speed", NONE), volume=data.get("volume", NONE),
                   stress=data.get("stress", NONE),
                   pause_after=data.get("pause_after", NONE))


@dataclass(frozen=True)
class TechniqueSequence:
    """One composite label per word of a sentence."""

    sentence_id: str
    labels: tuple[TechniqueLabel, ...]

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def to_dict(self) -> dict:
        return {"sentence_id": self.sentence_id,
                "labels": [lab.to_dict() for lab in self.labels]}

    @classmethod
    def from_dict(cls, data: dict) -> "TechniqueSequence":
        return cls(sentence_id=data["sentence_id"],
                   labels=tuple(TechniqueLabel.from_dict(d) for d in data["labels"]))


def label_pause(gap_after: float, cfg: ThresholdConfig = ThresholdConfig()) -> str:
    """Band the silence after a word: [brief, master) / [master, long) / [long, inf).

    Boundaries are inclusive on the left. Gaps below the brief band are not
    an intentional pause.
    """
    if gap_after < 0:
        raise ValidationError(f"gap_after must be >= 0, got {gap_after}")
    if gap_after >= cfg.pause_long:
        return PAUSE_LONG
    if gap_after >= cfg.pause_master:
        return PAUSE_MASTER
    if gap_after >= cfg.pause_brief:
        return PAUSE_BRIEF
    return NONE


def label_volume(word_rms: float, sentence_mean_rms: float, sentence_sd_rms: float,
                 cfg: ThresholdConfig = ThresholdConfig()) -> str:
    """Louder above 1.1x the sentence mean or +1 SD; softer below 0.67x or -1 SD."""
    if sentence_mean_rms <= 0:
        raise ValidationError("sentence mean RMS must be > 0")
    louder = (word_rms > cfg.vol_louder_ratio * sentence_mean_rms
              or word_rms > sentence_mean_rms + cfg.vol_sd * sentence_sd_rms)
    softer = (word_rms < cfg.vol_softer_ratio * sentence_mean_rms
              or word_rms < sentence_mean_rms - cfg.vol_sd * sentence_sd_rms)
    if louder and softer:
        # Unreachable with a real SD; the ratio test decides if it ever fires.
        if word_rms > cfg.vol_louder_ratio * sentence_mean_rms:
            return VOLUME_LOUDER
        if word_rms < cfg.vol_softer_ratio * sentence_mean_rms:
            return VOLUME_SOFTER
        return NONE
    if louder:
        return VOLUME_LOUDER
    if softer:
        return VOLUME_SOFTER
    return NONE


def label_pitch(word_mean_f0: float, sentence_mean_f0: float, sentence_sd_f0: float,
                cfg: ThresholdConfig = ThresholdConfig()) -> str:
    """Stress above 1.25x the sentence mean f0 or +1 SD; unvoiced words never stress."""
    if word_mean_f0 <= 0:
        return NONE
    if word_mean_f0 > cfg.pitch_ratio * sentence_mean_f0:
        return STRESS
    if word_mean_f0 > sentence_mean_f0 + cfg.pitch_sd * sentence_sd_f0:
        return STRESS
    return NONE


def label_speed(word_spm: float, sentence_mean_spm: float, sentence_sd_spm: float,
                cfg: ThresholdConfig = ThresholdConfig()) -> str:
    """Faster above 1.5x the sentence mean SPM or +1 SD; slower below 0.67x or -1 SD."""
    if sentence_mean_spm <= 0:
        raise ValidationError("sentence mean SPM must be > 0")
    faster = (word_spm > cfg.speed_faster_ratio * sentence_mean_spm
              or word_spm > sentence_mean_spm + cfg.speed_sd * sentence_sd_spm)
    slower = (word_spm < cfg.speed_slower_ratio * sentence_mean_spm
              or word_spm < sentence_mean_spm - cfg.speed_sd * sentence_sd_spm)
    if faster and slower:
        if word_spm > cfg.speed_faster_ratio * sentence_mean_spm:
            return SPEED_FASTER
        if word_spm < cfg.speed_slower_ratio * sentence_mean_spm:
            return SPEED_SLOWER
        return NONE
    if faster:
        return SPEED_FASTER
    if slower:
        return SPEED_SLOWER
    return NONE


def label_sentence(acoustics: Sequence, cfg: ThresholdConfig = ThresholdConfig(),
                   sentence_id: str = "") -> TechniqueSequence:
    """Label every word of a sentence against the sentence's own statistics.

    Means and SDs are population statistics over the sentence's words.
    A single-word sentence therefore has SD 0 and every ratio test compares
    the word against itself, so all channels come out none. A fully silent
    sentence (mean RMS 0) gets volume none on every word rather than the
    precondition error a direct label_volume call would raise.

    The final word's pause_after is always none: there is no following word.
    """
    if not acoustics:
        raise ValidationError("acoustics must be non-empty")

    vols = np.array([a.mean_volume for a in acoustics], dtype=np.float64)
    f0s = np.array([a.mean_f0 for a in acoustics], dtype=np.float64)
    spms = np.array([a.spm for a in acoustics], dtype=np.float64)

    mean_vol, sd_vol = float(vols.mean()), float(vols.std())
    mean_f0, sd_f0 = float(f0s.mean()), float(f0s.std())
    mean_spm, sd_spm = float(spms.mean()), float(spms.std())

    labels = []
    last = len(acoustics) - 1
    for i, word in enumerate(acoustics):
        try:
            volume = (NONE if mean_vol <= 0
                      else label_volume(word.mean_volume, mean_vol, sd_vol, cfg))
            stress = label_pitch(word.mean_f0, mean_f0, sd_f0, cfg)
            speed = (NONE if mean_spm <= 0
                     else label_speed(word.spm, mean_spm, sd_spm, cfg))
            pause = NONE if i == last else label_pause(word.gap_after, cfg)
        except ValidationError as exc:
            raise ValidationError(f"word {i}: {exc}") from exc
        labels.append(TechniqueLabel(speed=speed, volume=volume,
                                     stress=stress, pause_after=pause))
    return TechniqueSequence(sentence_id=sentence_id, labels=tuple(labels))
