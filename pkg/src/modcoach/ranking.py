"""Whole-sequence ranking for the voice technique table.

Candidate sequences are compared to the user's sequence position by
position after alignment projection; Hamming distance counts positions
whose composite labels differ in any channel. An unaligned position is a
sentinel that mismatches everything except another unaligned position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError
from .labeling import TechniqueLabel

#: Either a projected TechniqueLabel or None for "not aligned".
LabelOption = Optional[TechniqueLabel]


@dataclass(frozen=True)
class RankedExample:
    sentence_id: str
    aligned_labels: tuple[LabelOption, ...]
    hamming: int
    semantic_cosine: float
    rank: int


def hamming(a: Sequence[LabelOption], b: Sequence[LabelOption]) -> int:
    """Count of differing positions between equal-length label sequences."""
    if len(a) != len(b):
        raise ValidationError(f"length mismatch: {len(a)} vs {len(b)}")
    return sum(1 for x, y in zip(a, b) if x != y)


def rank_examples(query_labels: Sequence[TechniqueLabel],
                  candidates: Sequence[tuple[str, Sequence[LabelOption], float]],
                  ) -> list[RankedExample]:
    """Total deterministic order: ascending Hamming distance, then
    descending semantic cosine, then sentence id."""
    query = list(query_labels)
    rows = []
    for sentence_id, options, cosine in candidates:
        distance = hamming(query, options)
        rows.append((distance, -cosine, sentence_id, tuple(options)))
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    return [
        RankedExample(sentence_id=sid, aligned_labels=options, hamming=dist,
                      semantic_cosine=-neg_cos, rank=i + 1)
        for i, (dist, neg_cos, sid, options) in enumerate(rows)
    ]


def filter_by_techniques(ranked: Sequence[RankedExample], required: set[str],
                         mode: str = "any") -> list[RankedExample]:
    """Keep examples whose aligned labels contain the required technique
    values (any or all of them); survivors keep their order."""
    if mode not in ("any", "all"):
        raise ValidationError(f"mode must be 'any' or 'all', got {mode!r}")
    if not required:
        return list(ranked)
    out = []
    for example in ranked:
        present: set[str] = set()
        for option in example.aligned_labels:
            if option is not None:
                present |= option.values()
        keep = bool(required & present) if mode == "any" else required <= present
        if keep:
            out.append(example)
    return out
