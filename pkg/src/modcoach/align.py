"""Coarse part-of-speech tagging and global sentence alignment.

Tags use the 12-tag universal set. The tagger is rule-based: closed-class
lexicon first, then ordered suffix rules, digit rule, punctuation rule,
NOUN fallback. That is deliberately coarse; alignment only needs
structural comparability between sentences, and the tagger is pluggable.

Alignment is a score-maximizing global dynamic program over tag
sequences, which makes technique labels position-comparable between the
query and a retrieved sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from typing import Optional, Sequence

from .errors import ValidationError
from .labeling import TechniqueLabel, TechniqueSequence

POS_TAGS = frozenset({"NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP",
                      "CONJ", "NUM", "PRT", "PUNCT", "X"})

GAP = None  # gap marker inside alignment pairs

DEFAULT_MATCH = 2
DEFAULT_MISMATCH = -1
DEFAULT_GAP = -1

# Ordered: first matching suffix wins. Longest variants come first.
DEFAULT_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ization", "NOUN"),
    ("ational", "ADJ"),
    ("fulness", "NOUN"),
    ("ousness", "NOUN"),
    ("ability", "NOUN"),
    ("ibility", "NOUN"),
    ("ingly", "ADV"),
    ("edly", "ADV"),
    ("tion", "NOUN"),
    ("sion", "NOUN"),
    ("ment", "NOUN"),
    ("ness", "NOUN"),
    ("ship", "NOUN"),
    ("hood", "NOUN"),
    ("ance", "NOUN"),
    ("ence", "NOUN"),
    ("ity", "NOUN"),
    ("ism", "NOUN"),
    ("ist", "NOUN"),
    ("ize", "VERB"),
    ("ise", "VERB"),
    ("ify", "VERB"),
    ("ate", "VERB"),
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("ive", "ADJ"),
    ("able", "ADJ"),
    ("ible", "ADJ"),
    ("al", "ADJ"),
    ("ic", "ADJ"),
    ("less", "ADJ"),
    ("ish", "ADJ"),
    ("ly", "ADV"),
    ("er", "NOUN"),
    ("or", "NOUN"),
    ("s", "NOUN"),
)

_WORD_CHARS = re.compile(r"[a-z']+")
_HAS_DIGIT = re.compile(r"\d")


def _load_lexicon() -> dict[str, str]:
    text = (resources.files("modcoach") / "resources" / "pos_lexicon.txt").read_text(
        encoding="utf-8")
    lexicon = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, tag = line.split("\t")
        lexicon[word] = tag
    return lexicon


_LEXICON: Optional[dict[str, str]] = None


def default_lexicon() -> dict[str, str]:
    global _LEXICON
    if _LEXICON is None:
        _LEXICON = _load_lexicon()
    return _LEXICON


def pos_tag(tokens: Sequence[str],
            lexicon: Optional[dict[str, str]] = None,
            suffix_rules: Sequence[tuple[str, str]] = DEFAULT_SUFFIX_RULES) -> list[str]:
    """One coarse tag per token; deterministic."""
    if not tokens:
        raise ValidationError("tokens must be non-empty")
    lexicon = lexicon if lexicon is not None else default_lexicon()
    tags = []
    for token in tokens:
        tags.append(_tag_one(token, lexicon, suffix_rules))
    return tags


def _tag_one(token: str, lexicon: dict[str, str],
             suffix_rules: Sequence[tuple[str, str]]) -> str:
    lowered = token.lower()
    if _HAS_DIGIT.search(lowered):
        return "NUM"
    core = "".join(_WORD_CHARS.findall(lowered))
    if not core:
        return "PUNCT"
    if core in lexicon:
        return lexicon[core]
    for suffix, tag in suffix_rules:
        if len(core) > len(suffix) + 1 and core.endswith(suffix):
            return tag
    return "NOUN"


@dataclass(frozen=True)
class Alignment:
    """Ordered (query_index | None, candidate_index | None) pairs covering
    both sequences exactly once, plus the alignment score."""

    pairs: tuple[tuple[Optional[int], Optional[int]], ...]
    score: int

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))

    @property
    def query_len(self) -> int:
        return sum(1 for q, _ in self.pairs if q is not None)

    @property
    def candidate_len(self) -> int:
        return sum(1 for _, c in self.pairs if c is not None)


def align_pos(query_tags: Sequence[str], cand_tags: Sequence[str],
              match: int = DEFAULT_MATCH, mismatch: int = DEFAULT_MISMATCH,
              gap: int = DEFAULT_GAP) -> Alignment:
    """Global alignment maximizing the total score.

    Traceback ties prefer the diagonal, then a query token against a gap,
    then a candidate token against a gap, so results are deterministic.
    """
    if not query_tags or not cand_tags:
        raise ValidationError("both tag sequences must be non-empty")
    n, m = len(query_tags), len(cand_tags)
    score = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        score[i][0] = i * gap
    for j in range(1, m + 1):
        score[0][j] = j * gap
    for i in range(1, n + 1):
        row = score[i]
        prev = score[i - 1]
        qt = query_tags[i - 1]
        for j in range(1, m + 1):
            sub = match if qt == cand_tags[j - 1] else mismatch
            row[j] = max(prev[j - 1] + sub, prev[j] + gap, row[j - 1] + gap)

    pairs: list[tuple[Optional[int], Optional[int]]] = []
    i, j = n, m
    while i > 0 or j > 0:
        here = score[i][j]
        if i > 0 and j > 0:
            sub = match if query_tags[i - 1] == cand_tags[j - 1] else mismatch
            if here == score[i - 1][j - 1] + sub:
                pairs.append((i - 1, j - 1))
                i, j = i - 1, j - 1
                continue
        if i > 0 and here == score[i - 1][j] + gap:
            pairs.append((i - 1, GAP))
            i -= 1
            continue
        pairs.append((GAP, j - 1))
        j -= 1
    pairs.reverse()
    return Alignment(pairs=tuple(pairs), score=score[n][m])


def project_labels(alignment: Alignment, cand_sequence: TechniqueSequence,
                   query_len: int) -> list[Optional[TechniqueLabel]]:
    """Map a candidate's labels onto query positions.

    A query position aligned to a candidate word carries that word's label;
    a position aligned to a gap is None ("not aligned"). Output length
    always equals query_len.
    """
    if alignment.candidate_len != len(cand_sequence.labels):
        raise ValidationError(
            f"alignment covers {alignment.candidate_len} candidate words, "
            f"sequence has {len(cand_sequence.labels)}")
    if alignment.query_len != query_len:
        raise ValidationError(
            f"alignment covers {alignment.query_len} query words, expected {query_len}")
    out: list[Optional[TechniqueLabel]] = [None] * query_len
    for q, c in alignment.pairs:
        if q is not None:
            out[q] = cand_sequence.labels[c] if c is not None else None
    return out
