"""The recommendation engine shared by the CLI and the HTTP service.

Pipeline per query: embed -> ANN query -> POS-align each hit -> project its
technique labels onto query positions -> mine frequent combinations ->
rank whole sequences. Payloads are serialized canonically (sorted keys,
compact separators) so the CLI and service emit byte-identical JSON for
identical inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import semsearch
from .align import align_pos, pos_tag, project_labels
from .audio import SampleBuffer, decode_wav, word_acoustics
from .config import AppConfig
from .corpus import (
    CorpusStore,
    SentenceRecord,
    TimedWord,
    labels_path,
    segment_transcript,
    validate_word_timings,
)
from .errors import ValidationError
from .labeling import TechniqueLabel, TechniqueSequence, label_sentence
from .mining import ngram_summary
from .ranking import rank_examples

NOMINAL_WORD_SECONDS = 0.4  # fabricated timing for text-only queries


def to_canonical_json(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")


@dataclass(frozen=True)
class AnalyzedSentence:
    record: SentenceRecord
    labels: TechniqueSequence

    def to_dict(self) -> dict:
        return {
            "id": self.record.id,
            "text": self.record.text,
            "words": [w.to_dict() for w in self.record.words],
            "labels": [lab.to_dict() for lab in self.labels.labels],
        }


def _analysis_id(payload: bytes) -> str:
    return "q" + hashlib.sha1(payload).hexdigest()[:12]


class Engine:
    """Corpus + index + labels behind the analyze/recommend operations.

    The index attribute is replaced wholesale on reindex, so readers always
    observe either the old or the new index, never a partial one.
    """

    def __init__(self, config: AppConfig, store: Optional[CorpusStore] = None,
                 corpus_path: Optional[str | Path] = None,
                 index_path: Optional[str | Path] = None):
        self.config = config
        self.store = store if store is not None else CorpusStore()
        self.corpus_path = Path(corpus_path) if corpus_path else None
        self.index_path = Path(index_path) if index_path else None
        self.index: Optional[semsearch.AnnIndex] = None
        self.idf = semsearch.IdfTable()
        self.labels: dict[str, TechniqueSequence] = {}
        self._audio_cache: dict[str, SampleBuffer] = {}

    # -- loading ---------------------------------------------------------

    @classmethod
    def load(cls, config: AppConfig, corpus_path: Optional[str | Path] = None,
             index_path: Optional[str | Path] = None) -> "Engine":
        corpus_path = corpus_path or config.service.corpus_path
        index_path = index_path or config.service.index_path
        store = CorpusStore()
        if corpus_path and Path(corpus_path).exists():
            store = CorpusStore.load(corpus_path)
        engine = cls(config, store=store, corpus_path=corpus_path,
                     index_path=index_path)
        if corpus_path:
            engine._load_labels_sidecar()
        if index_path and Path(index_path).exists():
            engine.index, engine.idf = semsearch.load_index(index_path)
        return engine

    def _load_labels_sidecar(self) -> None:
        sidecar = labels_path(self.corpus_path)
        if not sidecar.exists():
            return
        with sidecar.open("r", encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                seq = TechniqueSequence.from_dict(json.loads(line))
                self.labels[seq.sentence_id] = seq

    def save_labels_sidecar(self) -> None:
        if not self.corpus_path:
            raise ValidationError("engine has no corpus path")
        sidecar = labels_path(self.corpus_path)
        with sidecar.open("w", encoding="utf-8") as fh:
            for sid in sorted(self.labels):
                fh.write(json.dumps(self.labels[sid].to_dict(),
                                    ensure_ascii=False) + "\n")

    # -- labels ----------------------------------------------------------

    def resolve_audio_path(self, path: str) -> Path:
        p = Path(path)
        if not p.is_absolute() and self.corpus_path is not None:
            return self.corpus_path.parent / p
        return p

    def talk_audio(self, path: str) -> SampleBuffer:
        resolved = str(self.resolve_audio_path(path))
        if resolved not in self._audio_cache:
            if len(self._audio_cache) >= 8:
                self._audio_cache.pop(next(iter(self._audio_cache)))
            self._audio_cache[resolved] = decode_wav(Path(resolved).read_bytes())
        return self._audio_cache[resolved]

    def compute_labels(self, record: SentenceRecord,
                       thresholds=None) -> TechniqueSequence:
        """Label a corpus sentence from its referenced audio span."""
        if record.audio_ref is None:
            raise ValidationError(f"sentence {record.id} has no audio")
        talk = self.talk_audio(record.audio_ref.path)
        pad = 0.05
        start = max(0.0, record.start - pad)
        clip = talk.slice_seconds(start, record.end + pad)
        acoustics = word_acoustics(clip, record, time_offset=start)
        return label_sentence(acoustics, thresholds or self.config.thresholds,
                              sentence_id=record.id)

    def labels_for(self, sentence_id: str, thresholds=None) -> TechniqueSequence:
        """Sidecar labels, else computed from audio, else all-None.

        Non-default thresholds bypass the cache entirely (no reads, no
        writes), so per-request overrides never leak into later requests.
        """
        use_cache = thresholds is None or thresholds == self.config.thresholds
        if use_cache:
            cached = self.labels.get(sentence_id)
            if cached is not None:
                return cached
        record = self.store.get(sentence_id)
        if record is None:
            raise ValidationError(f"unknown sentence {sentence_id!r}")
        if record.audio_ref is not None:
            seq = self.compute_labels(record, thresholds=thresholds)
        else:
            seq = TechniqueSequence(
                sentence_id=sentence_id,
                labels=tuple(TechniqueLabel() for _ in record.words))
        if use_cache:
            self.labels[sentence_id] = seq
        return seq

    def label_all_audio_sentences(self) -> int:
        count = 0
        for record in self.store:
            if record.audio_ref is not None and record.id not in self.labels:
                self.labels[record.id] = self.compute_labels(record)
                count += 1
        return count

    # -- index -----------------------------------------------------------

    def reindex(self) -> dict:
        """Rebuild the embedding index; the swap is atomic by assignment."""
        retrieval = self.config.retrieval
        texts = [record.text for record in self.store]
        idf = semsearch.IdfTable.build(texts)
        embedder = semsearch.HashedEmbedder(dim=retrieval.dim, idf=idf)
        new_index = None
        if len(self.store):
            vectors = [embedder.embed(record.text, item_id=record.id)
                       for record in self.store]
            new_index = semsearch.build_index(
                vectors, num_trees=retrieval.num_trees,
                leaf_capacity=retrieval.leaf_capacity, seed=retrieval.seed)
        self.index, self.idf = new_index, idf
        if self.index_path and new_index is not None:
            semsearch.save_index(new_index, idf, self.index_path)
        return {"sentences": len(self.store),
                "indexed": len(new_index) if new_index else 0}

    # -- analysis --------------------------------------------------------

    def analyze_text(self, text: str) -> list[AnalyzedSentence]:
        """Sentence records with all-None labels (no audio to analyze)."""
        tokens = text.split()
        if not tokens:
            raise ValidationError("text must contain at least one word")
        analysis_id = _analysis_id(" ".join(tokens).encode("utf-8"))
        words = [TimedWord(text=tok, start=i * NOMINAL_WORD_SECONDS,
                           end=(i + 1) * NOMINAL_WORD_SECONDS)
                 for i, tok in enumerate(tokens)]
        out = []
        for record in segment_transcript(words, talk_id=analysis_id):
            labels = TechniqueSequence(
                sentence_id=record.id,
                labels=tuple(TechniqueLabel() for _ in record.words))
            out.append(AnalyzedSentence(record=record, labels=labels))
        return out

    def analyze_audio(self, wav_bytes: bytes, timings: Sequence[TimedWord],
                      thresholds=None) -> list[AnalyzedSentence]:
        """Segment the timed transcript and label each sentence's audio.

        Analysis ids hash the audio, the timings and any threshold override,
        so identical submissions always get identical ids.
        """
        if not timings:
            raise ValidationError("timings must contain at least one word")
        validate_word_timings(timings)
        cfg = thresholds or self.config.thresholds
        buf = decode_wav(wav_bytes)
        digest = hashlib.sha1(wav_bytes)
        digest.update(json.dumps([w.to_dict() for w in timings],
                                 sort_keys=True).encode("utf-8"))
        if thresholds is not None:
            digest.update(json.dumps(cfg.to_dict(), sort_keys=True).encode("utf-8"))
        analysis_id = "q" + digest.hexdigest()[:12]
        out = []
        for record in segment_transcript(timings, talk_id=analysis_id):
            acoustics = word_acoustics(buf, record)
            labels = label_sentence(acoustics, cfg, sentence_id=record.id)
            out.append(AnalyzedSentence(record=record, labels=labels))
        return out

    # -- recommendation --------------------------------------------------

    def recommend(self, record: SentenceRecord, labels: TechniqueSequence,
                  config: Optional[AppConfig] = None) -> dict:
        """Full three-phase payload for one analyzed sentence."""
        cfg = config or self.config
        if self.index is None:
            raise ValidationError("no index built; run reindex first")
        retrieval = cfg.retrieval
        embedder = semsearch.HashedEmbedder(dim=self.index.dim, idf=self.idf)
        query_vec = embedder.embed(record.text)
        hits = semsearch.query(self.index, query_vec, k=retrieval.k,
                               search_budget=retrieval.search_budget)

        query_tokens = [w.text for w in record.words]
        query_tags = pos_tag(query_tokens)
        projections = []
        candidates = []
        word_maps: dict[str, list[Optional[int]]] = {}
        for sentence_id, cosine in hits:
            cand = self.store.get(sentence_id)
            if cand is None:
                continue
            cand_labels = self.labels_for(sentence_id, thresholds=cfg.thresholds)
            alignment = align_pos(query_tags, pos_tag([w.text for w in cand.words]),
                                  match=cfg.align.match, mismatch=cfg.align.mismatch,
                                  gap=cfg.align.gap)
            options = project_labels(alignment, cand_labels, len(query_tokens))
            word_map: list[Optional[int]] = [None] * len(query_tokens)
            for q, c in alignment.pairs:
                if q is not None:
                    word_map[q] = c
            word_maps[sentence_id] = word_map
            projections.append(options)
            candidates.append((sentence_id, options, cosine))

        summary = ngram_summary(projections, cfg.mining,
                                query_len=len(query_tokens))
        ranked = rank_examples(list(labels.labels), candidates)[:retrieval.k_table]

        return {
            "query": {
                "id": record.id,
                "text": record.text,
                "words": [w.to_dict() for w in record.words],
                "labels": [lab.to_dict() for lab in labels.labels],
            },
            "params": {
                "k": retrieval.k,
                "k_table": retrieval.k_table,
                "min_support": cfg.mining.min_support_ratio,
                "max_n": cfg.mining.max_n,
                "seed": self.index.seed,
                "dim": self.index.dim,
                "retrieved": len(candidates),
            },
            "conditions": [c.to_dict() for c in summary.conditions],
            "ngrams": summary.to_payload(),
            "examples": [
                {
                    "id": ex.sentence_id,
                    "text": self.store.get(ex.sentence_id).text,
                    "labels": [lab.to_dict() if lab is not None else None
                               for lab in ex.aligned_labels],
                    # candidate word index per query position (null = gap),
                    # so the UI can play exactly the clicked word's slice
                    "word_map": word_maps[ex.sentence_id],
                    "hamming": ex.hamming,
                    "cosine": ex.semantic_cosine,
                    "rank": ex.rank,
                }
                for ex in ranked
            ],
        }
