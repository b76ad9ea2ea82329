"""Batch workflows: build corpora, compute labels, query, mine, serve.

Exit codes: 0 success, 1 data/runtime error, 2 usage error (argparse).
JSON output is the machine contract; table output is for reading.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import load_config
from .corpus import CorpusStore, TimedWord, corpus_stats
from .errors import AudioFormatError, ValidationError
from .pipeline import Engine, to_canonical_json

GLYPHS = {"faster": ">>", "slower": "<<", "louder": "^", "softer": "v",
          "stress": "S", "brief": "#", "master": "##", "long": "###",
          "none": "."}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, AudioFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="modcoach",
        description="Voice modulation analysis, recommendation and practice tools.")
    parser.add_argument("--config", help="JSON config file", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    corpus = sub.add_parser("corpus", help="corpus management")
    corpus_sub = corpus.add_subparsers(dest="corpus_command", required=True)
    build = corpus_sub.add_parser("build", help="build a corpus from transcripts")
    build.add_argument("transcripts_dir")
    build.add_argument("-o", "--output", required=True, help="corpus JSONL path")
    build.add_argument("--force", action="store_true",
                       help="overwrite an existing corpus file")
    build.set_defaults(func=cmd_corpus_build)

    reindex = sub.add_parser("reindex", help="(re)build the embedding index")
    reindex.add_argument("--corpus", required=True)
    reindex.add_argument("-o", "--output", help="index path "
                         "(default: <corpus>.index.json)")
    reindex.set_defaults(func=cmd_reindex)

    analyze = sub.add_parser("analyze", help="label a WAV with word timings")
    analyze.add_argument("wav")
    analyze.add_argument("--timings", required=True,
                         help="JSON file: [{text,start,end}, ...]")
    analyze.add_argument("--format", choices=("json", "table"), default="table")
    analyze.set_defaults(func=cmd_analyze)

    recommend = sub.add_parser("recommend", help="recommendations for a sentence")
    recommend.add_argument("text")
    recommend.add_argument("--corpus", required=True)
    recommend.add_argument("--index", help="index path "
                           "(default: <corpus>.index.json)")
    recommend.add_argument("-k", type=int, default=None,
                           help="retrieved sentence count")
    recommend.add_argument("--min-support", type=float, default=None)
    recommend.add_argument("--max-n", type=int, default=None)
    recommend.add_argument("--k-table", type=int, default=None)
    recommend.set_defaults(func=cmd_recommend)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--corpus")
    serve.add_argument("--index")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)

    return parser


def default_index_path(corpus: str) -> str:
    return f"{corpus}.index.json"


def cmd_corpus_build(args) -> int:
    out_path = Path(args.output)
    if out_path.exists() and not args.force:
        print(f"error: {out_path} exists (use --force to overwrite)",
              file=sys.stderr)
        return 1
    transcripts_dir = Path(args.transcripts_dir)
    if not transcripts_dir.is_dir():
        print(f"error: {transcripts_dir} is not a directory", file=sys.stderr)
        return 1

    store = CorpusStore()
    talks = []
    for path in sorted(transcripts_dir.glob("*.json")):
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            print(f"error: {path}:{exc.lineno}: {exc.msg}", file=sys.stderr)
            return 1
        try:
            talk = _ingest_transcript(store, data, path, transcripts_dir)
        except ValidationError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 1
        talks.append(talk)

    store.save(out_path)

    config = load_config(args.config)
    engine = Engine(config, store=store, corpus_path=out_path)
    labeled = 0
    for record in store:
        if record.audio_ref is not None:
            engine.labels[record.id] = engine.compute_labels(record)
            labeled += 1
    if labeled:
        engine.save_labels_sidecar()

    stats = corpus_stats(store)
    print(json.dumps(stats.to_dict(), indent=2))
    return 0


def _ingest_transcript(store: CorpusStore, data: dict, path: Path,
                       root: Path) -> str:
    talk_id = data.get("talk_id") or path.stem
    words_data = data.get("words")
    if not isinstance(words_data, list) or not words_data:
        raise ValidationError("transcript needs a non-empty 'words' list")
    words = [TimedWord(text=str(w["text"]), start=float(w["start"]),
                       end=float(w["end"])) for w in words_data]
    audio = data.get("audio")
    audio_path = None
    sample_rate = None
    if audio:
        resolved = (root / audio) if not Path(audio).is_absolute() else Path(audio)
        if not resolved.exists():
            raise ValidationError(f"audio file {resolved} not found")
        audio_path = str(resolved.resolve())
        sample_rate = data.get("sample_rate")
        if sample_rate is None:
            import wave
            with wave.open(audio_path, "rb") as fh:
                sample_rate = fh.getframerate()
    store.ingest_talk(talk_id, words, audio_path=audio_path,
                      sample_rate=sample_rate)
    return talk_id


def cmd_reindex(args) -> int:
    config = load_config(args.config)
    index_path = args.output or default_index_path(args.corpus)
    engine = Engine.load(config, corpus_path=args.corpus, index_path=index_path)
    result = engine.reindex()
    engine.label_all_audio_sentences()
    if engine.labels:
        engine.save_labels_sidecar()
    print(json.dumps({"status": "completed", **result,
                      "index_path": str(index_path)}, indent=2))
    return 0


def cmd_analyze(args) -> int:
    config = load_config(args.config)
    wav_bytes = Path(args.wav).read_bytes()
    timing_data = json.loads(Path(args.timings).read_text(encoding="utf-8"))
    timings = [TimedWord(text=str(w["text"]), start=float(w["start"]),
                         end=float(w["end"])) for w in timing_data]
    engine = Engine(config)
    sentences = engine.analyze_audio(wav_bytes, timings)
    if args.format == "json":
        payload = {"sentences": [a.to_dict() for a in sentences]}
        sys.stdout.write(to_canonical_json(payload).decode("utf-8") + "\n")
        return 0
    for analyzed in sentences:
        print(analyzed.record.id)
        for word, label in zip(analyzed.record.words, analyzed.labels.labels):
            marks = " ".join(
                GLYPHS[v] for v in label.as_tuple() if v != "none") or "-"
            print(f"  {word.text:<20} {marks}")
    return 0


def cmd_recommend(args) -> int:
    config = load_config(args.config)
    index_path = args.index or default_index_path(args.corpus)
    if not Path(index_path).exists():
        print(f"error: no index at {index_path}; run `modcoach reindex "
              f"--corpus {args.corpus}` first", file=sys.stderr)
        return 1
    engine = Engine.load(config, corpus_path=args.corpus, index_path=index_path)

    from .config import with_request_overrides
    cfg = with_request_overrides(config, min_support=args.min_support,
                                 max_n=args.max_n, k=args.k,
                                 k_table=args.k_table)
    if args.k is not None and args.k < 1:
        print("error: -k must be >= 1", file=sys.stderr)
        return 1

    analyzed = engine.analyze_text(args.text)
    if len(analyzed) != 1:
        print(f"note: input segments into {len(analyzed)} sentences; "
              f"recommending for the first", file=sys.stderr)
    first = analyzed[0]
    payload = engine.recommend(first.record, first.labels, cfg)
    sys.stdout.write(to_canonical_json(payload).decode("utf-8") + "\n")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    engine = Engine.load(config, corpus_path=args.corpus, index_path=args.index)
    app = create_app(config, engine=engine)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
