"""HTTP + streaming facade over the engine.

REST endpoints: POST /analyze, POST /recommend, GET /examples/{id}/audio,
POST /corpus/ingest, POST /corpus/reindex. The practice stream is the
framed protocol of wire.py carried over the /practice WebSocket (binary
messages are raw protocol bytes, split or batched arbitrarily).

Errors are structured JSON {code, message, field?}.
"""

from __future__ import annotations

import json
import threading
import time
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request, Response, WebSocket, WebSocketDisconnect
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from . import wire
from .audio import SampleBuffer, encode_wav
from .config import AppConfig, load_config, with_request_overrides
from .corpus import TimedWord, corpus_stats
from .errors import (
    AudioFormatError,
    DuplicateTalkError,
    SessionStateError,
    ValidationError,
)
from .feedback import PracticeRegistry, PracticeSession, PracticeTarget
from .labeling import TechniqueLabel, ThresholdConfig
from .pipeline import AnalyzedSentence, Engine, to_canonical_json

PCM_BYTES_PER_SAMPLE = 2


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str,
                 field: Optional[str] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.field = field

    def to_response(self) -> JSONResponse:
        body = {"code": self.code, "message": self.message}
        if self.field:
            body["field"] = self.field
        return JSONResponse(status_code=self.status, content=body)


class SessionStore:
    """Analyzed sentences with a TTL; purged lazily on access."""

    def __init__(self, ttl_seconds: int):
        self.ttl = ttl_seconds
        self._items: dict[str, tuple[float, AnalyzedSentence]] = {}

    def put(self, analyzed: AnalyzedSentence) -> None:
        self._items[analyzed.record.id] = (time.monotonic() + self.ttl, analyzed)

    def get(self, sentence_id: str) -> Optional[AnalyzedSentence]:
        entry = self._items.get(sentence_id)
        if entry is None:
            return None
        expires, analyzed = entry
        if time.monotonic() > expires:
            del self._items[sentence_id]
            return None
        return analyzed


def _parse_timings(data) -> list[TimedWord]:
    if not isinstance(data, list) or not data:
        raise ApiError(400, "validation", "timings must be a non-empty list",
                       field="timings")
    try:
        return [TimedWord(text=str(w["text"]), start=float(w["start"]),
                          end=float(w["end"])) for w in data]
    except (KeyError, TypeError, ValueError) as exc:
        raise ApiError(400, "validation", f"malformed timing entry: {exc}",
                       field="timings")


def _parse_thresholds(data, base: ThresholdConfig) -> ThresholdConfig:
    if data is None:
        return base
    if not isinstance(data, dict):
        raise ApiError(400, "validation", "thresholds must be an object",
                       field="thresholds")
    try:
        return ThresholdConfig.from_dict({**base.to_dict(), **data})
    except ValidationError as exc:
        raise ApiError(400, "validation", str(exc), field="thresholds")


def _parse_label(data) -> TechniqueLabel:
    if not isinstance(data, dict):
        raise ValidationError("label must be an object")
    return TechniqueLabel.from_dict(data)


def create_app(config: Optional[AppConfig] = None,
               engine: Optional[Engine] = None) -> FastAPI:
    config = config or load_config()
    engine = engine or Engine.load(config)
    app = FastAPI(title="modcoach", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    app.state.engine = engine
    app.state.config = config
    app.state.sessions = SessionStore(config.service.session_ttl_seconds)
    app.state.practice = PracticeRegistry()
    app.state.reindex_lock = threading.Lock()

    @app.exception_handler(ApiError)
    async def _api_error(_request, exc: ApiError):
        return exc.to_response()

    @app.exception_handler(ValidationError)
    async def _validation_error(_request, exc: ValidationError):
        return JSONResponse(status_code=400,
                            content={"code": "validation", "message": str(exc)})

    @app.exception_handler(AudioFormatError)
    async def _audio_error(_request, exc: AudioFormatError):
        return JSONResponse(status_code=400,
                            content={"code": "audio_format", "message": str(exc)})

    # -- analysis --------------------------------------------------------

    @app.post("/analyze")
    async def analyze(request: Request) -> Response:
        limit = config.service.max_upload_bytes
        declared = request.headers.get("content-length")
        if declared and int(declared) > limit:
            raise ApiError(413, "too_large",
                           f"request exceeds {limit} bytes")
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/"):
            sentences = await _analyze_multipart(request, limit)
        else:
            sentences = await _analyze_text(request, limit)
        for analyzed in sentences:
            app.state.sessions.put(analyzed)
        payload = {"sentences": [a.to_dict() for a in sentences]}
        return Response(content=to_canonical_json(payload),
                        media_type="application/json")

    async def _analyze_text(request: Request, limit: int) -> list[AnalyzedSentence]:
        body = await request.body()
        if len(body) > limit:
            raise ApiError(413, "too_large", f"request exceeds {limit} bytes")
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/json"):
            try:
                data = json.loads(body)
            except json.JSONDecodeError as exc:
                raise ApiError(400, "validation", f"bad JSON body: {exc}")
            text = data.get("text") if isinstance(data, dict) else None
        else:
            text = body.decode("utf-8", errors="replace")
        if not text or not text.strip():
            raise ApiError(400, "validation", "no text to analyze", field="text")
        return engine.analyze_text(text)

    async def _analyze_multipart(request: Request,
                                 limit: int) -> list[AnalyzedSentence]:
        form = await request.form()
        audio = form.get("audio")
        if audio is None:
            raise ApiError(400, "validation", "multipart field 'audio' required",
                           field="audio")
        wav_bytes = await audio.read()
        if len(wav_bytes) > limit:
            raise ApiError(413, "too_large", f"audio exceeds {limit} bytes")
        raw_timings = form.get("timings")
        if raw_timings is None:
            raise ApiError(400, "validation", "multipart field 'timings' required",
                           field="timings")
        if hasattr(raw_timings, "read"):
            raw_timings = (await raw_timings.read()).decode("utf-8")
        try:
            timing_data = json.loads(raw_timings)
        except json.JSONDecodeError as exc:
            raise ApiError(400, "validation", f"timings is not JSON: {exc}",
                           field="timings")
        timings = _parse_timings(timing_data)

        raw_thresholds = form.get("thresholds")
        thresholds = None
        if raw_thresholds is not None:
            if hasattr(raw_thresholds, "read"):
                raw_thresholds = (await raw_thresholds.read()).decode("utf-8")
            try:
                thresholds = _parse_thresholds(json.loads(raw_thresholds),
                                               config.thresholds)
            except json.JSONDecodeError as exc:
                raise ApiError(400, "validation", f"thresholds is not JSON: {exc}",
                               field="thresholds")
        return engine.analyze_audio(wav_bytes, timings, thresholds=thresholds)

    # -- recommendation ---------------------------------------------------

    @app.post("/recommend")
    async def recommend(request: Request) -> Response:
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise ApiError(400, "validation", f"bad JSON body: {exc}")
        sentence_id = body.get("sentence_id")
        if not sentence_id:
            raise ApiError(400, "validation", "sentence_id required",
                           field="sentence_id")

        k = body.get("k")
        if k is not None and (not isinstance(k, int) or k < 1):
            raise ApiError(400, "validation", "k must be an integer >= 1",
                           field="k")
        min_support = body.get("min_support")
        if min_support is not None and not (0 < float(min_support) <= 1):
            raise ApiError(400, "validation", "min_support must be in (0, 1]",
                           field="min_support")
        max_n = body.get("max_n")
        if max_n is not None and (not isinstance(max_n, int) or max_n < 1):
            raise ApiError(400, "validation", "max_n must be an integer >= 1",
                           field="max_n")
        k_table = body.get("k_table")
        search_budget = body.get("search_budget")
        thresholds = body.get("thresholds")
        if thresholds is not None:
            _parse_thresholds(thresholds, config.thresholds)

        analyzed = app.state.sessions.get(sentence_id)
        if analyzed is None:
            raise ApiError(404, "unknown_sentence",
                           f"sentence {sentence_id!r} was not analyzed (or expired)")
        if engine.index is None:
            raise ApiError(409, "no_index", "corpus index not built; POST /corpus/reindex")

        cfg = with_request_overrides(
            config, thresholds=thresholds, min_support=min_support, max_n=max_n,
            k=k, k_table=k_table, search_budget=search_budget)
        payload = engine.recommend(analyzed.record, analyzed.labels, cfg)
        return Response(content=to_canonical_json(payload),
                        media_type="application/json")

    # -- example audio ----------------------------------------------------

    @app.get("/examples/{sentence_id}/audio")
    async def example_audio(sentence_id: str, word_start: Optional[int] = None,
                            word_end: Optional[int] = None) -> Response:
        record = engine.store.get(sentence_id)
        if record is None:
            raise ApiError(404, "unknown_sentence", f"no sentence {sentence_id!r}")
        if record.audio_ref is None:
            raise ApiError(404, "no_audio", f"sentence {sentence_id!r} has no audio")
        i = 0 if word_start is None else word_start
        j = len(record.words) - 1 if word_end is None else word_end
        if j < i or i < 0 or j >= len(record.words):
            raise ApiError(416, "bad_word_range",
                           f"word range [{i}, {j}] invalid for "
                           f"{len(record.words)} words")
        talk = engine.talk_audio(record.audio_ref.path)
        start = max(record.start, record.words[i].start - 0.1)
        end = min(record.end, record.words[j].end + 0.1)
        clip = talk.slice_seconds(start, end)
        return Response(content=encode_wav(clip), media_type="audio/wav")

    # -- corpus administration --------------------------------------------

    def _check_admin(request: Request) -> None:
        token = config.service.admin_token
        if token and request.headers.get("x-admin-token") != token:
            raise ApiError(401, "unauthorized", "admin token required")

    @app.post("/corpus/ingest")
    async def corpus_ingest(request: Request) -> dict:
        _check_admin(request)
        try:
            body = json.loads(await request.body())
        except json.JSONDecodeError as exc:
            raise ApiError(400, "validation", f"bad JSON body: {exc}")
        talk_id = body.get("talk_id")
        if not talk_id:
            raise ApiError(400, "validation", "talk_id required", field="talk_id")
        words = _parse_timings(body.get("words"))
        audio_path = body.get("audio_path")
        sample_rate = body.get("sample_rate")
        if audio_path and not sample_rate:
            import wave
            resolved = engine.resolve_audio_path(audio_path)
            try:
                with wave.open(str(resolved), "rb") as fh:
                    sample_rate = fh.getframerate()
            except (OSError, wave.Error) as exc:
                raise ApiError(400, "validation",
                               f"cannot read audio {audio_path}: {exc}",
                               field="audio_path")
        try:
            sentences = engine.store.ingest_talk(
                talk_id, words, audio_path=audio_path, sample_rate=sample_rate)
        except DuplicateTalkError as exc:
            raise ApiError(409, "duplicate_talk", str(exc), field="talk_id")
        if audio_path:
            for record in sentences:
                engine.labels[record.id] = engine.compute_labels(record)
        if engine.corpus_path:
            engine.store.save(engine.corpus_path)
            engine.save_labels_sidecar()
        stats = corpus_stats(engine.store)
        return {"status": "ok", "ingested_sentences": len(sentences),
                "stats": stats.to_dict()}

    @app.post("/corpus/reindex")
    async def corpus_reindex(request: Request) -> dict:
        _check_admin(request)
        if not app.state.reindex_lock.acquire(blocking=False):
            raise ApiError(409, "reindex_running", "a reindex is already running")
        try:
            result = engine.reindex()
        finally:
            app.state.reindex_lock.release()
        return {"status": "completed", **result}

    # -- practice stream ----------------------------------------------------

    @app.websocket("/practice")
    async def practice(ws: WebSocket) -> None:
        await ws.accept()
        protocol = PracticeProtocol(app.state.practice, config.thresholds)
        decoder = wire.FrameDecoder()
        try:
            while True:
                data = await ws.receive_bytes()
                try:
                    frames = decoder.feed(data)
                except ValidationError as exc:
                    await ws.send_bytes(wire.encode_json_frame(
                        {"type": "error", "code": "bad_frame", "message": str(exc)}))
                    break
                out = bytearray()
                done = False
                for frame in frames:
                    replies, done = protocol.handle(frame)
                    for reply in replies:
                        out.extend(reply)
                    if done:
                        break
                if out:
                    await ws.send_bytes(bytes(out))
                if done:
                    break
        except WebSocketDisconnect:
            pass
        finally:
            protocol.shutdown()
            try:
                await ws.close()
            except Exception:
                pass

    return app


class PracticeProtocol:
    """Framed-protocol state machine for one practice stream.

    Transport-agnostic: handle() maps one decoded frame to encoded reply
    frames plus a close flag, so tests can drive it without a socket.
    """

    def __init__(self, registry: PracticeRegistry,
                 default_thresholds: ThresholdConfig = ThresholdConfig()):
        self.registry = registry
        self.default_thresholds = default_thresholds
        self.session: Optional[PracticeSession] = None
        self.closed = False

    def handle(self, frame: wire.Frame) -> tuple[list[bytes], bool]:
        if self.closed:
            return [], True
        try:
            if frame.is_json:
                return self._handle_control(frame.json())
            return self._handle_pcm(frame.payload)
        except (ValidationError, SessionStateError) as exc:
            return self._fail("validation", str(exc))
        except (KeyError, TypeError, ValueError) as exc:
            return self._fail("protocol", f"malformed message: {exc}")

    def _fail(self, code: str, message: str) -> tuple[list[bytes], bool]:
        self.closed = True
        return [wire.encode_json_frame(
            {"type": "error", "code": code, "message": message})], True

    def _handle_control(self, message: dict) -> tuple[list[bytes], bool]:
        kind = message.get("type")
        if kind == "start":
            if self.session is not None:
                return self._fail("protocol", "session already started")
            words = message["words"]
            if not isinstance(words, list) or not words:
                raise ValidationError("words must be a non-empty list")
            targets = {int(i): _parse_label(lab)
                       for i, lab in message.get("targets", {}).items()}
            thresholds = self.default_thresholds
            if message.get("thresholds"):
                thresholds = ThresholdConfig.from_dict(
                    {**thresholds.to_dict(), **message["thresholds"]})
            target = PracticeTarget(words=tuple(str(w) for w in words),
                                    targets=targets)
            sample_rate = int(message.get("sample_rate", 16000))
            session_id = self.registry.start_session(target, cfg=thresholds,
                                                     sample_rate=sample_rate)
            self.session = self.registry.get(session_id)
            return [wire.encode_json_frame(
                {"type": "session", "session_id": session_id, "attempt": 0})], False
        if kind == "finish":
            session = self._require_session()
            timings = [TimedWord(text=str(w["text"]), start=float(w["start"]),
                                 end=float(w["end"]))
                       for w in message["word_timings"]]
            result = session.finish_attempt(timings)
            return [wire.encode_json_frame(
                {"type": "result", **result.to_dict()})], False
        if kind == "baseline":
            session = self._require_session()
            baseline = session.get_baseline()
            if baseline is None:
                reply = {"type": "baseline", "empty": True, "vol": [], "f0": []}
            else:
                reply = {"type": "baseline", "empty": False,
                         "vol": baseline[0], "f0": baseline[1]}
            return [wire.encode_json_frame(reply)], False
        if kind == "close":
            self.closed = True
            return [wire.encode_json_frame({"type": "closed"})], True
        return self._fail("protocol", f"unknown control type {kind!r}")

    def _handle_pcm(self, payload: bytes) -> tuple[list[bytes], bool]:
        session = self._require_session()
        if len(payload) % PCM_BYTES_PER_SAMPLE:
            raise ValidationError("PCM payload must be whole 16-bit samples")
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
        frames = session.push_audio(SampleBuffer(samples, session.sample_rate))
        return [wire.encode_json_frame(
            {"type": "frames", "frames": [f.to_dict() for f in frames]})], False

    def _require_session(self) -> PracticeSession:
        if self.session is None:
            raise ValidationError("start the session first")
        return self.session

    def shutdown(self) -> None:
        self.closed = True
        if self.session is not None:
            self.registry.close(self.session.id)
