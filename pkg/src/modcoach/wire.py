"""Framed streaming protocol for the practice endpoint.

Every message is a 4-byte big-endian length N followed by N payload bytes.
The first payload byte is the frame type:

* b'J' - UTF-8 JSON control frame (start / finish / baseline / close and
         the server's session / frames / result / error replies)
* b'P' - binary PCM16 little-endian mono audio samples

The codec is transport-agnostic: any ordered byte stream (WebSocket binary
messages, a raw socket) can carry it, split or batched arbitrarily.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

from .errors import ValidationError

FRAME_JSON = ord("J")
FRAME_PCM = ord("P")

MAX_FRAME_BYTES = 16 * 1024 * 1024

_LEN = struct.Struct(">I")


@dataclass(frozen=True)
class Frame:
    kind: int
    payload: bytes

    @property
    def is_json(self) -> bool:
        return self.kind == FRAME_JSON

    def json(self) -> dict:
        return json.loads(self.payload.decode("utf-8"))


def encode_json_frame(message: dict) -> bytes:
    payload = json.dumps(message, separators=(",", ":")).encode("utf-8")
    return _LEN.pack(len(payload) + 1) + bytes([FRAME_JSON]) + payload


def encode_pcm_frame(pcm: bytes) -> bytes:
    return _LEN.pack(len(pcm) + 1) + bytes([FRAME_PCM]) + pcm


@dataclass
class FrameDecoder:
    """Incremental decoder; feed() returns every frame completed so far."""

    _buffer: bytearray = field(default_factory=bytearray)

    def feed(self, data: bytes) -> list[Frame]:
        self._buffer.extend(data)
        frames = []
        while True:
            if len(self._buffer) < 4:
                break
            (length,) = _LEN.unpack(bytes(self._buffer[:4]))
            if length < 1 or length > MAX_FRAME_BYTES:
                raise ValidationError(f"bad frame length {length}")
            if len(self._buffer) < 4 + length:
                break
            body = bytes(self._buffer[4:4 + length])
            del self._buffer[:4 + length]
            kind = body[0]
            if kind not in (FRAME_JSON, FRAME_PCM):
                raise ValidationError(f"unknown frame type {kind:#x}")
            frames.append(Frame(kind=kind, payload=body[1:]))
        return frames

    @property
    def pending_bytes(self) -> int:
        return len(self._buffer)
