// Client side of the practice stream's framed protocol: 4-byte big-endian
// length, then a one-byte type ('J' JSON control, 'P' PCM16 audio), then
// the payload. Matches the server codec byte for byte.

export const FRAME_JSON = 0x4a; // 'J'
export const FRAME_PCM = 0x50; // 'P'

export interface WireFrame {
  kind: number;
  payload: Uint8Array;
}

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function encodeJsonFrame(message: unknown): Uint8Array {
  const payload = encoder.encode(JSON.stringify(message));
  return packFrame(FRAME_JSON, payload);
}

export function encodePcmFrame(pcm: Uint8Array): Uint8Array {
  return packFrame(FRAME_PCM, pcm);
}

function packFrame(kind: number, payload: Uint8Array): Uint8Array {
  const frame = new Uint8Array(4 + 1 + payload.length);
  new DataView(frame.buffer).setUint32(0, payload.length + 1, false);
  frame[4] = kind;
  frame.set(payload, 5);
  return frame;
}

export function frameJson(frame: WireFrame): unknown {
  return JSON.parse(decoder.decode(frame.payload));
}

export class FrameReader {
  private buffer = new Uint8Array(0);

  // Feed raw bytes (a WebSocket message, possibly a partial or batched
  // stream chunk); returns every completed frame.
  feed(data: Uint8Array): WireFrame[] {
    const merged = new Uint8Array(this.buffer.length + data.length);
    merged.set(this.buffer, 0);
    merged.set(data, this.buffer.length);
    this.buffer = merged;

    const frames: WireFrame[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const view = new DataView(
        this.buffer.buffer,
        this.buffer.byteOffset,
        this.buffer.byteLength,
      );
      const length = view.getUint32(0, false);
      if (length < 1) throw new Error(`bad frame length ${length}`);
      if (this.buffer.length < 4 + length) break;
      const kind = this.buffer[4]!;
      if (kind !== FRAME_JSON && kind !== FRAME_PCM) {
        throw new Error(`unknown frame type 0x${kind.toString(16)}`);
      }
      frames.push({
        kind,
        payload: this.buffer.slice(5, 4 + length),
      });
      this.buffer = this.buffer.slice(4 + length);
    }
    return frames;
  }

  get pendingBytes(): number {
    return this.buffer.length;
  }
}
