// Microphone capture at 16 kHz mono PCM16 via an AudioContext tap.
// Chunks are handed to the callback roughly every ~128 ms.

import { downsampleTo16k, floatToPcm16, TARGET_SAMPLE_RATE } from "./pcm.js";

export class MicRecorder {
  private context: AudioContext | null = null;
  private source: MediaStreamAudioSourceNode | null = null;
  private processor: ScriptProcessorNode | null = null;
  private stream: MediaStream | null = null;
  private startedAt = 0;
  private captured: Uint8Array[] = [];

  constructor(private readonly onChunk: (pcm: Uint8Array) => void) {}

  get running(): boolean {
    return this.context !== null;
  }

  elapsedSeconds(): number {
    return this.context ? this.context.currentTime - this.startedAt : 0;
  }

  async start(): Promise<void> {
    this.stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    this.context = new AudioContext();
    this.source = this.context.createMediaStreamSource(this.stream);
    this.processor = this.context.createScriptProcessor(4096, 1, 1);
    const sourceRate = this.context.sampleRate;
    this.processor.onaudioprocess = (event) => {
      const floats = event.inputBuffer.getChannelData(0);
      const pcm = floatToPcm16(downsampleTo16k(new Float32Array(floats), sourceRate));
      this.captured.push(pcm);
      this.onChunk(pcm);
    };
    this.source.connect(this.processor);
    this.processor.connect(this.context.destination);
    this.startedAt = this.context.currentTime;
    this.captured = [];
  }

  // Returns everything captured since start() as one PCM16 buffer.
  async stop(): Promise<Uint8Array> {
    this.processor?.disconnect();
    this.source?.disconnect();
    this.stream?.getTracks().forEach((track) => track.stop());
    await this.context?.close();
    this.context = null;
    this.source = null;
    this.processor = null;
    this.stream = null;
    const total = this.captured.reduce((n, c) => n + c.length, 0);
    const out = new Uint8Array(total);
    let offset = 0;
    for (const chunk of this.captured) {
      out.set(chunk, offset);
      offset += chunk.length;
    }
    return out;
  }
}

export { TARGET_SAMPLE_RATE };
