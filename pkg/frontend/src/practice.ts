// Practice session state: wire messages, attempt history, focus-word
// mismatch markers and tap-to-mark word timing collection.

import type { TimedWord } from "./api.js";
import type { TechniqueLabel } from "./glyphs.js";
import type { LiveFrame } from "./chart.js";

export interface FramesMessage {
  type: "frames";
  frames: { t: number; vol: number; f0: number }[];
}

export interface ResultMessage {
  type: "result";
  attempt: number;
  labels: { sentence_id: string; labels: TechniqueLabel[] };
  mismatches: Record<string, string[]>;
  mismatch_total: number;
  mismatched_words: number[];
  delta_vs_previous: number;
}

export interface AttemptRecord {
  index: number;
  mismatchedWords: number[];
  mismatchTotal: number;
  delta: number;
  labels: TechniqueLabel[];
  frames: LiveFrame[];
}

export function startMessage(
  words: string[],
  targets: Map<number, TechniqueLabel>,
  sampleRate: number,
): object {
  const targetObj: Record<string, TechniqueLabel> = {};
  for (const [index, label] of targets) targetObj[String(index)] = label;
  return { type: "start", words, targets: targetObj, sample_rate: sampleRate };
}

export function finishMessage(timings: TimedWord[]): object {
  return { type: "finish", word_timings: timings };
}

export class PracticeSessionState {
  sessionId: string | null = null;
  liveFrames: LiveFrame[] = [];
  baseline: { vol: number[]; f0: number[] } | null = null;
  private readonly history: AttemptRecord[] = [];

  constructor(
    readonly words: string[],
    readonly targets: Map<number, TechniqueLabel>,
  ) {}

  // Append-only attempt history.
  get attempts(): readonly AttemptRecord[] {
    return this.history;
  }

  onSession(message: { session_id: string }): void {
    this.sessionId = message.session_id;
  }

  onFrames(message: FramesMessage): LiveFrame[] {
    const fresh = message.frames.map((f) => ({ t: f.t, vol: f.vol, f0: f.f0 }));
    this.liveFrames.push(...fresh);
    return fresh;
  }

  onResult(message: ResultMessage): AttemptRecord {
    const record: AttemptRecord = {
      index: message.attempt,
      mismatchedWords: message.mismatched_words.slice(),
      mismatchTotal: message.mismatch_total,
      delta: message.delta_vs_previous,
      labels: message.labels.labels,
      frames: this.liveFrames,
    };
    this.history.push(record);
    // The finished attempt becomes the overlay baseline for the next one.
    this.baseline = {
      vol: record.frames.map((f) => f.vol),
      f0: record.frames.map((f) => f.f0),
    };
    this.liveFrames = [];
    return record;
  }

  // Indices of script words to outline with a dashed red rectangle after
  // the latest attempt (empty before any attempt).
  dashedRedWordIndices(): number[] {
    const last = this.history[this.history.length - 1];
    return last ? last.mismatchedWords.slice() : [];
  }

  // One count per attempt, in order; the usage scenario's improvement
  // shows as a decreasing sequence.
  markerCountsPerAttempt(): number[] {
    return this.history.map((a) => a.mismatchedWords.length);
  }
}

// Spacebar tap-to-mark: tap k marks the end of word k; the last word ends
// when the recording stops. With missing or unusable taps the duration is
// split uniformly instead (documented approximate fallback).
export class WordMarker {
  private taps: number[] = [];

  constructor(readonly words: string[]) {}

  tap(tSeconds: number): void {
    this.taps.push(tSeconds);
  }

  get tapCount(): number {
    return this.taps.length;
  }

  usedFallback(totalDuration: number): boolean {
    return !this.tapsUsable(totalDuration);
  }

  private tapsUsable(totalDuration: number): boolean {
    if (this.taps.length !== this.words.length - 1) return false;
    let prev = 0;
    for (const t of this.taps) {
      if (t <= prev || t >= totalDuration) return false;
      prev = t;
    }
    return true;
  }

  timings(totalDuration: number): TimedWord[] {
    if (totalDuration <= 0) throw new Error("duration must be positive");
    const bounds = this.tapsUsable(totalDuration)
      ? [0, ...this.taps, totalDuration]
      : uniformBounds(this.words.length, totalDuration);
    return this.words.map((text, i) => ({
      text,
      start: bounds[i]!,
      end: bounds[i + 1]!,
    }));
  }
}

function uniformBounds(n: number, duration: number): number[] {
  const out: number[] = [];
  for (let i = 0; i <= n; i++) out.push((i * duration) / n);
  return out;
}
