// REST client for the analysis/recommendation endpoints, plus the payload
// types the views consume. The UI talks to the service only through these
// calls and the practice WebSocket.

import type { TechniqueLabel } from "./glyphs.js";

export interface TimedWord {
  text: string;
  start: number;
  end: number;
}

export interface AnalyzedSentence {
  id: string;
  text: string;
  words: TimedWord[];
  labels: TechniqueLabel[];
}

export interface ConditionCounts {
  not_aligned: number;
  none: number;
  tech: number;
}

export interface Combo {
  labels: TechniqueLabel[];
  count: number;
  ratio: number;
}

export interface NgramWindow {
  window: { start: number; len: number };
  transactions: number;
  insufficient: boolean;
  combos: Combo[];
  conditions?: ConditionCounts;
}

export interface RankedExample {
  id: string;
  text: string;
  labels: (TechniqueLabel | null)[];
  // candidate word index per query position; null where unaligned
  word_map: (number | null)[];
  hamming: number;
  cosine: number;
  rank: number;
}

export interface RecommendationPayload {
  query: { id: string; text: string; words: TimedWord[]; labels: TechniqueLabel[] };
  params: Record<string, number | string>;
  conditions: ConditionCounts[];
  ngrams: NgramWindow[];
  examples: RankedExample[];
}

export interface RecommendOptions {
  k?: number;
  min_support?: number;
  max_n?: number;
  k_table?: number;
  thresholds?: Record<string, number>;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { code?: string; message?: string };
    if (body.code) code = body.code;
    if (body.message) message = body.message;
  } catch {
    // non-JSON error body; keep the status line
  }
  throw new ApiError(response.status, code, message);
}

export class Client {
  constructor(readonly baseUrl: string) {}

  practiceUrl(): string {
    return this.baseUrl.replace(/^http/, "ws") + "/practice";
  }

  exampleAudioUrl(sentenceId: string, wordStart?: number, wordEnd?: number): string {
    const url = new URL(
      `${this.baseUrl}/examples/${encodeURIComponent(sentenceId)}/audio`,
    );
    if (wordStart !== undefined) url.searchParams.set("word_start", String(wordStart));
    if (wordEnd !== undefined) url.searchParams.set("word_end", String(wordEnd));
    return url.toString();
  }

  async analyzeText(text: string): Promise<AnalyzedSentence[]> {
    const response = await fetch(`${this.baseUrl}/analyze`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    });
    if (!response.ok) await parseError(response);
    const body = (await response.json()) as { sentences: AnalyzedSentence[] };
    return body.sentences;
  }

  async analyzeAudio(wav: Blob, timings: TimedWord[]): Promise<AnalyzedSentence[]> {
    const form = new FormData();
    form.append("audio", wav, "input.wav");
    form.append("timings", JSON.stringify(timings));
    const response = await fetch(`${this.baseUrl}/analyze`, {
      method: "POST",
      body: form,
    });
    if (!response.ok) await parseError(response);
    const body = (await response.json()) as { sentences: AnalyzedSentence[] };
    return body.sentences;
  }

  async recommend(
    sentenceId: string,
    options: RecommendOptions = {},
  ): Promise<RecommendationPayload> {
    const response = await fetch(`${this.baseUrl}/recommend`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ sentence_id: sentenceId, ...options }),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as RecommendationPayload;
  }
}
