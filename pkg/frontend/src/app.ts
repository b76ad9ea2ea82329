// The four coordinated views: user panel, recommendation view, voice
// technique view and practice view, wired to the service.

import {
  Client,
  type AnalyzedSentence,
  type NgramWindow,
  type RankedExample,
  type RecommendationPayload,
  type TimedWord,
} from "./api.js";
import { PracticeChart, ReplayDriver, type LiveFrame } from "./chart.js";
import {
  encodeJsonFrame,
  encodePcmFrame,
  FrameReader,
  frameJson,
  FRAME_JSON,
} from "./framing.js";
import {
  glyphFor,
  labelValues,
  NONE_LABEL,
  type TechniqueLabel,
  type TechniqueValue,
} from "./glyphs.js";
import { pcm16ToWav, TARGET_SAMPLE_RATE } from "./pcm.js";
import {
  comboBars,
  conditionSegments,
  hierarchyRows,
  hoverCombo,
  NO_HOVER,
  SEGMENT_COLORS,
  type HoverState,
} from "./recommendation.js";
import { MicRecorder } from "./recorder.js";
import {
  finishMessage,
  PracticeSessionState,
  startMessage,
  WordMarker,
  type FramesMessage,
  type ResultMessage,
} from "./practice.js";
import { exampleCells, filterExamples, type FilterMode } from "./technique.js";

interface ViewState {
  sentences: AnalyzedSentence[];
  selected: AnalyzedSentence | null;
  payload: RecommendationPayload | null;
  hover: HoverState;
  hierarchyVisible: boolean;
  filter: Set<TechniqueValue>;
  filterMode: FilterMode;
  exampleMode: "one-line" | "multi-line";
  selectedExample: RankedExample | null;
  practice: PracticeSessionState | null;
}

const state: ViewState = {
  sentences: [],
  selected: null,
  payload: null,
  hover: NO_HOVER,
  hierarchyVisible: true,
  filter: new Set(),
  filterMode: "any",
  exampleMode: "one-line",
  selectedExample: null,
  practice: null,
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function client(): Client {
  const base = byId<HTMLInputElement>("server-url").value.replace(/\/$/, "");
  return new Client(base);
}

function setStatus(text: string, isError = false): void {
  const node = byId<HTMLElement>("status");
  node.textContent = text;
  node.classList.toggle("error", isError);
}

// ---------------------------------------------------------------------------
// User panel

function glyphSpan(value: TechniqueValue): HTMLElement {
  const glyph = glyphFor(value);
  const span = el("span", "glyph", glyph.symbol);
  span.style.color = glyph.color;
  if (glyph.underline) span.style.textDecoration = "underline";
  span.title = glyph.label;
  return span;
}

function labelGlyphs(label: TechniqueLabel): HTMLElement {
  const wrap = el("span", "label-glyphs");
  const values = labelValues(label);
  if (!values.length) {
    wrap.appendChild(glyphSpan("none"));
    return wrap;
  }
  for (const value of values) wrap.appendChild(glyphSpan(value));
  return wrap;
}

function renderSentenceTable(): void {
  const table = byId<HTMLElement>("sentence-table");
  table.replaceChildren();
  for (const sentence of state.sentences) {
    const row = el("div", "sentence-row");
    if (state.selected?.id === sentence.id) row.classList.add("selected");
    for (const [i, word] of sentence.words.entries()) {
      const cell = el("span", "word-cell");
      cell.appendChild(el("span", "word-text", word.text));
      cell.appendChild(labelGlyphs(sentence.labels[i] ?? NONE_LABEL));
      row.appendChild(cell);
    }
    row.addEventListener("click", () => void selectSentence(sentence));
    table.appendChild(row);
  }
}

async function selectSentence(sentence: AnalyzedSentence): Promise<void> {
  state.selected = sentence;
  renderSentenceTable();
  setStatus(`fetching recommendations for ${sentence.id}...`);
  try {
    const minSupport = Number(byId<HTMLInputElement>("min-support").value);
    const k = Number(byId<HTMLInputElement>("retrieval-k").value);
    state.payload = await client().recommend(sentence.id, {
      k,
      min_support: minSupport,
    });
    setStatus(`recommendations ready (${state.payload.params.retrieved} examples)`);
  } catch (err) {
    setStatus(String(err), true);
    state.payload = null;
  }
  renderRecommendation();
  renderTechniqueTable();
}

async function analyzeTextInput(): Promise<void> {
  const text = byId<HTMLTextAreaElement>("text-input").value.trim();
  if (!text) {
    setStatus("type a sentence first", true);
    return;
  }
  setStatus("analyzing text...");
  try {
    state.sentences = await client().analyzeText(text);
    state.selected = null;
    renderSentenceTable();
    setStatus(`analyzed ${state.sentences.length} sentence(s); click one`);
  } catch (err) {
    setStatus(String(err), true);
  }
}

async function analyzeWavUpload(file: File): Promise<void> {
  const text = byId<HTMLTextAreaElement>("text-input").value.trim();
  const words = text.split(/\s+/).filter(Boolean);
  if (!words.length) {
    setStatus("enter the spoken transcript text first", true);
    return;
  }
  setStatus("decoding upload...");
  try {
    const wavBytes = new Uint8Array(await file.arrayBuffer());
    const duration = wavDurationSeconds(wavBytes);
    const timings = uniformTimings(words, duration);
    state.sentences = await client().analyzeAudio(file, timings);
    state.selected = null;
    renderSentenceTable();
    setStatus(`analyzed ${state.sentences.length} sentence(s) from audio`);
  } catch (err) {
    setStatus(String(err), true);
  }
}

function wavDurationSeconds(bytes: Uint8Array): number {
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  const sampleRate = view.getUint32(24, true);
  const dataBytes = view.getUint32(40, true);
  return dataBytes / 2 / sampleRate;
}

function uniformTimings(words: string[], duration: number): TimedWord[] {
  const step = duration / words.length;
  return words.map((text, i) => ({
    text,
    start: i * step,
    end: (i + 1) * step,
  }));
}

// ---------------------------------------------------------------------------
// Recommendation view

function renderRecommendation(): void {
  const host = byId<HTMLElement>("recommendation-view");
  host.replaceChildren();
  const payload = state.payload;
  if (!payload) {
    host.appendChild(el("p", "hint", "analyze a sentence to see recommendations"));
    return;
  }

  // Query sentence with the speaker's own glyphs; hover targets live here.
  const queryRow = el("div", "query-row");
  for (const [i, word] of payload.query.words.entries()) {
    const cell = el("span", "word-cell");
    const wordSpan = el("span", "word-text", word.text);
    if (state.hover.boldRedWords.includes(i)) wordSpan.classList.add("hover-red");
    cell.appendChild(wordSpan);
    cell.appendChild(labelGlyphs(payload.query.labels[i] ?? NONE_LABEL));
    queryRow.appendChild(cell);
  }
  host.appendChild(queryRow);

  // Per-word condition bars.
  const barRow = el("div", "bar-row");
  for (const cond of payload.conditions) {
    const bar = el("div", "condition-bar");
    const total = cond.tech + cond.none + cond.not_aligned;
    bar.title = `with technique ${cond.tech}, none ${cond.none}, unaligned ${cond.not_aligned}`;
    for (const segment of conditionSegments(cond)) {
      const div = el("div", "segment");
      div.style.height = `${segment.fraction * 100}%`;
      div.style.background = SEGMENT_COLORS[segment.kind];
      bar.appendChild(div);
    }
    if (total < 5) bar.classList.add("insufficient");
    barRow.appendChild(bar);
  }
  host.appendChild(barRow);

  const toggle = el("button", "toggle", state.hierarchyVisible ? "hide combinations" : "show combinations");
  toggle.addEventListener("click", () => {
    state.hierarchyVisible = !state.hierarchyVisible;
    renderRecommendation();
  });
  host.appendChild(toggle);

  if (state.hierarchyVisible) host.appendChild(renderHierarchy(payload));
}

function renderHierarchy(payload: RecommendationPayload): HTMLElement {
  const wordCount = payload.query.words.length;
  const wrap = el("div", "hierarchy");
  for (const row of hierarchyRows(payload.ngrams)) {
    const rowDiv = el("div", "hierarchy-row");
    for (const windowData of row) {
      rowDiv.appendChild(renderWindowStack(payload, windowData, wordCount));
    }
    wrap.appendChild(rowDiv);
  }
  return wrap;
}

function renderWindowStack(
  payload: RecommendationPayload,
  w: NgramWindow,
  wordCount: number,
): HTMLElement {
  const stack = el("div", "window-stack");
  // Centered under its word span.
  const left = (w.window.start / wordCount) * 100;
  const width = (w.window.len / wordCount) * 100;
  stack.style.left = `${left}%`;
  stack.style.width = `${width}%`;
  if (w.insufficient) stack.classList.add("insufficient");
  for (const bar of comboBars(payload, w)) {
    const div = el("div", "combo-bar");
    div.style.height = `${Math.max(4, bar.fraction * 56)}px`;
    const glyphs = el("span", "combo-glyphs");
    for (const label of bar.combo.labels) glyphs.appendChild(labelGlyphs(label));
    div.appendChild(glyphs);
    if (bar.matchesUser) div.appendChild(el("span", "arrow-marker", "▶"));
    div.title = `${(bar.fraction * 100).toFixed(0)}% of ${w.transactions}`;
    div.addEventListener("mouseenter", () => {
      state.hover = hoverCombo(w);
      renderRecommendation();
    });
    div.addEventListener("mouseleave", () => {
      state.hover = NO_HOVER;
      renderRecommendation();
    });
    div.addEventListener("click", () => startPracticeFromCombo(payload, w));
    stack.appendChild(div);
  }
  return stack;
}

// ---------------------------------------------------------------------------
// Voice technique view

function renderTechniqueTable(): void {
  const host = byId<HTMLElement>("technique-view");
  host.replaceChildren();
  const payload = state.payload;
  if (!payload) return;

  const header = el("div", "filter-header");
  for (const value of ["faster", "slower", "louder", "softer", "stress", "brief", "master", "long"] as TechniqueValue[]) {
    const button = el("button", "filter-chip");
    button.appendChild(glyphSpan(value));
    if (state.filter.has(value)) button.classList.add("active");
    button.addEventListener("click", () => {
      if (state.filter.has(value)) state.filter.delete(value);
      else state.filter.add(value);
      renderTechniqueTable();
    });
    header.appendChild(button);
  }
  const modeButton = el("button", "toggle", `mode: ${state.exampleMode}`);
  modeButton.addEventListener("click", () => {
    state.exampleMode = state.exampleMode === "one-line" ? "multi-line" : "one-line";
    renderTechniqueTable();
  });
  header.appendChild(modeButton);
  host.appendChild(header);

  const examples = filterExamples(payload.examples, state.filter, state.filterMode);
  for (const example of examples) {
    const row = el("div", "example-row");
    const id = el("span", "example-id", `#${example.rank} ${example.id} (d=${example.hamming})`);
    id.addEventListener("click", () => void playExample(example.id));
    row.appendChild(id);

    const cells = exampleCells(example);
    const line = el("div", state.exampleMode === "one-line" ? "cells-one-line" : "cells-multi-line");
    for (const cell of cells) {
      const span = el("span", "word-cell");
      span.appendChild(el("span", "word-text", cell.text ?? "—"));
      const glyphs = el("span", "label-glyphs");
      if (!cell.aligned) glyphs.appendChild(el("span", "unaligned", "·"));
      else if (!cell.values.length) glyphs.appendChild(glyphSpan("none"));
      else for (const value of cell.values) glyphs.appendChild(glyphSpan(value));
      span.appendChild(glyphs);
      if (cell.exampleWordIndex !== null) {
        const wordIndex = cell.exampleWordIndex;
        span.addEventListener("click", () =>
          void playExample(example.id, wordIndex),
        );
      }
      line.appendChild(span);
    }
    row.appendChild(line);
    host.appendChild(row);
  }
}

async function playExample(sentenceId: string, wordIndex?: number): Promise<void> {
  const url =
    wordIndex === undefined
      ? client().exampleAudioUrl(sentenceId)
      : client().exampleAudioUrl(sentenceId, wordIndex, wordIndex);
  try {
    const audio = new Audio(url);
    await audio.play();
  } catch (err) {
    setStatus(`playback failed: ${String(err)}`, true);
  }
}

// ---------------------------------------------------------------------------
// Practice view

let practiceSocket: WebSocket | null = null;
let practiceChart: PracticeChart | null = null;
let practiceRecorder: MicRecorder | null = null;
let wordMarker: WordMarker | null = null;

function startPracticeFromCombo(payload: RecommendationPayload, w: NgramWindow): void {
  const words = payload.query.words.map((word) => word.text);
  const targets = new Map<number, TechniqueLabel>();
  const combo = w.combos[0];
  if (combo) {
    combo.labels.forEach((label, offset) => {
      targets.set(w.window.start + offset, label);
    });
  }
  state.practice = new PracticeSessionState(words, targets);
  renderPracticeView();
}

function renderPracticeView(): void {
  const host = byId<HTMLElement>("practice-script");
  host.replaceChildren();
  const practice = state.practice;
  if (!practice) {
    host.appendChild(el("p", "hint", "pick a combination in the recommendation view"));
    return;
  }
  const dashed = new Set(practice.dashedRedWordIndices());
  for (const [i, word] of practice.words.entries()) {
    const cell = el("span", "word-cell", word);
    const target = practice.targets.get(i);
    if (target) {
      cell.classList.add("focus-word");
      cell.appendChild(labelGlyphs(target));
    }
    if (dashed.has(i)) cell.classList.add("mismatch");
    host.appendChild(cell);
  }
  const historyHost = byId<HTMLElement>("practice-history");
  historyHost.replaceChildren();
  for (const attempt of practice.attempts) {
    historyHost.appendChild(
      el(
        "div",
        "attempt",
        `attempt ${attempt.index}: ${attempt.mismatchedWords.length} marker(s), ` +
          `delta ${attempt.delta}`,
      ),
    );
  }
}

async function startPracticeRecording(): Promise<void> {
  const practice = state.practice;
  if (!practice) {
    setStatus("no practice target selected", true);
    return;
  }
  const canvas = byId<HTMLCanvasElement>("practice-canvas");
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  practiceChart = new PracticeChart(ctx, canvas.width, canvas.height);
  if (practice.baseline) {
    practiceChart.setBaseline(practice.baseline.vol, practice.baseline.f0);
  }
  wordMarker = new WordMarker(practice.words);

  const reader = new FrameReader();
  practiceSocket = new WebSocket(client().practiceUrl());
  practiceSocket.binaryType = "arraybuffer";
  practiceSocket.onmessage = (event) => {
    for (const frame of reader.feed(new Uint8Array(event.data as ArrayBuffer))) {
      if (frame.kind !== FRAME_JSON) continue;
      const message = frameJson(frame) as { type: string };
      if (message.type === "session") {
        practice.onSession(message as { session_id: string } & { type: string });
      } else if (message.type === "frames") {
        const fresh = practice.onFrames(message as FramesMessage);
        practiceChart?.pushAll(fresh as LiveFrame[]);
      } else if (message.type === "result") {
        practice.onResult(message as ResultMessage);
        renderPracticeView();
        setStatus("attempt scored");
      } else if (message.type === "error") {
        setStatus(`practice stream error: ${JSON.stringify(message)}`, true);
      }
    }
  };
  practiceSocket.onopen = () => {
    practiceSocket?.send(
      encodeJsonFrame(
        startMessage(practice.words, practice.targets, TARGET_SAMPLE_RATE),
      ) as unknown as ArrayBuffer,
    );
  };

  practiceRecorder = new MicRecorder((pcm) => {
    if (practiceSocket?.readyState === WebSocket.OPEN) {
      practiceSocket.send(encodePcmFrame(pcm) as unknown as ArrayBuffer);
    }
  });
  await practiceRecorder.start();
  animatePractice();
  setStatus("recording practice; space marks the next word boundary");
}

function animatePractice(): void {
  const chart = practiceChart;
  if (!chart) return;
  chart.renderIfDirty();
  if (practiceRecorder?.running) requestAnimationFrame(animatePractice);
}

async function finishPracticeAttempt(): Promise<void> {
  const practice = state.practice;
  if (!practice || !practiceRecorder || !wordMarker || !practiceSocket) return;
  const duration = practiceRecorder.elapsedSeconds();
  await practiceRecorder.stop();
  const timings = wordMarker.timings(Math.max(duration, 0.1));
  practiceSocket.send(encodeJsonFrame(finishMessage(timings)) as unknown as ArrayBuffer);
  practiceChart?.clearAttempt();
}

// ---------------------------------------------------------------------------
// Wiring

export function mount(): void {
  byId<HTMLButtonElement>("analyze-text").addEventListener("click", () => {
    void analyzeTextInput();
  });
  byId<HTMLInputElement>("wav-upload").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) void analyzeWavUpload(file);
  });
  byId<HTMLButtonElement>("practice-start").addEventListener("click", () => {
    void startPracticeRecording();
  });
  byId<HTMLButtonElement>("practice-finish").addEventListener("click", () => {
    void finishPracticeAttempt();
  });
  document.addEventListener("keydown", (event) => {
    if (event.code === "Space" && practiceRecorder?.running && wordMarker) {
      wordMarker.tap(practiceRecorder.elapsedSeconds());
      event.preventDefault();
    }
  });
  renderSentenceTable();
  renderRecommendation();
  renderPracticeView();
  setStatus("ready");
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount();
}

export { ReplayDriver };
