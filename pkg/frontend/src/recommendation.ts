// Pure view-model helpers for the recommendation view: per-word condition
// bars, the n-gram hierarchy rows, hover highlighting and the arrow
// markers that flag combinations the speaker already uses.

import type {
  Combo,
  ConditionCounts,
  NgramWindow,
  RecommendationPayload,
} from "./api.js";
import { labelsEqual, type TechniqueLabel } from "./glyphs.js";

export interface BarSegment {
  kind: "tech" | "none" | "not_aligned";
  fraction: number;
}

export const SEGMENT_COLORS: Record<BarSegment["kind"], string> = {
  tech: "#4a4a4a",
  none: "#c9c9c9",
  not_aligned: "#efefef",
};

// Stacked-bar segments for one word, techniques at the bottom; fractions
// sum to 1 when anything was retrieved.
export function conditionSegments(c: ConditionCounts): BarSegment[] {
  const total = c.tech + c.none + c.not_aligned;
  if (total === 0) return [];
  return [
    { kind: "tech", fraction: c.tech / total },
    { kind: "none", fraction: c.none / total },
    { kind: "not_aligned", fraction: c.not_aligned / total },
  ];
}

// Rows of the hierarchy: n = 1 first, then 2, ... each sorted by start.
// (The server emits them in this order; sorting again keeps the view
// robust to payload reordering.)
export function hierarchyRows(ngrams: NgramWindow[]): NgramWindow[][] {
  const byLen = new Map<number, NgramWindow[]>();
  for (const w of ngrams) {
    const row = byLen.get(w.window.len) ?? [];
    row.push(w);
    byLen.set(w.window.len, row);
  }
  return [...byLen.entries()]
    .sort(([a], [b]) => a - b)
    .map(([, row]) => row.sort((a, b) => a.window.start - b.window.start));
}

// Word indices a combination spans; these get the bold red hover
// highlight.
export function comboWordIndices(w: NgramWindow): number[] {
  const out: number[] = [];
  for (let i = 0; i < w.window.len; i++) out.push(w.window.start + i);
  return out;
}

// True when the speaker's own labels already realize this combination
// (the arrow-marker condition).
export function userMatchesCombo(
  queryLabels: TechniqueLabel[],
  w: NgramWindow,
  combo: Combo,
): boolean {
  return combo.labels.every((label, offset) => {
    const mine = queryLabels[w.window.start + offset];
    return mine !== undefined && labelsEqual(mine, label);
  });
}

export interface ComboBar {
  combo: Combo;
  fraction: number;
  matchesUser: boolean;
}

export function comboBars(
  payload: RecommendationPayload,
  w: NgramWindow,
): ComboBar[] {
  return w.combos.map((combo) => ({
    combo,
    fraction: combo.ratio,
    matchesUser: userMatchesCombo(payload.query.labels, w, combo),
  }));
}

// Bars within a stack are already frequency-descending per the payload
// contract; assert it cheaply so a regression is loud in development.
export function assertSortedByRatio(w: NgramWindow): void {
  for (let i = 1; i < w.combos.length; i++) {
    if (w.combos[i]!.ratio > w.combos[i - 1]!.ratio) {
      throw new Error(
        `combos of window ${w.window.start},${w.window.len} not sorted`,
      );
    }
  }
}

export interface HoverState {
  boldRedWords: number[];
}

export function hoverCombo(w: NgramWindow): HoverState {
  return { boldRedWords: comboWordIndices(w) };
}

export const NO_HOVER: HoverState = { boldRedWords: [] };
