// Voice technique view helpers: header filtering and the one-line /
// multi-line layouts of a ranked example.

import type { RankedExample } from "./api.js";
import { labelValues, type TechniqueValue } from "./glyphs.js";

export type FilterMode = "any" | "all";

export function presentValues(example: RankedExample): Set<TechniqueValue> {
  const out = new Set<TechniqueValue>();
  for (const label of example.labels) {
    if (label === null) continue;
    for (const value of labelValues(label)) out.add(value);
  }
  return out;
}

// Client-side mirror of the server's filter semantics; survivors keep
// their ranked order.
export function filterExamples(
  examples: RankedExample[],
  required: Set<TechniqueValue>,
  mode: FilterMode = "any",
): RankedExample[] {
  if (required.size === 0) return examples.slice();
  return examples.filter((example) => {
    const present = presentValues(example);
    if (mode === "any") {
      for (const value of required) if (present.has(value)) return true;
      return false;
    }
    for (const value of required) if (!present.has(value)) return false;
    return true;
  });
}

export interface WordCell {
  queryIndex: number;
  exampleWordIndex: number | null; // index into the example's own words
  text: string | null; // the example's word; null where unaligned
  values: TechniqueValue[];
  aligned: boolean;
}

// One-line mode: the sentence as a single row of word cells. Multi-line
// mode: one row per word with room for full glyph labels. Cells follow
// query positions; word_map points each one at the example's own word so
// click-to-play hits the right slice.
export function exampleCells(example: RankedExample): WordCell[] {
  const exampleWords = example.text.split(" ");
  return example.labels.map((label, i) => {
    const candidate = example.word_map[i] ?? null;
    return {
      queryIndex: i,
      exampleWordIndex: candidate,
      text: candidate === null ? null : (exampleWords[candidate] ?? null),
      values: label === null ? [] : labelValues(label),
      aligned: label !== null,
    };
  });
}

export function lineCount(mode: "one-line" | "multi-line", cells: WordCell[]): number {
  return mode === "one-line" ? 1 : cells.length;
}
