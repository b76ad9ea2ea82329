// Glyph + color encoding for the nine technique categories. The Record
// type is exhaustive over TechniqueValue: adding a category without a
// glyph (or misspelling one) fails the build.

export type SpeedValue = "faster" | "slower";
export type VolumeValue = "louder" | "softer";
export type PauseValue = "brief" | "master" | "long";
export type StressValue = "stress";
export type TechniqueValue =
  | SpeedValue
  | VolumeValue
  | PauseValue
  | StressValue
  | "none";

export interface Glyph {
  symbol: string;
  color: string;
  label: string;
  underline?: boolean;
}

export const GLYPHS: Record<TechniqueValue, Glyph> = {
  faster: { symbol: "»", color: "#e07a1f", label: "Faster" },
  slower: { symbol: "«", color: "#8e6cc0", label: "Slower" },
  louder: { symbol: "↥", color: "#c23b3b", label: "Louder" },
  softer: { symbol: "↧", color: "#3b7ac2", label: "Softer" },
  brief: { symbol: "■", color: "#3aa06b", label: "Brief pause" },
  master: { symbol: "■■", color: "#2c7d52", label: "Master pause" },
  long: { symbol: "■■■", color: "#1e5a3a", label: "Long pause" },
  stress: { symbol: "S", color: "#d4408c", label: "Stress", underline: true },
  none: { symbol: "■", color: "#9aa0a6", label: "No technique" },
};

export const TECHNIQUE_VALUES = Object.keys(GLYPHS) as TechniqueValue[];

export function isTechniqueValue(value: string): value is TechniqueValue {
  return Object.prototype.hasOwnProperty.call(GLYPHS, value);
}

// Runtime guard behind the compile-time one: nothing unmapped may reach
// the DOM.
export function glyphFor(value: string): Glyph {
  if (!isTechniqueValue(value)) {
    throw new Error(`no glyph mapping for technique value "${value}"`);
  }
  return GLYPHS[value];
}

export interface TechniqueLabel {
  speed: "faster" | "slower" | "none";
  volume: "louder" | "softer" | "none";
  stress: "stress" | "none";
  pause_after: "brief" | "master" | "long" | "none";
}

export const NONE_LABEL: TechniqueLabel = {
  speed: "none",
  volume: "none",
  stress: "none",
  pause_after: "none",
};

// Values present on a composite label, in display order; empty for a
// no-technique label (rendered as the gray square).
export function labelValues(label: TechniqueLabel): TechniqueValue[] {
  const out: TechniqueValue[] = [];
  if (label.speed !== "none") out.push(label.speed);
  if (label.volume !== "none") out.push(label.volume);
  if (label.stress !== "none") out.push(label.stress);
  if (label.pause_after !== "none") out.push(label.pause_after);
  return out;
}

export function labelsEqual(a: TechniqueLabel, b: TechniqueLabel): boolean {
  return (
    a.speed === b.speed &&
    a.volume === b.volume &&
    a.stress === b.stress &&
    a.pause_after === b.pause_after
  );
}
