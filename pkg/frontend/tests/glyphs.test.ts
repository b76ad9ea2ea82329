import { describe, expect, it } from "vitest";

import {
  GLYPHS,
  glyphFor,
  isTechniqueValue,
  labelValues,
  NONE_LABEL,
  TECHNIQUE_VALUES,
  type Glyph,
  type TechniqueValue,
} from "../src/glyphs.js";

describe("glyph map", () => {
  it("covers exactly the nine categories", () => {
    expect(TECHNIQUE_VALUES.sort()).toEqual(
      ["brief", "faster", "long", "louder", "master", "none", "slower",
        "softer", "stress"].sort(),
    );
    expect(TECHNIQUE_VALUES).toHaveLength(9);
  });

  it("gives every category a distinct glyph+color pair", () => {
    const pairs = TECHNIQUE_VALUES.map((v) => {
      const g = GLYPHS[v];
      return `${g.symbol}|${g.color}|${g.underline ? "u" : ""}`;
    });
    expect(new Set(pairs).size).toBe(9);
  });

  it("gives every category a distinct color", () => {
    const colors = TECHNIQUE_VALUES.map((v) => GLYPHS[v].color);
    expect(new Set(colors).size).toBe(9);
  });

  it("throws before an unmapped label could reach the DOM", () => {
    expect(() => glyphFor("whisper")).toThrow(/no glyph mapping/);
    expect(isTechniqueValue("whisper")).toBe(false);
    expect(glyphFor("stress").underline).toBe(true);
  });

  it("renders pause glyphs as one, two and three squares", () => {
    expect(GLYPHS.brief.symbol).toBe("■");
    expect(GLYPHS.master.symbol).toBe("■■");
    expect(GLYPHS.long.symbol).toBe("■■■");
  });

  it("a missing category is a build-time failure", () => {
    // @ts-expect-error: a Record over TechniqueValue without "stress" does
    // not typecheck, which is the build-time exhaustiveness guarantee.
    const incomplete: Record<TechniqueValue, Glyph> = {
      faster: GLYPHS.faster,
      slower: GLYPHS.slower,
      louder: GLYPHS.louder,
      softer: GLYPHS.softer,
      brief: GLYPHS.brief,
      master: GLYPHS.master,
      long: GLYPHS.long,
      none: GLYPHS.none,
    };
    expect(Object.keys(incomplete)).toHaveLength(8);
  });
});

describe("label helpers", () => {
  it("extracts present values in display order", () => {
    expect(
      labelValues({
        speed: "faster",
        volume: "none",
        stress: "stress",
        pause_after: "brief",
      }),
    ).toEqual(["faster", "stress", "brief"]);
  });

  it("a no-technique label has no values", () => {
    expect(labelValues(NONE_LABEL)).toEqual([]);
  });
});
