import { describe, expect, it } from "vitest";

import {
  REGISTRY,
  commentSpans,
  liveIndex,
  parseFragments,
  syntaxFor,
} from "../src/fragments.js";
import { loadVectors } from "./helpers.js";

interface FragmentVectors {
  cases: Array<{
    language: string;
    source: string;
    fragments: Array<{
      wholeRange: [number, number];
      kind: string;
      variants: Array<{ text: string; live: boolean; pieces: [number, number][] }>;
    }>;
  }>;
}

const vectors = loadVectors<FragmentVectors>("fragments.json");

function fragJson(source: string, language: string) {
  return parseFragments(source, syntaxFor(language)).map((f) => ({
    wholeRange: [f.wholeRange[0], f.wholeRange[1]],
    kind: f.kind,
    variants: f.variants.map((v) => ({
      text: v.text,
      live: v.live,
      pieces: v.pieces.map(([s, e]) => [s, e]),
    })),
  }));
}

describe("fragment vectors", () => {
  it("parses every fixture exactly like the server", () => {
    for (const c of vectors.cases) {
      expect(fragJson(c.source, c.language)).toEqual(c.fragments);
    }
  });
});

describe("fragment parsing", () => {
  it("treats both construct spellings as the same variant sequence", () => {
    const scala = REGISTRY["scala"];
    const a = parseFragments("val x = /*(*/???/*|3 * 7)*/\n", scala);
    const b = parseFragments("val x = /*(???|*/3 * 7/*)*/\n", scala);
    expect(a).toHaveLength(1);
    expect(b).toHaveLength(1);
    expect(a[0].variants.map((v) => v.text)).toEqual(["???", "3 * 7"]);
    expect(b[0].variants.map((v) => v.text)).toEqual(["???", "3 * 7"]);
    expect(liveIndex(a[0])).toBe(0);
    expect(liveIndex(b[0])).toBe(1);
    expect(a[0].kind).toBe("staged");
  });

  it("parses the Haskell spelling with Haskell comment syntax", () => {
    const frags = parseFragments(
      "fibs = {-(-}undefined{-|0 : 1 : zipWith (+) fibs (tail fibs))-}\n",
      REGISTRY["haskell"],
    );
    expect(frags).toHaveLength(1);
    expect(frags[0].variants.map((v) => v.text)).toEqual([
      "undefined",
      "0 : 1 : zipWith (+) fibs (tail fibs)",
    ]);
  });

  it("classifies single-variant constructs as selections", () => {
    const frags = parseFragments("lemma x: A ⟹ (*(*)A(*)*)\n", REGISTRY["isabelle"]);
    expect(frags).toHaveLength(1);
    expect(frags[0].kind).toBe("selection");
    expect(frags[0].variants.map((v) => v.text)).toEqual(["A"]);
  });

  it("skips constructs that never close instead of failing", () => {
    expect(parseFragments("val x = /*(*/???\n", REGISTRY["scala"])).toEqual([]);
  });

  it("skips constructs with no live variant", () => {
    // Both variants entirely inside comments: nothing the compiler sees.
    expect(parseFragments("/*(a|b)*/\n", REGISTRY["scala"])).toEqual([]);
  });

  it("ignores construct-like text inside strings", () => {
    expect(parseFragments('val s = "/*(*/x/*)*/"\n', REGISTRY["scala"])).toEqual([]);
  });

  it("ignores ordinary comments", () => {
    expect(parseFragments("// just a note\nval x = 1\n", REGISTRY["scala"])).toEqual([]);
    const spans = commentSpans("// just a note\nval x = 1\n", REGISTRY["scala"]);
    expect(spans).toHaveLength(1);
    expect(spans[0].line).toBe(true);
  });

  it("honors nested block comments where the language nests", () => {
    const text = "x {- outer {- inner -} still -} y\n";
    const spans = commentSpans(text, REGISTRY["haskell"]);
    expect(spans).toHaveLength(1);
    expect(text.slice(spans[0].start, spans[0].end)).toBe(
      "{- outer {- inner -} still -}",
    );
  });

  it("falls back to demo syntax for unknown languages", () => {
    expect(syntaxFor("klingon").languageId).toBe("demo");
  });
});
