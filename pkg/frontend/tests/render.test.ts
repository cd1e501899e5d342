// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { Annotation } from "../src/ot.js";
import { annotationClasses, messagesAt, renderInto, segment } from "../src/render.js";

const ann = (
  start: number,
  end: number,
  kind: Annotation["kind"],
  message: string | null = null,
  cls: string | null = null,
): Annotation => ({ start, end, kind, message, cls });

describe("annotation classes", () => {
  it("maps kinds to the stylesheet contract", () => {
    expect(annotationClasses(ann(0, 1, "token", null, "keyword"))).toEqual([
      "cb-tok-keyword",
    ]);
    expect(annotationClasses(ann(0, 1, "error", "boom"))).toEqual(["cb-err"]);
    expect(annotationClasses(ann(0, 1, "warning"))).toEqual(["cb-warn"]);
    expect(annotationClasses(ann(0, 1, "info"))).toEqual(["cb-info"]);
    expect(annotationClasses(ann(0, 1, "info", null, "hole"))).toEqual([
      "cb-info",
      "cb-hole",
    ]);
    expect(annotationClasses(ann(0, 1, "token"))).toEqual([]);
  });
});

describe("segmentation", () => {
  it("cuts at boundaries and unions covering classes", () => {
    const text = "val x = ???";
    const segs = segment(text, [
      ann(0, 3, "token", null, "keyword"),
      ann(8, 11, "info", "hole", "hole"),
      ann(8, 11, "error", "missing"),
    ]);
    expect(segs.map((s) => [s.start, s.end])).toEqual([
      [0, 3],
      [3, 8],
      [8, 11],
    ]);
    expect(segs[0].classes).toEqual(["cb-tok-keyword"]);
    expect(segs[1].classes).toEqual([]);
    expect(segs[2].classes.sort()).toEqual(["cb-err", "cb-hole", "cb-info"]);
  });

  it("clips annotation bounds to the text", () => {
    const segs = segment("ab", [ann(1, 99, "error")]);
    expect(segs.map((s) => [s.start, s.end])).toEqual([
      [0, 1],
      [1, 2],
    ]);
    expect(segs[1].classes).toEqual(["cb-err"]);
  });

  it("handles overlapping ranges without duplicating classes", () => {
    const segs = segment("abcd", [ann(0, 3, "error"), ann(1, 4, "error")]);
    expect(segs.map((s) => s.classes)).toEqual([["cb-err"], ["cb-err"], ["cb-err"]]);
  });
});

describe("rendering", () => {
  it("preserves the text exactly, decorations included", () => {
    const el = document.createElement("code");
    const text = "val x = ???\nval y = 1\n";
    renderInto(el, text, [
      ann(0, 3, "token", null, "keyword"),
      ann(8, 11, "error", "missing implementation"),
    ]);
    expect(el.textContent).toBe(text);
    const err = el.querySelector(".cb-err");
    expect(err).not.toBeNull();
    expect(err!.textContent).toBe("???");
    expect(el.querySelector(".cb-tok-keyword")!.textContent).toBe("val");
  });

  it("renders plain text without any spans", () => {
    const el = document.createElement("code");
    renderInto(el, "plain", []);
    expect(el.querySelectorAll("span")).toHaveLength(0);
    expect(el.textContent).toBe("plain");
  });

  it("replaces earlier content on re-render", () => {
    const el = document.createElement("code");
    renderInto(el, "first", [ann(0, 5, "warning")]);
    renderInto(el, "second", []);
    expect(el.textContent).toBe("second");
    expect(el.querySelectorAll(".cb-warn")).toHaveLength(0);
  });
});

describe("hover messages", () => {
  const anns = [
    ann(0, 4, "error", "unbalanced bracket"),
    ann(2, 6, "warning", "TODO"),
    ann(8, 8, "info", "hole marker"),
    ann(0, 4, "token", null, "keyword"),
  ];

  it("collects messages covering an offset", () => {
    expect(messagesAt(anns, 0)).toEqual(["unbalanced bracket"]);
    expect(messagesAt(anns, 3)).toEqual(["unbalanced bracket", "TODO"]);
    expect(messagesAt(anns, 5)).toEqual(["TODO"]);
    expect(messagesAt(anns, 7)).toEqual([]);
  });

  it("hits empty ranges only exactly at their point", () => {
    expect(messagesAt(anns, 8)).toEqual(["hole marker"]);
    expect(messagesAt(anns, 9)).toEqual([]);
  });
});
