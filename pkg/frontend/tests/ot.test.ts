import { describe, expect, it } from "vitest";

import {
  Annotation,
  LengthMismatch,
  Operation,
  transformAnnotations,
  transformPosition,
} from "../src/ot.js";
import { loadVectors, opFrom, randomBase, randomOp, rng } from "./helpers.js";

interface OtVectors {
  transform: Array<{
    text: string;
    a: Array<number | string>;
    b: Array<number | string>;
    aPrime: Array<number | string>;
    bPrime: Array<number | string>;
    converged: string;
  }>;
  compose: Array<{
    text: string;
    first: Array<number | string>;
    second: Array<number | string>;
    composed: Array<number | string>;
    result: string;
  }>;
  diff: Array<{ old: string; new: string; op: Array<number | string> }>;
}

const vectors = loadVectors<OtVectors>("ot.json");

describe("operation vectors", () => {
  it("transforms to the same component lists as the server", () => {
    for (const c of vectors.transform) {
      const [ap, bp] = Operation.transform(opFrom(c.a), opFrom(c.b));
      expect(ap.ops).toEqual(c.aPrime);
      expect(bp.ops).toEqual(c.bPrime);
      expect(bp.apply(opFrom(c.a).apply(c.text))).toBe(c.converged);
      expect(ap.apply(opFrom(c.b).apply(c.text))).toBe(c.converged);
    }
  });

  it("composes to the same component lists as the server", () => {
    for (const c of vectors.compose) {
      const composed = opFrom(c.first).compose(opFrom(c.second));
      expect(composed.ops).toEqual(c.composed);
      expect(composed.apply(c.text)).toBe(c.result);
    }
  });

  it("diffs to the same component lists as the server", () => {
    for (const c of vectors.diff) {
      const op = Operation.diff(c.old, c.new);
      expect(op.ops).toEqual(c.op);
      expect(op.apply(c.old)).toBe(c.new);
    }
  });
});

describe("operation laws", () => {
  it("is convergent on 3000 random transform pairs", () => {
    const rand = rng(4242);
    for (let i = 0; i < 3000; i++) {
      const text = randomBase(rand);
      const a = randomOp(rand, text.length);
      const b = randomOp(rand, text.length);
      const [ap, bp] = Operation.transform(a, b);
      expect(bp.apply(a.apply(text))).toBe(ap.apply(b.apply(text)));
    }
  });

  it("compose agrees with sequential application", () => {
    const rand = rng(99);
    for (let i = 0; i < 1000; i++) {
      const text = randomBase(rand);
      const first = randomOp(rand, text.length);
      const mid = first.apply(text);
      const second = randomOp(rand, mid.length);
      expect(first.compose(second).apply(text)).toBe(second.apply(mid));
    }
  });

  it("diff reconstructs arbitrary rewrites", () => {
    const rand = rng(7);
    for (let i = 0; i < 1000; i++) {
      const oldText = randomBase(rand, 20);
      const newText = randomBase(rand, 20);
      expect(Operation.diff(oldText, newText).apply(oldText)).toBe(newText);
    }
  });

  it("normalizes inserts before adjacent deletes", () => {
    const op = new Operation().retain(2).delete(3).insert("xy").retain(1);
    expect(op.ops).toEqual([2, "xy", -3, 1]);
  });

  it("merges adjacent components of the same kind", () => {
    const op = new Operation().retain(1).retain(2).insert("a").insert("b").delete(1).delete(2);
    expect(op.ops).toEqual([3, "ab", -3]);
  });

  it("rejects applying to a text of the wrong length", () => {
    expect(() => new Operation().retain(3).apply("ab")).toThrow(LengthMismatch);
  });

  it("identity leaves text alone", () => {
    expect(Operation.identity(4).apply("abcd")).toBe("abcd");
    expect(Operation.identity(4).isIdentity).toBe(true);
    expect(new Operation().retain(1).insert("x").isIdentity).toBe(false);
  });
});

describe("position and annotation transforms", () => {
  const op = new Operation().retain(2).insert("XX").retain(1).delete(3).retain(2);
  // base: 8 chars "abc defg" -> "abXXc fg" minus "def"? walk: ret2 ins2 ret1 del3 ret2

  it("shifts positions across inserts and deletes", () => {
    expect(transformPosition(0, op)).toBe(0);
    expect(transformPosition(2, op)).toBe(2); // at insert point, not pushed
    expect(transformPosition(2, op, true)).toBe(4); // pushed through the insert
    expect(transformPosition(3, op)).toBe(5);
    expect(transformPosition(4, op)).toBe(5); // inside the deleted run
    expect(transformPosition(6, op)).toBe(5); // end of the deleted run
    expect(transformPosition(7, op)).toBe(6);
  });

  it("drops annotations whose range is fully deleted", () => {
    const anns: Annotation[] = [
      { start: 3, end: 6, kind: "error", message: "gone", cls: null },
      { start: 0, end: 2, kind: "token", message: null, cls: "keyword" },
    ];
    const out = transformAnnotations(anns, op);
    expect(out).toEqual([{ start: 0, end: 2, kind: "token", message: null, cls: "keyword" }]);
  });

  it("keeps empty-range annotations unless text around them vanished", () => {
    const anns: Annotation[] = [{ start: 7, end: 7, kind: "info", message: null, cls: "hole" }];
    expect(transformAnnotations(anns, op)).toEqual([
      { start: 6, end: 6, kind: "info", message: null, cls: "hole" },
    ]);
  });
});
