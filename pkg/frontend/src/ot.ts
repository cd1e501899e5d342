/**
 * Operational transformation over plain text, mirroring the server's
 * algebra exactly: operations are normalized retain/insert/delete
 * component lists, transform resolves same-position insert ties with
 * the first argument's insert in front.
 */

/** Positive int: retain. Negative int: delete. String: insert. */
export type Component = number | string;

export class LengthMismatch extends Error {}

export class Operation {
  ops: Component[] = [];
  baseLength = 0;
  targetLength = 0;

  constructor(components: Iterable<Component> = []) {
    for (const c of components) {
      if (typeof c === "string") this.insert(c);
      else if (c >= 0) this.retain(c);
      else this.delete(-c);
    }
  }

  static identity(length: number): Operation {
    return new Operation().retain(length);
  }

  retain(n: number): Operation {
    if (n < 0) throw new RangeError("retain expects a non-negative count");
    if (n === 0) return this;
    this.baseLength += n;
    this.targetLength += n;
    const ops = this.ops;
    const last = ops[ops.length - 1];
    if (typeof last === "number" && last > 0) ops[ops.length - 1] = last + n;
    else ops.push(n);
    return this;
  }

  insert(text: string): Operation {
    if (!text) return this;
    this.targetLength += text.length;
    const ops = this.ops;
    const last = ops[ops.length - 1];
    if (typeof last === "string") {
      ops[ops.length - 1] = last + text;
    } else if (typeof last === "number" && last < 0) {
      // Insert before an adjacent delete; same effect, one normal form.
      const prev = ops[ops.length - 2];
      if (typeof prev === "string") ops[ops.length - 2] = prev + text;
      else ops.splice(ops.length - 1, 0, text);
    } else {
      ops.push(text);
    }
    return this;
  }

  delete(n: number): Operation {
    if (n < 0) throw new RangeError("delete expects a non-negative count");
    if (n === 0) return this;
    this.baseLength += n;
    const ops = this.ops;
    const last = ops[ops.length - 1];
    if (typeof last === "number" && last < 0) ops[ops.length - 1] = last - n;
    else ops.push(-n);
    return this;
  }

  get isIdentity(): boolean {
    return this.ops.every((c) => typeof c === "number" && c > 0);
  }

  equals(other: Operation): boolean {
    return (
      this.ops.length === other.ops.length &&
      this.ops.every((c, i) => c === other.ops[i])
    );
  }

  apply(text: string): string {
    if (text.length !== this.baseLength) {
      throw new LengthMismatch(
        `operation expects base length ${this.baseLength}, text has length ${text.length}`,
      );
    }
    const parts: string[] = [];
    let pos = 0;
    for (const c of this.ops) {
      if (typeof c === "string") parts.push(c);
      else if (c > 0) {
        parts.push(text.slice(pos, pos + c));
        pos += c;
      } else pos += -c;
    }
    return parts.join("");
  }

  /** A single operation with the effect of this, then other. */
  compose(other: Operation): Operation {
    if (this.targetLength !== other.baseLength) {
      throw new LengthMismatch(
        `cannot compose: target length ${this.targetLength} != base length ${other.baseLength}`,
      );
    }
    const out = new Operation();
    const it1 = this.ops[Symbol.iterator]();
    const it2 = other.ops[Symbol.iterator]();
    let c1: Component | undefined = it1.next().value;
    let c2: Component | undefined = it2.next().value;
    while (c1 !== undefined || c2 !== undefined) {
      if (typeof c1 === "number" && c1 < 0) {
        out.delete(-c1);
        c1 = it1.next().value;
        continue;
      }
      if (typeof c2 === "string") {
        out.insert(c2);
        c2 = it2.next().value;
        continue;
      }
      if (c1 === undefined || c2 === undefined) {
        throw new LengthMismatch("operations do not line up");
      }
      const n2 = c2 as number;
      if (typeof c1 === "string") {
        let n: number;
        if (n2 > 0) {
          n = Math.min(c1.length, n2);
          out.insert(c1.slice(0, n));
        } else {
          n = Math.min(c1.length, -n2);
        }
        c1 = restInsert(c1, n, it1);
        c2 = restNumber(n2, n, it2);
      } else {
        let n: number;
        if (n2 > 0) {
          n = Math.min(c1, n2);
          out.retain(n);
        } else {
          n = Math.min(c1, -n2);
          out.delete(n);
        }
        c1 = restNumber(c1, n, it1);
        c2 = restNumber(n2, n, it2);
      }
    }
    return out;
  }

  /**
   * Transform concurrent operations a and b over the same base; returns
   * [a', b'] such that b' after a equals a' after b.
   */
  static transform(a: Operation, b: Operation): [Operation, Operation] {
    if (a.baseLength !== b.baseLength) {
      throw new LengthMismatch(
        `cannot transform: base lengths differ (${a.baseLength} != ${b.baseLength})`,
      );
    }
    const ap = new Operation();
    const bp = new Operation();
    const it1 = a.ops[Symbol.iterator]();
    const it2 = b.ops[Symbol.iterator]();
    let c1: Component | undefined = it1.next().value;
    let c2: Component | undefined = it2.next().value;
    while (c1 !== undefined || c2 !== undefined) {
      if (typeof c1 === "string") {
        ap.insert(c1);
        bp.retain(c1.length);
        c1 = it1.next().value;
        continue;
      }
      if (typeof c2 === "string") {
        ap.retain(c2.length);
        bp.insert(c2);
        c2 = it2.next().value;
        continue;
      }
      if (c1 === undefined || c2 === undefined) {
        throw new LengthMismatch("operations do not line up");
      }
      let n: number;
      if (c1 > 0 && c2 > 0) {
        n = Math.min(c1, c2);
        ap.retain(n);
        bp.retain(n);
      } else if (c1 < 0 && c2 < 0) {
        n = Math.min(-c1, -c2);
      } else if (c1 < 0) {
        n = Math.min(-c1, c2);
        ap.delete(n);
      } else {
        n = Math.min(c1, -c2);
        bp.delete(n);
      }
      c1 = restNumber(c1, n, it1);
      c2 = restNumber(c2, n, it2);
    }
    return [ap, bp];
  }

  /** Single-splice operation turning old into new (prefix/suffix trim). */
  static diff(oldText: string, newText: string): Operation {
    if (oldText === newText) return Operation.identity(oldText.length);
    let start = 0;
    const limit = Math.min(oldText.length, newText.length);
    while (start < limit && oldText[start] === newText[start]) start++;
    let endOld = oldText.length;
    let endNew = newText.length;
    while (
      endOld > start &&
      endNew > start &&
      oldText[endOld - 1] === newText[endNew - 1]
    ) {
      endOld--;
      endNew--;
    }
    return new Operation()
      .retain(start)
      .delete(endOld - start)
      .insert(newText.slice(start, endNew))
      .retain(oldText.length - endOld);
  }
}

function restInsert(
  c: string,
  n: number,
  it: Iterator<Component>,
): Component | undefined {
  const rest = c.slice(n);
  return rest ? rest : it.next().value;
}

function restNumber(
  c: number,
  n: number,
  it: Iterator<Component>,
): Component | undefined {
  const rest = c > 0 ? c - n : c + n;
  return rest !== 0 ? rest : it.next().value;
}

// ---------------------------------------------------------------------------
// Annotations

export const KINDS = ["error", "warning", "info", "token"] as const;

export type AnnotationKind = (typeof KINDS)[number];

/** A classified half-open [start, end) range over one document revision. */
export interface Annotation {
  start: number;
  end: number;
  kind: AnnotationKind;
  message: string | null;
  cls: string | null;
}

/**
 * Map a position through an operation. pushAtPoint controls what an
 * insert exactly at pos does: true moves pos past the inserted text.
 */
export function transformPosition(
  pos: number,
  op: Operation,
  pushAtPoint = false,
): number {
  let base = 0;
  let out = pos;
  for (const c of op.ops) {
    if (typeof c === "string") {
      if (base < pos || (pushAtPoint && base === pos)) out += c.length;
    } else if (c > 0) {
      base += c;
    } else {
      const n = -c;
      if (base < pos) out -= Math.min(n, pos - base);
      base += n;
    }
  }
  return out;
}

/**
 * Rebase annotations across an operation on their document; fully
 * deleted ranges are dropped.
 */
export function transformAnnotations(
  annotations: readonly Annotation[],
  op: Operation,
): Annotation[] {
  const out: Annotation[] = [];
  for (const ann of annotations) {
    const start = transformPosition(ann.start, op, true);
    let end = transformPosition(ann.end, op, false);
    if (end < start) end = start;
    if (start === end && ann.start !== ann.end) continue;
    out.push({ ...ann, start, end });
  }
  return out;
}
