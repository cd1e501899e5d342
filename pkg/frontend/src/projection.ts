/**
 * The display layer of a synchronized document. The server strips
 * snippet markers before syncing, but fragment constructs travel as
 * written; what the audience sees is a local projection that hides the
 * scaffolding and shows one variant per construct. Edits made on the
 * displayed text are translated back into operations over the
 * synchronized text, verified by re-projection exactly like the
 * server's marker layer.
 */

import { Fragment, LanguageSyntax, parseFragments } from "./fragments.js";
import { Annotation, Operation, Component } from "./ot.js";

/** Active variant per fragment index; missing entries default to 0. */
export type FragmentState = Map<number, number>;

export class EditRejected extends Error {}

/** A visible run: out is the display offset, src the synced-text offset. */
export interface Piece {
  out: number;
  src: number;
  length: number;
}

export interface DisplayProjection {
  srcText: string;
  text: string;
  pieces: Piece[];
  fragments: Fragment[];
  variantEntryGaps: Set<number>;
  syntax: LanguageSyntax;
  state: FragmentState;
}

function mergeRanges(ranges: Array<[number, number]>): Array<[number, number]> {
  const merged: Array<[number, number]> = [];
  const sorted = ranges
    .filter(([s, e]) => s < e)
    .sort((a, b) => a[0] - b[0] || a[1] - b[1]);
  for (const [s, e] of sorted) {
    const last = merged[merged.length - 1];
    if (last && s <= last[1]) last[1] = Math.max(last[1], e);
    else merged.push([s, e]);
  }
  return merged;
}

export function clampVariant(frag: Fragment, index: number): number {
  return Math.max(0, Math.min(frag.variants.length - 1, index));
}

/** Project the synced text into its display form for a variant state. */
export function projectDisplay(
  srcText: string,
  syntax: LanguageSyntax,
  state: FragmentState,
): DisplayProjection {
  const fragments = parseFragments(srcText, syntax);
  const hidden: Array<[number, number]> = [];
  const variantEntryGaps = new Set<number>();
  fragments.forEach((frag, idx) => {
    const active = clampVariant(frag, state.get(idx) ?? 0);
    const keep = mergeRanges([...frag.variants[active].pieces]);
    let pos = frag.wholeRange[0];
    for (const [s, e] of keep) {
      hidden.push([pos, s]);
      if (pos < s) variantEntryGaps.add(pos);
      pos = e;
    }
    hidden.push([pos, frag.wholeRange[1]]);
  });

  const pieces: Piece[] = [];
  const parts: string[] = [];
  let out = 0;
  let pos = 0;
  for (const [s, e] of mergeRanges(hidden)) {
    if (s > pos) {
      pieces.push({ out, src: pos, length: s - pos });
      parts.push(srcText.slice(pos, s));
      out += s - pos;
    }
    pos = Math.max(pos, e);
  }
  if (pos < srcText.length) {
    pieces.push({ out, src: pos, length: srcText.length - pos });
    parts.push(srcText.slice(pos));
  }
  return {
    srcText,
    text: parts.join(""),
    pieces,
    fragments,
    variantEntryGaps,
    syntax,
    state,
  };
}

/** Synced-text offset of a display position; the end maps past the last run. */
export function toSrc(proj: DisplayProjection, outPos: number): number {
  if (proj.pieces.length === 0) return 0;
  const last = proj.pieces[proj.pieces.length - 1];
  if (outPos >= last.out + last.length) return last.src + last.length;
  for (let i = proj.pieces.length - 1; i >= 0; i--) {
    const piece = proj.pieces[i];
    if (outPos >= piece.out) return piece.src + (outPos - piece.out);
  }
  return proj.pieces[0].src;
}

/** Display offset of a synced-text position, or null when hidden. */
export function toOut(proj: DisplayProjection, srcPos: number): number | null {
  for (const piece of proj.pieces) {
    if (piece.src <= srcPos && srcPos < piece.src + piece.length) {
      return piece.out + (srcPos - piece.src);
    }
  }
  return null;
}

// ---------------------------------------------------------------------------
// Edit translation

/**
 * Translate an operation on the displayed text into one on the synced
 * text that projects to exactly the same display. Insertions at hidden
 * scaffolding attach to the visible side; candidates that do not
 * survive re-projection are discarded, and if none survives the edit
 * is rejected.
 */
export function mapDisplayEdit(
  proj: DisplayProjection,
  displayOp: Operation,
): Operation {
  if (displayOp.baseLength !== proj.text.length) {
    throw new EditRejected(
      `display operation base ${displayOp.baseLength} != display length ${proj.text.length}`,
    );
  }
  const expected = displayOp.apply(proj.text);
  const plans: Array<[Component[], number]> = [
    [displayOp.ops, 0],
    [displayOp.ops, 1],
    [deletesFirst(displayOp.ops), 0],
  ];
  for (const [ops, strategy] of plans) {
    const candidate = walkDisplayEdit(proj, ops, strategy);
    const newSrc = candidate.apply(proj.srcText);
    const reprojected = projectDisplay(newSrc, proj.syntax, proj.state);
    if (reprojected.text === expected) return candidate;
  }
  throw new EditRejected("display edit does not survive re-projection");
}

function deletesFirst(ops: readonly Component[]): Component[] {
  const out = [...ops];
  let i = 0;
  while (i + 1 < out.length) {
    const a = out[i];
    const b = out[i + 1];
    if (typeof a === "string" && typeof b === "number" && b < 0) {
      out[i] = b;
      out[i + 1] = a;
      i += 2;
    } else {
      i += 1;
    }
  }
  return out;
}

function walkDisplayEdit(
  proj: DisplayProjection,
  components: readonly Component[],
  strategy: number,
): Operation {
  const pieces = proj.pieces;
  const out = new Operation();
  let srcPos = 0;
  let v = 0;
  let pi = 0;
  let off = 0;

  const advanceTo = (target: number) => {
    if (target > srcPos) {
      out.retain(target - srcPos);
      srcPos = target;
    }
  };
  const normalize = () => {
    while (pi < pieces.length && off >= pieces[pi].length) {
      off -= pieces[pi].length;
      pi += 1;
    }
  };

  for (const comp of components) {
    if (typeof comp === "string") {
      advanceTo(insertAnchor(proj, v, pi, off, strategy));
      out.insert(comp);
    } else if (comp > 0) {
      v += comp;
      off += comp;
      normalize();
    } else {
      let n = -comp;
      v += n;
      while (n > 0) {
        const piece = pieces[pi];
        const take = Math.min(n, piece.length - off);
        const start = piece.src + off;
        advanceTo(start);
        out.delete(take);
        srcPos = start + take;
        off += take;
        n -= take;
        normalize();
      }
    }
  }
  advanceTo(proj.srcText.length);
  return out;
}

function insertAnchor(
  proj: DisplayProjection,
  v: number,
  pi: number,
  off: number,
  strategy: number,
): number {
  const pieces = proj.pieces;
  if (pieces.length === 0) return 0;
  if (v === 0) return pieces[0].src;
  if (off > 0) return pieces[pi].src + off;
  if (strategy === 1 && pi < pieces.length) return pieces[pi].src;
  const anchor =
    pi > 0 ? pieces[pi - 1].src + pieces[pi - 1].length : pieces[0].src;
  if (proj.variantEntryGaps.has(anchor) && pi < pieces.length) {
    // The gap ahead is construct scaffolding; land inside the active
    // variant rather than in front of the whole construct.
    return pieces[pi].src;
  }
  return anchor;
}

// ---------------------------------------------------------------------------
// Annotation mapping

/**
 * Carry synced-text annotations over to display coordinates.
 * Diagnostics are clipped to visible runs and split at gaps; token
 * classifications survive only when their whole range is one visible
 * run.
 */
export function mapAnnotationsToDisplay(
  proj: DisplayProjection,
  annotations: readonly Annotation[],
): Annotation[] {
  const out: Annotation[] = [];
  for (const ann of annotations) {
    if (ann.start === ann.end) {
      const pos = toOut(proj, ann.start);
      if (pos !== null) out.push({ ...ann, start: pos, end: pos });
      continue;
    }
    const parts: Array<[number, number]> = [];
    for (const piece of proj.pieces) {
      const s = Math.max(ann.start, piece.src);
      const e = Math.min(ann.end, piece.src + piece.length);
      if (s < e) parts.push([piece.out + s - piece.src, piece.out + e - piece.src]);
    }
    if (parts.length === 0) continue;
    if (ann.kind === "token") {
      const covered = parts.reduce((acc, [s, e]) => acc + e - s, 0);
      if (parts.length === 1 && covered === ann.end - ann.start) {
        out.push({ ...ann, start: parts[0][0], end: parts[0][1] });
      }
      continue;
    }
    for (const [s, e] of parts) {
      out.push({ ...ann, start: s, end: e });
    }
  }
  return out;
}
