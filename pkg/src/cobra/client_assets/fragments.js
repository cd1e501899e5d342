/**
 * Comment scanning and fragment constructs, ported from the server so
 * both sides agree on what a synchronized document's scaffolding means.
 * Parsing here is always lenient: a construct broken mid-edit is shown
 * as plain text instead of failing.
 */
export const REGISTRY = {
    isabelle: { languageId: "isabelle", blockOpen: "(*", blockClose: "*)", lineComment: null, nesting: true },
    scala: { languageId: "scala", blockOpen: "/*", blockClose: "*/", lineComment: "//", nesting: false },
    haskell: { languageId: "haskell", blockOpen: "{-", blockClose: "-}", lineComment: "--", nesting: true },
    demo: { languageId: "demo", blockOpen: "/*", blockClose: "*/", lineComment: "//", nesting: false },
};
export function syntaxFor(languageId) {
    return REGISTRY[languageId] ?? REGISTRY.demo;
}
/** Atomic comment token opening a fragment construct. */
export function fragmentOpen(syntax) {
    return syntax.blockOpen + "(" + syntax.blockClose;
}
/** Atomic comment token closing a fragment construct. */
export function fragmentClose(syntax) {
    return syntax.blockOpen + ")" + syntax.blockClose;
}
function skipString(text, i) {
    const n = text.length;
    i += 1;
    while (i < n) {
        const c = text[i];
        if (c === "\\" && i + 1 < n) {
            i += 2;
            continue;
        }
        if (c === '"')
            return i + 1;
        i += 1;
    }
    return n;
}
/**
 * All comments of text, left to right. Double-quoted literals are
 * skipped; the atomic fragment delimiter tokens are matched before
 * ordinary comments so nesting languages do not misparse them.
 */
export function commentSpans(text, syntax) {
    const spans = [];
    const bo = syntax.blockOpen;
    const bc = syntax.blockClose;
    const fro = fragmentOpen(syntax);
    const frc = fragmentClose(syntax);
    const line = syntax.lineComment;
    let i = 0;
    const n = text.length;
    while (i < n) {
        const c = text[i];
        if (c === '"') {
            i = skipString(text, i);
            continue;
        }
        if (text.startsWith(fro, i)) {
            spans.push({
                start: i,
                end: i + fro.length,
                bodyStart: i + bo.length,
                bodyEnd: i + fro.length - bc.length,
                terminated: true,
                line: false,
                bracket: "(",
            });
            i += fro.length;
            continue;
        }
        if (text.startsWith(frc, i)) {
            spans.push({
                start: i,
                end: i + frc.length,
                bodyStart: i + bo.length,
                bodyEnd: i + frc.length - bc.length,
                terminated: true,
                line: false,
                bracket: ")",
            });
            i += frc.length;
            continue;
        }
        if (text.startsWith(bo, i)) {
            const start = i;
            i += bo.length;
            let depth = 1;
            while (i < n && depth) {
                if (text.startsWith(bc, i)) {
                    depth -= 1;
                    i += bc.length;
                }
                else if (syntax.nesting && text.startsWith(bo, i)) {
                    depth += 1;
                    i += bo.length;
                }
                else {
                    i += 1;
                }
            }
            const terminated = depth === 0;
            spans.push({
                start,
                end: i,
                bodyStart: start + bo.length,
                bodyEnd: terminated ? i - bc.length : i,
                terminated,
                line: false,
                bracket: null,
            });
            continue;
        }
        if (line !== null && text.startsWith(line, i)) {
            const start = i;
            const j = text.indexOf("\n", i);
            const end = j === -1 ? n : j;
            spans.push({
                start,
                end,
                bodyStart: start + line.length,
                bodyEnd: end,
                terminated: true,
                line: true,
                bracket: null,
            });
            i = end;
            continue;
        }
        i += 1;
    }
    return spans;
}
export function liveIndex(frag) {
    const i = frag.variants.findIndex((v) => v.live);
    return i === -1 ? 0 : i;
}
/**
 * Fragment constructs of text in document order. Constructs that never
 * close or lack exactly one live variant are skipped.
 */
export function parseFragments(text, syntax, spans) {
    spans = spans ?? commentSpans(text, syntax);
    const fragments = [];
    let i = 0;
    while (i < spans.length) {
        const span = spans[i];
        const body = text.slice(span.bodyStart, span.bodyEnd);
        if (!body.startsWith("(")) {
            i += 1;
            continue;
        }
        const construct = parseConstruct(text, spans, i);
        if (construct === null) {
            i += 1;
            continue;
        }
        fragments.push(construct.fragment);
        i = construct.nextIndex;
    }
    return fragments;
}
function parseConstruct(text, spans, openIndex) {
    const openSpan = spans[openIndex];
    const cuts = [];
    let depth = 0;
    let si = openIndex;
    const pos = openSpan.bodyStart + 1; // just after the opening "("
    while (si < spans.length) {
        const span = spans[si];
        const scanFrom = si === openIndex ? pos : span.bodyStart;
        for (let j = scanFrom; j < span.bodyEnd; j++) {
            const c = text[j];
            if (c === "(")
                depth += 1;
            else if (c === ")") {
                if (depth === 0) {
                    if (si === openIndex)
                        return null; // prose, not a construct
                    const fragment = buildFragment(text, spans, openIndex, si, j, cuts);
                    return fragment === null ? null : { fragment, nextIndex: si + 1 };
                }
                depth -= 1;
            }
            else if (c === "|" && depth === 0) {
                cuts.push(j);
            }
        }
        si += 1;
    }
    return null; // never closes
}
function buildFragment(text, spans, openIndex, closeIndex, closePos, cuts) {
    const openSpan = spans[openIndex];
    const closeSpan = spans[closeIndex];
    const bounds = [openSpan.bodyStart + 1, ...cuts, closePos];
    const inner = spans.slice(openIndex, closeIndex + 1);
    const variants = [];
    for (let k = 0; k < bounds.length - 1; k++) {
        const a = k === 0 ? bounds[k] : bounds[k] + 1; // skip the "|" itself
        const b = bounds[k + 1];
        const pieces = variantPieces(a, b, inner);
        const body = pieces.map(([s, e]) => text.slice(s, e)).join("");
        const live = pieces.length
            ? pieces.some(([s, e]) => isLivePiece(s, e, inner))
            : crossesOut(a, b, inner);
        variants.push({ text: body, live, pieces });
    }
    const liveCount = variants.filter((v) => v.live).length;
    if (liveCount !== 1)
        return null;
    return {
        wholeRange: [openSpan.start, closeSpan.end],
        variants,
        kind: variants.length === 1 ? "selection" : "staged",
    };
}
function variantPieces(a, b, spans) {
    const pieces = [];
    let pos = a;
    for (const span of spans) {
        if (span.end <= a || span.start >= b)
            continue;
        if (span.start > pos)
            pieces.push([pos, span.start]);
        const s = Math.max(a, span.bodyStart);
        const e = Math.min(b, span.bodyEnd);
        if (s < e)
            pieces.push([s, e]);
        pos = Math.min(b, span.end);
    }
    if (pos < b)
        pieces.push([pos, b]);
    return pieces.filter(([s, e]) => s < e);
}
function isLivePiece(s, e, spans) {
    return !spans.some((span) => span.start <= s && e <= span.end);
}
function crossesOut(a, b, spans) {
    const outside = (p) => spans.every((s) => !(s.start < p && p < s.end));
    for (const span of spans) {
        for (const p of [span.start, span.end]) {
            if (a < p && p < b && outside(p))
                return true;
        }
    }
    return false;
}
