/**
 * Decoration rendering: turn a display text plus its annotations into
 * styled spans. The rendered element's textContent always equals the
 * display text exactly; decorations never add or swallow characters.
 */

import { Annotation } from "./ot.js";

/** CSS classes a single annotation contributes. */
export function annotationClasses(ann: Annotation): string[] {
  switch (ann.kind) {
    case "token":
      return ann.cls ? [`cb-tok-${ann.cls}`] : [];
    case "error":
      return ["cb-err"];
    case "warning":
      return ["cb-warn"];
    case "info":
      return ann.cls ? ["cb-info", `cb-${ann.cls}`] : ["cb-info"];
  }
}

export interface Segment {
  start: number;
  end: number;
  classes: string[];
  annotations: Annotation[];
}

/** Cut the text at annotation boundaries and collect covering classes. */
export function segment(text: string, annotations: readonly Annotation[]): Segment[] {
  const bounds = new Set<number>([0, text.length]);
  for (const ann of annotations) {
    if (ann.start < ann.end) {
      bounds.add(Math.min(ann.start, text.length));
      bounds.add(Math.min(ann.end, text.length));
    }
  }
  const sorted = [...bounds].sort((a, b) => a - b);
  const out: Segment[] = [];
  for (let i = 0; i + 1 < sorted.length; i++) {
    const start = sorted[i];
    const end = sorted[i + 1];
    const covering = annotations.filter((a) => a.start <= start && end <= a.end && a.start < a.end);
    const classes = [...new Set(covering.flatMap(annotationClasses))];
    out.push({ start, end, classes, annotations: covering });
  }
  return out;
}

/** Replace element content with the decorated text. */
export function renderInto(
  element: HTMLElement,
  text: string,
  annotations: readonly Annotation[],
): void {
  element.replaceChildren();
  for (const seg of segment(text, annotations)) {
    const piece = text.slice(seg.start, seg.end);
    if (seg.classes.length === 0) {
      element.appendChild(element.ownerDocument.createTextNode(piece));
    } else {
      const span = element.ownerDocument.createElement("span");
      span.className = seg.classes.join(" ");
      span.textContent = piece;
      element.appendChild(span);
    }
  }
}

/** Annotations with a message whose range covers the given offset. */
export function messagesAt(
  annotations: readonly Annotation[],
  offset: number,
): string[] {
  const out: string[] = [];
  for (const ann of annotations) {
    const hit =
      ann.start === ann.end
        ? ann.start === offset
        : ann.start <= offset && offset < ann.end;
    if (hit && ann.message) out.push(ann.message);
  }
  return [...new Set(out)];
}
