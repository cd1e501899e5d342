/**
 * An editable code element: one contenteditable block whose content is
 * re-rendered with decoration spans after every model change, with the
 * caret preserved across renders. Typing is reported as the new plain
 * text; the model decides whether it sticks.
 */

import { Annotation } from "./ot.js";
import { renderInto } from "./render.js";

export interface EditorCallbacks {
  /** The user changed the text; return false to roll the DOM back. */
  onInput(newText: string): boolean;
  /** Click or tap at a character offset (for tooltips). */
  onPoint?(offset: number, clientX: number, clientY: number): void;
}

export class CodeEditor {
  private lastText = "";
  private lastAnnotations: readonly Annotation[] = [];

  constructor(
    public readonly element: HTMLElement,
    private callbacks: EditorCallbacks,
    editable = true,
  ) {
    element.classList.add("cb-editor");
    if (editable) {
      element.setAttribute("contenteditable", "plaintext-only");
      // Firefox has no plaintext-only; fall back to rich editing and
      // rely on re-rendering to scrub formatting.
      if (element.contentEditable !== "plaintext-only") {
        element.setAttribute("contenteditable", "true");
      }
      element.spellcheck = false;
    }
    element.addEventListener("input", () => {
      const text = this.readText();
      if (!this.callbacks.onInput(text)) {
        this.render(this.lastText, this.lastAnnotations);
      }
    });
    element.addEventListener("keydown", (event) => {
      // Keep deck navigation keys from firing while editing.
      if (event.key === "Escape") element.blur();
      else event.stopPropagation();
    });
    const point = (event: MouseEvent) => {
      const offset = this.caretOffset();
      if (offset !== null) {
        this.callbacks.onPoint?.(offset, event.clientX, event.clientY);
      }
    };
    element.addEventListener("click", point);
  }

  /** Current textual content, normalizing line-break elements. */
  readText(): string {
    const parts: string[] = [];
    const walk = (node: Node) => {
      if (node.nodeType === 3) {
        parts.push((node as Text).data);
        return;
      }
      const el = node as Element;
      if (el.tagName === "BR") {
        parts.push("\n");
        return;
      }
      node.childNodes.forEach(walk);
      if (el.tagName === "DIV" || el.tagName === "P") parts.push("\n");
    };
    this.element.childNodes.forEach(walk);
    let text = parts.join("");
    if (text.endsWith("\n") && !this.lastText.endsWith("\n")) {
      // Block-element normalization adds one trailing break too many.
      text = text.slice(0, -1);
    }
    return text;
  }

  /** Re-render content and decorations, keeping the caret in place. */
  render(text: string, annotations: readonly Annotation[], caret?: number): void {
    const doc = this.element.ownerDocument;
    const focused = doc.activeElement === this.element;
    const keep = caret ?? (focused ? this.caretOffset() : null);
    this.lastText = text;
    this.lastAnnotations = annotations;
    renderInto(this.element, text, annotations);
    if (keep !== null && keep !== undefined && focused) {
      this.setCaret(Math.min(keep, text.length));
    }
  }

  /** Caret position as a character offset, or null without a caret. */
  caretOffset(): number | null {
    const doc = this.element.ownerDocument;
    const selection = doc.getSelection?.();
    if (!selection || selection.rangeCount === 0) return null;
    const range = selection.getRangeAt(0);
    if (!this.element.contains(range.startContainer)) return null;
    let offset = 0;
    const walker = doc.createTreeWalker(this.element, 4 /* SHOW_TEXT */);
    let node = walker.nextNode();
    while (node) {
      if (node === range.startContainer) return offset + range.startOffset;
      offset += (node as Text).data.length;
      node = walker.nextNode();
    }
    return offset;
  }

  setCaret(offset: number): void {
    const doc = this.element.ownerDocument;
    const selection = doc.getSelection?.();
    if (!selection) return;
    const walker = doc.createTreeWalker(this.element, 4 /* SHOW_TEXT */);
    let node = walker.nextNode();
    let remaining = offset;
    while (node) {
      const length = (node as Text).data.length;
      if (remaining <= length) {
        const range = doc.createRange();
        range.setStart(node, remaining);
        range.collapse(true);
        selection.removeAllRanges();
        selection.addRange(range);
        return;
      }
      remaining -= length;
      node = walker.nextNode();
    }
    // Empty editor or offset past the end: place at the element end.
    const range = doc.createRange();
    range.selectNodeContents(this.element);
    range.collapse(false);
    selection.removeAllRanges();
    selection.addRange(range);
  }
}
