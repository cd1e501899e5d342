/**
 * Page bootstrap: reads the embedded boot configuration, binds every
 * code element to its synchronized document, and wires keyboard
 * navigation, stepping, tooltips and settings updates.
 */

import {
  BootConfig,
  BootDocument,
  PresentationClient,
  Transport,
  TransportHandlers,
  isLoopbackHost,
} from "./client.js";
import { DeckView } from "./deck.js";
import { CodeEditor } from "./editor.js";
import { DocStepInfo, SlideItem, StepAction, Stepper, buildPlan } from "./steps.js";

function browserTransport(url: string, handlers: TransportHandlers): Transport {
  const ws = new WebSocket(url);
  ws.binaryType = "arraybuffer";
  ws.onopen = () => handlers.onOpen();
  ws.onmessage = (event) => handlers.onMessage(new Uint8Array(event.data as ArrayBuffer));
  ws.onclose = () => handlers.onClose();
  return {
    send: (data) => ws.send(data),
    close: () => ws.close(),
  };
}

function readBoot(doc: Document): BootConfig {
  const el = doc.getElementById("boot-config");
  if (!el) throw new Error("missing boot configuration");
  return JSON.parse(el.textContent ?? "{}") as BootConfig;
}

function normalizePath(src: string): string {
  let path = src.replace(/\\/g, "/");
  if (path.startsWith("./")) path = path.slice(2);
  return path;
}

/**
 * Pair boot documents with their code elements. Elements with a src
 * attribute derive the same id the server assigned; inline elements
 * consume the inline entries in order.
 */
function pairCodeElements(
  doc: Document,
  boot: BootConfig,
): Map<string, HTMLElement> {
  const elements = [
    ...doc.querySelectorAll<HTMLElement>(".reveal .slides code"),
    ...doc.querySelectorAll<HTMLElement>("body > code"),
  ];
  const inlineQueue = boot.documents.filter((d) => d.kind === "inline");
  const out = new Map<string, HTMLElement>();
  for (const el of elements) {
    const src = el.getAttribute("src");
    let id: string | undefined;
    if (src && src.startsWith("#")) id = `snip-${src.slice(1)}`;
    else if (src) id = `file-${normalizePath(src)}`;
    else id = inlineQueue.shift()?.id;
    if (id) out.set(id, el);
  }
  return out;
}

function typesetMath(doc: Document): void {
  const w = doc.defaultView as (Window & { MathJax?: { typesetPromise?: () => Promise<unknown> } }) | null;
  // Hand over to a math engine when one is present; plain text otherwise.
  w?.MathJax?.typesetPromise?.()?.catch(() => undefined);
}

export function start(doc: Document): void {
  const boot = readBoot(doc);
  const deck = new DeckView(doc);
  const codeElements = pairCodeElements(doc, boot);
  const byId = new Map<string, BootDocument>(boot.documents.map((d) => [d.id, d]));
  const editors = new Map<string, CodeEditor>();
  const statePanels = new Map<string, HTMLElement>();
  const window_ = doc.defaultView;
  const presenter = window_ ? isLoopbackHost(window_.location.hostname) : false;
  const wsProto = window_?.location.protocol === "https:" ? "wss" : "ws";
  const url = window_ ? `${wsProto}://${window_.location.host}/ws` : "";

  let stepper: Stepper | null = null;
  let planFingerprint = "";

  const client: PresentationClient = new PresentationClient(boot, {
    url,
    transport: browserTransport,
    presenter,
    events: {
      docChanged: (docId) => {
        refreshEditor(docId);
        maybeRebuildPlan();
      },
      fatal: (message) => deck.banner(message),
      settingsChanged: (changes) => {
        for (const change of changes) {
          if (change.path === "title" && typeof change.new === "string") {
            doc.title = change.new;
          }
          if (change.path === "theme.slides" && typeof change.new === "string") {
            swapStylesheet(doc, "client/theme/", `client/theme/${change.new}.css`);
          }
          if (change.path === "theme.code" && typeof change.new === "string") {
            swapStylesheet(doc, "client/code/", `client/code/${change.new}.css`);
          }
        }
      },
    },
  });

  for (const [id, el] of codeElements) {
    const info = byId.get(id);
    if (!info) continue;
    if (info.classes.includes("hidden")) {
      el.classList.add("cb-hidden");
      continue;
    }
    const editor = new CodeEditor(el, {
      onInput: (text) => client.editDisplay(id, text),
      onPoint: (offset, x, y) => {
        const handle = client.docs.get(id);
        const messages = handle?.messagesAtDisplay(offset) ?? [];
        if (messages.length) deck.showTooltip(messages.join("\n"), x, y);
        else deck.hideTooltip();
      },
    });
    editors.set(id, editor);
    if (info.classes.includes("states") || info.classes.includes("state-fragments")) {
      const panel = doc.createElement("div");
      panel.className = "cb-state cb-hidden";
      el.insertAdjacentElement("afterend", panel);
      statePanels.set(id, panel);
    }
  }

  function refreshEditor(docId: string): void {
    const handle = client.docs.get(docId);
    const editor = editors.get(docId);
    if (!handle || !editor) return;
    editor.render(handle.displayText, handle.displayAnnotations());
    const panel = statePanels.get(docId);
    if (panel) {
      const states = handle.byClass("state");
      const info = byId.get(docId);
      const stepped = info?.classes.includes("state-fragments") ?? false;
      const index = stepped ? handle.stateIndex : states.length - 1;
      const message = index >= 0 ? states[index]?.message : null;
      panel.textContent = message ?? "";
      panel.classList.toggle("cb-hidden", !message);
    }
  }

  function planInputs(): { slides: SlideItem[][]; fingerprint: string } {
    const slides: SlideItem[][] = deck.slides.map((slide) => {
      const items: SlideItem[] = [];
      const all = slide.element.querySelectorAll<HTMLElement>(".fragment, code");
      for (const el of all) {
        if (el.tagName === "CODE") {
          for (const [id, codeEl] of codeElements) {
            if (codeEl === el && client.docs.has(id)) {
              items.push({ kind: "code", doc: id });
              break;
            }
          }
        } else {
          items.push({ kind: "fragment-element" });
        }
      }
      return items;
    });
    const fingerprint = slides
      .map((items) =>
        items
          .map((item) =>
            item.kind === "code" ? `c:${item.doc}:${docFingerprint(item.doc)}` : "f",
          )
          .join(","),
      )
      .join(";");
    return { slides, fingerprint };
  }

  function docFingerprint(docId: string): string {
    const handle = client.docs.get(docId);
    if (!handle) return "?";
    return handle.proj.fragments
      .map((f) => `${f.kind[0]}${f.variants.length}`)
      .join("");
  }

  function docInfo(docId: string): DocStepInfo {
    const handle = client.docs.get(docId);
    const info = byId.get(docId);
    return {
      fragments:
        handle?.proj.fragments.map((f) => ({
          variants: f.variants.length,
          selection: f.kind === "selection",
        })) ?? [],
      stateSteps: info?.classes.includes("state-fragments") ?? false,
    };
  }

  function maybeRebuildPlan(): void {
    const { slides, fingerprint } = planInputs();
    if (fingerprint === planFingerprint && stepper) return;
    planFingerprint = fingerprint;
    const plan = buildPlan(slides, docInfo);
    const hooks = {
      stateCount: (id: string) => client.docs.get(id)?.byClass("state").length ?? 0,
      stateIndex: (id: string) => client.docs.get(id)?.stateIndex ?? -1,
    };
    const fresh = new Stepper(plan, hooks);
    if (stepper) {
      fresh.slide = Math.min(stepper.slide, plan.length - 1);
      fresh.applied = Math.min(stepper.applied, plan[fresh.slide]?.length ?? 0);
    }
    stepper = fresh;
  }

  function perform(actions: StepAction[]): void {
    for (const action of actions) {
      if (action.type === "slide") {
        deck.hideTooltip();
        deck.present(action.index);
        continue;
      }
      const on = action.type === "apply";
      const step = action.step;
      switch (step.kind) {
        case "reveal-fragment":
          deck.revealFragment(step.slide, step.ordinal, on);
          break;
        case "code-variant-advance":
          client.stepFragment(step.doc, step.fragment, on ? step.variant : step.variant - 1);
          break;
        case "selection-highlight": {
          client.setHighlight(step.doc, step.fragment, on);
          if (!on) deck.hideTooltip();
          break;
        }
        case "proof-state-advance": {
          const handle = client.docs.get(step.doc);
          if (handle) {
            handle.stateIndex += on ? 1 : -1;
            refreshEditor(step.doc);
          }
          break;
        }
      }
    }
  }

  doc.addEventListener("keydown", (event) => {
    const target = event.target as HTMLElement | null;
    if (target && target.closest(".cb-editor")) return;
    if (deck.helpVisible && event.key !== "?" && event.key !== "Escape") return;
    maybeRebuildPlan();
    if (!stepper) return;
    switch (event.key) {
      case "ArrowRight":
      case "ArrowDown":
      case "PageDown":
      case " ":
        event.preventDefault();
        perform(event.shiftKey && event.key === " " ? stepper.prev() : stepper.next());
        break;
      case "ArrowLeft":
      case "ArrowUp":
      case "PageUp":
        event.preventDefault();
        perform(stepper.prev());
        break;
      case "Home":
        event.preventDefault();
        perform(stepper.jump(0));
        break;
      case "End":
        event.preventDefault();
        perform(stepper.jump(deck.slides.length - 1));
        break;
      case "?":
        event.preventDefault();
        deck.toggleHelp();
        break;
      case "Escape":
        if (deck.helpVisible) deck.toggleHelp();
        deck.hideTooltip();
        break;
      default:
        break;
    }
  });

  if (window_) {
    const fromHash = deck.slideFromHash(window_.location.hash);
    if (fromHash !== null) deck.present(fromHash);
    window_.addEventListener("hashchange", () => {
      const index = deck.slideFromHash(window_.location.hash);
      if (index !== null && index !== deck.current) {
        maybeRebuildPlan();
        if (stepper) perform(stepper.jump(index));
        else deck.present(index);
      }
    });
  }

  typesetMath(doc);
  client.connect();
}

function swapStylesheet(doc: Document, prefix: string, href: string): void {
  const links = doc.querySelectorAll<HTMLLinkElement>('link[rel="stylesheet"]');
  for (const link of links) {
    if (link.getAttribute("href")?.startsWith(prefix)) {
      link.setAttribute("href", href);
    }
  }
}

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", () => start(document));
  } else {
    start(document);
  }
}
