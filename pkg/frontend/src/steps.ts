/**
 * The presentation step sequence: which fragment appears, which code
 * variant becomes active, which range gets highlighted, one keypress at
 * a time. The plan is computed once from the deck and is reversible;
 * proof-state steps are the one repeatable kind, consuming one state
 * annotation per press until the document runs out.
 */

export type Step =
  | { kind: "reveal-fragment"; slide: number; ordinal: number }
  | {
      kind: "code-variant-advance";
      slide: number;
      doc: string;
      fragment: number;
      variant: number;
    }
  | { kind: "selection-highlight"; slide: number; doc: string; fragment: number }
  | { kind: "proof-state-advance"; slide: number; doc: string };

/** One entry of a slide, in document order. */
export type SlideItem =
  | { kind: "fragment-element" }
  | { kind: "code"; doc: string };

export interface DocStepInfo {
  /** Variant count per construct, in construct order; 1 means selection. */
  fragments: Array<{ variants: number; selection: boolean }>;
  stateSteps: boolean;
}

/** Expand the deck description into per-slide step lists. */
export function buildPlan(
  slides: SlideItem[][],
  docInfo: (doc: string) => DocStepInfo,
): Step[][] {
  return slides.map((items, slideIndex) => {
    const steps: Step[] = [];
    let ordinal = 0;
    for (const item of items) {
      if (item.kind === "fragment-element") {
        steps.push({ kind: "reveal-fragment", slide: slideIndex, ordinal: ordinal++ });
        continue;
      }
      const info = docInfo(item.doc);
      info.fragments.forEach((frag, fragmentIndex) => {
        if (frag.selection) {
          steps.push({
            kind: "selection-highlight",
            slide: slideIndex,
            doc: item.doc,
            fragment: fragmentIndex,
          });
        } else {
          for (let v = 1; v < frag.variants; v++) {
            steps.push({
              kind: "code-variant-advance",
              slide: slideIndex,
              doc: item.doc,
              fragment: fragmentIndex,
              variant: v,
            });
          }
        }
      });
      if (info.stateSteps) {
        steps.push({ kind: "proof-state-advance", slide: slideIndex, doc: item.doc });
      }
    }
    return steps;
  });
}

export type StepAction =
  | { type: "slide"; index: number }
  | { type: "apply"; step: Step }
  | { type: "revert"; step: Step };

export interface StateHooks {
  /** Number of proof states currently available for a document. */
  stateCount(doc: string): number;
  /** Index of the state currently shown, -1 for none. */
  stateIndex(doc: string): number;
}

const NO_STATES: StateHooks = {
  stateCount: () => 0,
  stateIndex: () => -1,
};

/**
 * Cursor over a step plan. next/prev return the actions the UI must
 * perform; both clamp at the ends of the deck.
 */
export class Stepper {
  slide = 0;
  applied = 0;

  constructor(
    public plan: Step[][],
    private hooks: StateHooks = NO_STATES,
  ) {}

  private stateExhausted(doc: string): boolean {
    return this.hooks.stateIndex(doc) >= this.hooks.stateCount(doc) - 1;
  }

  next(): StepAction[] {
    const steps = this.plan[this.slide] ?? [];
    if (this.applied > 0) {
      const current = steps[this.applied - 1];
      if (current.kind === "proof-state-advance" && !this.stateExhausted(current.doc)) {
        return [{ type: "apply", step: current }];
      }
    }
    if (this.applied < steps.length) {
      const step = steps[this.applied++];
      return [{ type: "apply", step }];
    }
    if (this.slide + 1 < this.plan.length) {
      this.slide += 1;
      this.applied = 0;
      return [{ type: "slide", index: this.slide }];
    }
    return [];
  }

  prev(): StepAction[] {
    const steps = this.plan[this.slide] ?? [];
    if (this.applied > 0) {
      const current = steps[this.applied - 1];
      if (current.kind === "proof-state-advance" && this.hooks.stateIndex(current.doc) > 0) {
        return [{ type: "revert", step: current }];
      }
      this.applied -= 1;
      return [{ type: "revert", step: current }];
    }
    if (this.slide > 0) {
      this.slide -= 1;
      this.applied = (this.plan[this.slide] ?? []).length;
      return [
        { type: "slide", index: this.slide },
        ...(this.plan[this.slide] ?? []).map(
          (step): StepAction => ({ type: "apply", step }),
        ),
      ];
    }
    return [];
  }

  /** Jump straight to a slide with none of its steps applied. */
  jump(index: number): StepAction[] {
    const target = Math.max(0, Math.min(this.plan.length - 1, index));
    if (target === this.slide) return [];
    this.slide = target;
    this.applied = 0;
    return [{ type: "slide", index: target }];
  }
}
