/**
 * The presentation step sequence: which fragment appears, which code
 * variant becomes active, which range gets highlighted, one keypress at
 * a time. The plan is computed once from the deck and is reversible;
 * proof-state steps are the one repeatable kind, consuming one state
 * annotation per press until the document runs out.
 */
/** Expand the deck description into per-slide step lists. */
export function buildPlan(slides, docInfo) {
    return slides.map((items, slideIndex) => {
        const steps = [];
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
                }
                else {
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
const NO_STATES = {
    stateCount: () => 0,
    stateIndex: () => -1,
};
/**
 * Cursor over a step plan. next/prev return the actions the UI must
 * perform; both clamp at the ends of the deck.
 */
export class Stepper {
    plan;
    hooks;
    slide = 0;
    applied = 0;
    constructor(plan, hooks = NO_STATES) {
        this.plan = plan;
        this.hooks = hooks;
    }
    stateExhausted(doc) {
        return this.hooks.stateIndex(doc) >= this.hooks.stateCount(doc) - 1;
    }
    next() {
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
    prev() {
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
                ...(this.plan[this.slide] ?? []).map((step) => ({ type: "apply", step })),
            ];
        }
        return [];
    }
    /** Jump straight to a slide with none of its steps applied. */
    jump(index) {
        const target = Math.max(0, Math.min(this.plan.length - 1, index));
        if (target === this.slide)
            return [];
        this.slide = target;
        this.applied = 0;
        return [{ type: "slide", index: target }];
    }
}
