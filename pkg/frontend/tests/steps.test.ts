import { describe, expect, it } from "vitest";

import {
  DocStepInfo,
  SlideItem,
  Step,
  StepAction,
  Stepper,
  buildPlan,
} from "../src/steps.js";

const DOCS: Record<string, DocStepInfo> = {
  staged: {
    fragments: [
      { variants: 3, selection: false },
      { variants: 1, selection: true },
    ],
    stateSteps: false,
  },
  plain: { fragments: [], stateSteps: false },
  proof: { fragments: [], stateSteps: true },
};

const infoFor = (doc: string) => DOCS[doc];

describe("plan expansion", () => {
  it("expands slide items in document order", () => {
    const slides: SlideItem[][] = [
      [
        { kind: "fragment-element" },
        { kind: "code", doc: "staged" },
        { kind: "fragment-element" },
      ],
      [{ kind: "code", doc: "plain" }],
    ];
    const plan = buildPlan(slides, infoFor);
    expect(plan).toEqual([
      [
        { kind: "reveal-fragment", slide: 0, ordinal: 0 },
        { kind: "code-variant-advance", slide: 0, doc: "staged", fragment: 0, variant: 1 },
        { kind: "code-variant-advance", slide: 0, doc: "staged", fragment: 0, variant: 2 },
        { kind: "selection-highlight", slide: 0, doc: "staged", fragment: 1 },
        { kind: "reveal-fragment", slide: 0, ordinal: 1 },
      ],
      [],
    ]);
  });

  it("emits one repeatable proof-state step per stateful code block", () => {
    const plan = buildPlan([[{ kind: "code", doc: "proof" }]], infoFor);
    expect(plan).toEqual([[{ kind: "proof-state-advance", slide: 0, doc: "proof" }]]);
  });
});

function applyAll(actions: StepAction[], log: string[]): void {
  for (const a of actions) {
    if (a.type === "slide") log.push(`slide:${a.index}`);
    else log.push(`${a.type}:${describeStep(a.step)}`);
  }
}

function describeStep(s: Step): string {
  switch (s.kind) {
    case "reveal-fragment":
      return `reveal(${s.slide},${s.ordinal})`;
    case "code-variant-advance":
      return `variant(${s.doc},${s.fragment},${s.variant})`;
    case "selection-highlight":
      return `select(${s.doc},${s.fragment})`;
    case "proof-state-advance":
      return `state(${s.doc})`;
  }
}

describe("stepper", () => {
  const slides: SlideItem[][] = [
    [{ kind: "fragment-element" }, { kind: "code", doc: "staged" }],
    [{ kind: "fragment-element" }],
  ];
  const plan = () => buildPlan(slides, infoFor);

  it("walks forward one step per press, then advances the slide", () => {
    const stepper = new Stepper(plan());
    const log: string[] = [];
    for (let i = 0; i < 7; i++) applyAll(stepper.next(), log);
    expect(log).toEqual([
      "apply:reveal(0,0)",
      "apply:variant(staged,0,1)",
      "apply:variant(staged,0,2)",
      "apply:select(staged,1)",
      "slide:1",
      "apply:reveal(1,0)",
      // Pressing past the end of the deck does nothing.
    ]);
    expect(stepper.next()).toEqual([]);
  });

  it("walks backward by reverting in reverse order", () => {
    const stepper = new Stepper(plan());
    while (stepper.next().length > 0) {
      // run to the end
    }
    const log: string[] = [];
    applyAll(stepper.prev(), log);
    expect(log).toEqual(["revert:reveal(1,0)"]);
    applyAll(stepper.prev(), log);
    // Leaving slide 1 backwards lands on slide 0 fully stepped.
    expect(log.slice(1)).toEqual([
      "slide:0",
      "apply:reveal(0,0)",
      "apply:variant(staged,0,1)",
      "apply:variant(staged,0,2)",
      "apply:select(staged,1)",
    ]);
    applyAll(stepper.prev(), []);
    expect(stepper.slide).toBe(0);
    expect(stepper.applied).toBe(3);
  });

  it("is reversible: forward n then backward n restores the cursor", () => {
    const stepper = new Stepper(plan());
    for (let n = 1; n <= 6; n++) {
      for (let i = 0; i < n; i++) stepper.next();
      for (let i = 0; i < n; i++) stepper.prev();
      expect([stepper.slide, stepper.applied]).toEqual([0, 0]);
      expect(stepper.prev()).toEqual([]);
    }
  });

  it("jump lands on a slide with nothing applied and clamps", () => {
    const stepper = new Stepper(plan());
    expect(stepper.jump(99)).toEqual([{ type: "slide", index: 1 }]);
    expect(stepper.applied).toBe(0);
    expect(stepper.jump(-5)).toEqual([{ type: "slide", index: 0 }]);
    expect(stepper.jump(0)).toEqual([]);
  });
});

describe("proof-state stepping", () => {
  it("repeats the state step until the document runs out of states", () => {
    let stateIndex = -1;
    const stepper = new Stepper(
      buildPlan(
        [[{ kind: "code", doc: "proof" }], [{ kind: "fragment-element" }]],
        infoFor,
      ),
      { stateCount: () => 3, stateIndex: () => stateIndex },
    );
    const seen: string[] = [];
    for (let i = 0; i < 4; i++) {
      const actions = stepper.next();
      for (const a of actions) {
        if (a.type === "apply" && a.step.kind === "proof-state-advance") {
          stateIndex += 1;
          seen.push(`state=${stateIndex}`);
        } else if (a.type === "slide") {
          seen.push(`slide:${a.index}`);
        }
      }
    }
    expect(seen).toEqual(["state=0", "state=1", "state=2", "slide:1"]);

    stepper.prev(); // back onto slide 0, fully applied
    const back: string[] = [];
    for (let i = 0; i < 4; i++) {
      const actions = stepper.prev();
      if (actions.length === 0) {
        back.push("stop");
        break;
      }
      for (const a of actions) {
        if (a.type === "revert" && a.step.kind === "proof-state-advance") {
          stateIndex -= 1;
          back.push(`state=${stateIndex}`);
        }
      }
    }
    expect(back).toEqual(["state=1", "state=0", "state=-1", "stop"]);
  });
});
