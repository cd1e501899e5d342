/**
 * Slide chrome: which slide is shown, fragment visibility, the slide
 * counter, the key-binding help overlay, tooltips, and the fatal
 * banner. Pure DOM; stepping decisions live in steps.ts.
 */
export class DeckView {
    doc;
    slides = [];
    current = 0;
    hud;
    help;
    tooltip;
    constructor(doc) {
        this.doc = doc;
        const top = doc.querySelectorAll(".reveal .slides > section");
        for (const section of top) {
            const vertical = section.querySelectorAll(":scope > section");
            if (vertical.length === 0) {
                this.slides.push({ element: section, parent: null });
            }
            else {
                for (const child of vertical) {
                    this.slides.push({ element: child, parent: section });
                }
            }
        }
        this.hud = doc.createElement("div");
        this.hud.className = "cb-hud";
        doc.body.appendChild(this.hud);
        this.help = this.buildHelp();
        doc.body.appendChild(this.help);
        this.tooltip = doc.createElement("div");
        this.tooltip.className = "cb-tooltip cb-hidden";
        doc.body.appendChild(this.tooltip);
        this.present(0);
    }
    present(index) {
        this.current = Math.max(0, Math.min(this.slides.length - 1, index));
        this.slides.forEach((slide, i) => {
            const on = i === this.current;
            slide.element.classList.toggle("present", on);
            if (slide.parent)
                slide.parent.classList.toggle("present", on);
        });
        this.hud.textContent = `${this.current + 1} / ${this.slides.length}`;
        if (this.doc.defaultView) {
            this.doc.defaultView.location.hash = `#/${this.current + 1}`;
        }
    }
    /** Fragment elements of a slide, in document order. */
    fragmentElements(index) {
        const slide = this.slides[index];
        return slide
            ? [...slide.element.querySelectorAll(".fragment")]
            : [];
    }
    revealFragment(slide, ordinal, on) {
        const el = this.fragmentElements(slide)[ordinal];
        el?.classList.toggle("visible", on);
    }
    hideAllFragments(slide) {
        for (const el of this.fragmentElements(slide))
            el.classList.remove("visible");
    }
    showAllFragments(slide) {
        for (const el of this.fragmentElements(slide))
            el.classList.add("visible");
    }
    slideFromHash(hash) {
        const m = /^#\/(\d+)$/.exec(hash);
        return m ? parseInt(m[1], 10) - 1 : null;
    }
    toggleHelp() {
        this.help.classList.toggle("visible");
    }
    get helpVisible() {
        return this.help.classList.contains("visible");
    }
    buildHelp() {
        const overlay = this.doc.createElement("div");
        overlay.className = "cb-help";
        const card = this.doc.createElement("div");
        card.className = "cb-help-card";
        const rows = [
            ["→ / Space", "next step"],
            ["←", "previous step"],
            ["Home / End", "first / last slide"],
            ["Esc", "leave code editor"],
            ["?", "toggle this help"],
        ];
        const table = this.doc.createElement("table");
        for (const [keys, what] of rows) {
            const tr = this.doc.createElement("tr");
            const kcell = this.doc.createElement("td");
            const kbd = this.doc.createElement("kbd");
            kbd.textContent = keys;
            kcell.appendChild(kbd);
            const wcell = this.doc.createElement("td");
            wcell.textContent = what;
            tr.appendChild(kcell);
            tr.appendChild(wcell);
            table.appendChild(tr);
        }
        card.appendChild(table);
        overlay.appendChild(card);
        return overlay;
    }
    showTooltip(text, x, y) {
        this.tooltip.textContent = text;
        this.tooltip.style.left = `${x + 8}px`;
        this.tooltip.style.top = `${y + 12}px`;
        this.tooltip.classList.remove("cb-hidden");
    }
    hideTooltip() {
        this.tooltip.classList.add("cb-hidden");
    }
    banner(message) {
        const el = this.doc.createElement("div");
        el.className = "cb-banner";
        el.textContent = message;
        this.doc.body.appendChild(el);
    }
}
