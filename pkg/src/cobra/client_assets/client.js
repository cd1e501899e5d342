/**
 * Protocol client: keeps every opened document synchronized over one
 * socket and exposes the displayed form of each. DOM-free, so the
 * same core runs in the browser page and under plain Node tests; the
 * socket is injected.
 */
import { syntaxFor } from "./fragments.js";
import { Operation } from "./ot.js";
import { EditRejected, clampVariant, mapAnnotationsToDisplay, mapDisplayEdit, projectDisplay, toOut, toSrc, } from "./projection.js";
import { ClientDoc } from "./sync.js";
import { DecodeError, PROTOCOL_VERSION, decode, encode, } from "./wire.js";
/** One opened document with its local display state. */
export class DocHandle {
    info;
    syntax;
    doc;
    proj;
    fragmentState = new Map();
    highlighted = new Set();
    /** Proof state currently shown, -1 for none. */
    stateIndex = -1;
    constructor(info, syntax, text, seq) {
        this.info = info;
        this.syntax = syntax;
        this.doc = new ClientDoc(info.id, text, seq);
        this.proj = projectDisplay(text, syntax, this.fragmentState);
    }
    reproject() {
        this.proj = projectDisplay(this.doc.text, this.syntax, this.fragmentState);
    }
    get displayText() {
        return this.proj.text;
    }
    /** Decorations for the displayed text, highlights included. */
    displayAnnotations() {
        const out = mapAnnotationsToDisplay(this.proj, this.doc.visibleAnnotations);
        for (const idx of this.highlighted) {
            const frag = this.proj.fragments[idx];
            if (!frag)
                continue;
            for (const [s, e] of frag.variants[liveVariant(this, idx)].pieces) {
                for (const piece of this.proj.pieces) {
                    const lo = Math.max(s, piece.src);
                    const hi = Math.min(e, piece.src + piece.length);
                    if (lo < hi) {
                        out.push({
                            start: piece.out + lo - piece.src,
                            end: piece.out + hi - piece.src,
                            kind: "info",
                            message: null,
                            cls: "sel",
                        });
                    }
                }
            }
        }
        return out;
    }
    /** Messages of visible annotations covering a display offset. */
    messagesAtDisplay(offset) {
        const src = toSrc(this.proj, offset);
        const out = [];
        for (const ann of this.doc.visibleAnnotations) {
            const hit = ann.start === ann.end
                ? ann.start === src
                : ann.start <= src && src < ann.end;
            if (hit && ann.message)
                out.push(ann.message);
        }
        return [...new Set(out)];
    }
    /** Annotations with the given class, in document order. */
    byClass(cls) {
        return this.doc.annotations
            .filter((a) => a.cls === cls)
            .sort((a, b) => a.start - b.start || a.end - b.end);
    }
}
function liveVariant(handle, idx) {
    const frag = handle.proj.fragments[idx];
    const wanted = handle.fragmentState.get(idx) ?? 0;
    return clampVariant(frag, wanted);
}
export function isLoopbackHost(hostname) {
    const h = hostname.replace(/^\[|\]$/g, "").toLowerCase();
    return h === "localhost" || h === "::1" || /^127(\.\d{1,3}){3}$/.test(h);
}
export class PresentationClient {
    boot;
    options;
    docs = new Map();
    digest = null;
    connected = false;
    transport = null;
    closed = false;
    events;
    reconnectDelay;
    constructor(boot, options) {
        this.boot = boot;
        this.options = options;
        this.events = options.events ?? {};
        this.reconnectDelay = options.reconnectDelayMs ?? 1000;
    }
    /** Open the socket and start the hello exchange. */
    connect() {
        this.transport = this.options.transport(this.options.url, {
            onOpen: () => {
                this.send({ type: "client-hello", protocolVersion: PROTOCOL_VERSION });
            },
            onMessage: (data) => this.onFrame(data),
            onClose: () => {
                const was = this.connected;
                this.connected = false;
                if (was)
                    this.events.connectionChanged?.(false);
                if (!this.closed && this.reconnectDelay > 0) {
                    setTimeout(() => {
                        if (!this.closed)
                            this.connect();
                    }, this.reconnectDelay);
                }
            },
        });
    }
    close() {
        this.closed = true;
        this.transport?.close();
    }
    send(msg) {
        this.transport?.send(encode(msg));
    }
    onFrame(data) {
        let msg;
        try {
            msg = decode(data);
        }
        catch (err) {
            if (err instanceof DecodeError)
                return;
            throw err;
        }
        this.handle(msg);
    }
    handle(msg) {
        switch (msg.type) {
            case "server-hello":
                this.digest = msg.digest;
                this.connected = true;
                this.events.connectionChanged?.(true);
                this.events.hello?.(msg.digest, msg.docs);
                for (const doc of this.boot.documents) {
                    if (doc.classes.includes("hidden"))
                        continue;
                    this.send({ type: "open-doc", docId: doc.id });
                }
                break;
            case "doc-state": {
                let handle = this.docs.get(msg.docId);
                if (!handle) {
                    const info = this.boot.documents.find((d) => d.id === msg.docId) ??
                        { id: msg.docId, classes: [], language: this.boot.language, kind: "inline" };
                    handle = new DocHandle(info, syntaxFor(info.language), msg.text, msg.seq);
                    this.docs.set(msg.docId, handle);
                    this.applyVisibility(handle);
                }
                else {
                    handle.doc.reset(msg.seq, msg.text);
                }
                handle.reproject();
                this.events.docChanged?.(msg.docId);
                break;
            }
            case "ack": {
                const handle = this.docs.get(msg.docId);
                if (!handle)
                    break;
                const next = handle.doc.ack(msg.seq);
                if (next) {
                    this.send({
                        type: "edit",
                        docId: msg.docId,
                        parentSeq: next.parentSeq,
                        op: next.op,
                    });
                }
                break;
            }
            case "remote-edit": {
                const handle = this.docs.get(msg.docId);
                if (!handle)
                    break;
                handle.doc.remoteEdit(msg.seq, msg.op);
                handle.reproject();
                this.events.docChanged?.(msg.docId);
                break;
            }
            case "annotations": {
                const handle = this.docs.get(msg.docId);
                if (!handle)
                    break;
                if (handle.doc.acceptAnnotations(msg.seq, msg.annotations)) {
                    this.events.docChanged?.(msg.docId);
                }
                break;
            }
            case "fragment-step": {
                const handle = this.docs.get(msg.docId);
                if (!handle)
                    break;
                this.applyFragmentStep(handle, msg.fragmentIndex, msg.variantIndex);
                this.events.fragmentStepped?.(msg.docId, msg.fragmentIndex, msg.variantIndex);
                break;
            }
            case "settings-changed":
                for (const change of msg.changes)
                    this.applySetting(change);
                this.events.settingsChanged?.(msg.changes);
                break;
            case "error":
                if (msg.code === "version-mismatch") {
                    this.closed = true;
                    this.events.fatal?.(msg.message || "protocol version mismatch");
                }
                // edit-rejected is followed by a fresh DocState; nothing to do.
                break;
            default:
                break;
        }
    }
    applySetting(change) {
        if (change.path === "show.infos" || change.path === "show.warnings") {
            const value = change.new === true;
            if (change.path === "show.infos")
                this.boot.show_infos = value;
            else
                this.boot.show_warnings = value;
            for (const handle of this.docs.values()) {
                this.applyVisibility(handle);
                this.events.docChanged?.(handle.info.id);
            }
        }
    }
    applyVisibility(handle) {
        handle.doc.showInfos =
            this.boot.show_infos && !handle.info.classes.includes("no-infos");
        handle.doc.showWarnings =
            this.boot.show_warnings && !handle.info.classes.includes("no-warnings");
    }
    /**
     * Replace a document's displayed text with what the user typed.
     * Returns false when the change cannot be expressed as an edit of
     * the synchronized text; the caller should re-render from the model.
     */
    editDisplay(docId, newDisplayText) {
        const handle = this.docs.get(docId);
        if (!handle)
            return false;
        const displayOp = Operation.diff(handle.displayText, newDisplayText);
        if (displayOp.isIdentity)
            return true;
        let srcOp;
        try {
            srcOp = mapDisplayEdit(handle.proj, displayOp);
        }
        catch (err) {
            if (err instanceof EditRejected)
                return false;
            throw err;
        }
        const outgoing = handle.doc.localEdit(srcOp);
        handle.reproject();
        if (outgoing) {
            this.send({
                type: "edit",
                docId,
                parentSeq: outgoing.parentSeq,
                op: outgoing.op,
            });
        }
        this.events.docChanged?.(docId);
        return true;
    }
    /** Step a fragment to a variant, broadcasting when presenting. */
    stepFragment(docId, fragmentIndex, variantIndex) {
        const handle = this.docs.get(docId);
        if (!handle)
            return;
        this.applyFragmentStep(handle, fragmentIndex, variantIndex);
        if (this.options.presenter) {
            this.send({ type: "fragment-step", docId, fragmentIndex, variantIndex });
        }
    }
    applyFragmentStep(handle, fragmentIndex, variantIndex) {
        const frag = handle.proj.fragments[fragmentIndex];
        if (!frag)
            return;
        handle.fragmentState.set(fragmentIndex, clampVariant(frag, variantIndex));
        handle.reproject();
        this.events.docChanged?.(handle.info.id);
    }
    /** Toggle the highlight of a selection fragment. */
    setHighlight(docId, fragmentIndex, on) {
        const handle = this.docs.get(docId);
        if (!handle)
            return;
        if (on)
            handle.highlighted.add(fragmentIndex);
        else
            handle.highlighted.delete(fragmentIndex);
        this.events.docChanged?.(docId);
    }
}
/** Map a display caret through a remote change of the synced text. */
export function caretThrough(before, after, op, displayPos) {
    const src = toSrc(before, displayPos);
    let mapped = src;
    let base = 0;
    for (const c of op.ops) {
        if (typeof c === "string") {
            if (base < src)
                mapped += c.length;
        }
        else if (c > 0) {
            base += c;
        }
        else {
            const n = -c;
            if (base < src)
                mapped -= Math.min(n, src - base);
            base += n;
        }
    }
    const out = toOut(after, mapped);
    if (out !== null)
        return out;
    // Fell into hidden scaffolding; snap to the nearest visible spot.
    let best = after.text.length;
    for (const piece of after.pieces) {
        if (piece.src >= mapped) {
            best = piece.out;
            break;
        }
        best = piece.out + piece.length;
    }
    return Math.min(best, after.text.length);
}
