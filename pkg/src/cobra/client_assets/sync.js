/**
 * Client half of the one-outstanding-operation scheme, plus the
 * annotation bookkeeping that keeps decorations in place while edits
 * are in flight.
 */
import { Operation, transformAnnotations } from "./ot.js";
export class SyncProtocolError extends Error {
}
/**
 * One synchronized document as the client sees it: the local text is
 * the last server revision plus at most one operation in flight plus a
 * buffer of everything typed since.
 */
export class ClientDoc {
    docId;
    text;
    seq;
    outstanding = null;
    buffer = null;
    /** Latest accepted annotation batch, in local-text coordinates. */
    annotations = [];
    showInfos = true;
    showWarnings = true;
    constructor(docId, text, seq) {
        this.docId = docId;
        this.text = text;
        this.seq = seq;
    }
    get pending() {
        return this.outstanding !== null || this.buffer !== null;
    }
    /** Apply a local operation; returns a message to send, if any. */
    localEdit(op) {
        this.text = op.apply(this.text);
        this.annotations = transformAnnotations(this.annotations, op);
        if (this.outstanding === null) {
            this.outstanding = op;
            return { parentSeq: this.seq, op };
        }
        this.buffer = this.buffer === null ? op : this.buffer.compose(op);
        return null;
    }
    /** Server acknowledged the outstanding op; may hand back the buffer. */
    ack(seq) {
        if (this.outstanding === null) {
            throw new SyncProtocolError("ack with no operation in flight");
        }
        this.seq = seq;
        this.outstanding = this.buffer;
        this.buffer = null;
        return this.outstanding === null
            ? null
            : { parentSeq: this.seq, op: this.outstanding };
    }
    /**
     * Ingest another session's committed operation; returns it
     * transformed to apply to the local text.
     */
    remoteEdit(seq, op) {
        if (this.outstanding !== null) {
            [this.outstanding, op] = Operation.transform(this.outstanding, op);
        }
        if (this.buffer !== null) {
            [this.buffer, op] = Operation.transform(this.buffer, op);
        }
        this.text = op.apply(this.text);
        this.annotations = transformAnnotations(this.annotations, op);
        this.seq = seq;
        return op;
    }
    /** Adopt an authoritative document state, dropping local edits. */
    reset(seq, text) {
        this.text = text;
        this.seq = seq;
        this.outstanding = null;
        this.buffer = null;
        this.annotations = [];
    }
    /**
     * Accept an annotation batch computed at server revision seq.
     * Batches for revisions other than the one this client sits on are
     * dropped; a fresh batch always follows further edits.
     */
    acceptAnnotations(seq, batch) {
        if (seq !== this.seq)
            return false;
        let mapped = [...batch];
        if (this.outstanding !== null) {
            mapped = transformAnnotations(mapped, this.outstanding);
        }
        if (this.buffer !== null) {
            mapped = transformAnnotations(mapped, this.buffer);
        }
        this.annotations = mapped;
        return true;
    }
    /** Annotations after the no-infos / no-warnings visibility filter. */
    get visibleAnnotations() {
        return this.annotations.filter((a) => {
            if (a.kind === "info" && !this.showInfos)
                return false;
            if (a.kind === "warning" && !this.showWarnings)
                return false;
            return true;
        });
    }
}
