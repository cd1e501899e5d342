/**
 * Client half of the one-outstanding-operation scheme, plus the
 * annotation bookkeeping that keeps decorations in place while edits
 * are in flight.
 */

import { Annotation, Operation, transformAnnotations } from "./ot.js";

export interface Outgoing {
  parentSeq: number;
  op: Operation;
}

export class SyncProtocolError extends Error {}

/**
 * One synchronized document as the client sees it: the local text is
 * the last server revision plus at most one operation in flight plus a
 * buffer of everything typed since.
 */
export class ClientDoc {
  text: string;
  seq: number;
  outstanding: Operation | null = null;
  buffer: Operation | null = null;

  /** Latest accepted annotation batch, in local-text coordinates. */
  annotations: Annotation[] = [];
  showInfos = true;
  showWarnings = true;

  constructor(
    public readonly docId: string,
    text: string,
    seq: number,
  ) {
    this.text = text;
    this.seq = seq;
  }

  get pending(): boolean {
    return this.outstanding !== null || this.buffer !== null;
  }

  /** Apply a local operation; returns a message to send, if any. */
  localEdit(op: Operation): Outgoing | null {
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
  ack(seq: number): Outgoing | null {
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
  remoteEdit(seq: number, op: Operation): Operation {
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
  reset(seq: number, text: string): void {
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
  acceptAnnotations(seq: number, batch: readonly Annotation[]): boolean {
    if (seq !== this.seq) return false;
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
  get visibleAnnotations(): Annotation[] {
    return this.annotations.filter((a) => {
      if (a.kind === "info" && !this.showInfos) return false;
      if (a.kind === "warning" && !this.showWarnings) return false;
      return true;
    });
  }
}
