import { describe, expect, it } from "vitest";

import { Annotation, Operation } from "../src/ot.js";
import { ClientDoc, SyncProtocolError } from "../src/sync.js";
import { randInt, randText, rng } from "./helpers.js";

describe("client document", () => {
  it("sends the first edit and buffers the rest", () => {
    const doc = new ClientDoc("d", "abc", 0);
    const first = doc.localEdit(new Operation().retain(3).insert("d"));
    expect(first).not.toBeNull();
    expect(first!.parentSeq).toBe(0);
    expect(doc.text).toBe("abcd");

    const second = doc.localEdit(new Operation().retain(4).insert("e"));
    expect(second).toBeNull();
    const third = doc.localEdit(new Operation().retain(5).insert("f"));
    expect(third).toBeNull();
    expect(doc.text).toBe("abcdef");

    // The ack releases both buffered edits composed into one.
    const next = doc.ack(1);
    expect(next).not.toBeNull();
    expect(next!.parentSeq).toBe(1);
    expect(next!.op.apply("abcd")).toBe("abcdef");
    expect(doc.ack(2)).toBeNull();
    expect(doc.pending).toBe(false);
  });

  it("rejects an ack with nothing in flight", () => {
    const doc = new ClientDoc("d", "", 0);
    expect(() => doc.ack(1)).toThrow(SyncProtocolError);
  });

  it("transforms remote edits past local pending ones", () => {
    const doc = new ClientDoc("d", "hello", 0);
    doc.localEdit(new Operation().retain(5).insert("!"));
    doc.localEdit(new Operation().insert(">").retain(6));
    // Server committed someone else's insert of "X" at position 0.
    const applied = doc.remoteEdit(1, new Operation().insert("X").retain(5));
    expect(doc.seq).toBe(1);
    expect(applied.apply(">hello!")).toBe(doc.text);
    expect(doc.text).toBe(">Xhello!");
  });

  it("adopts authoritative state on reset", () => {
    const doc = new ClientDoc("d", "abc", 3);
    doc.localEdit(new Operation().retain(3).insert("x"));
    doc.annotations = [{ start: 0, end: 1, kind: "error", message: null, cls: null }];
    doc.reset(7, "fresh");
    expect(doc.text).toBe("fresh");
    expect(doc.seq).toBe(7);
    expect(doc.pending).toBe(false);
    expect(doc.annotations).toEqual([]);
  });
});

describe("annotation acceptance", () => {
  const batch: Annotation[] = [
    { start: 0, end: 3, kind: "error", message: "bad", cls: null },
    { start: 4, end: 5, kind: "info", message: null, cls: "hole" },
    { start: 4, end: 5, kind: "warning", message: "todo", cls: null },
  ];

  it("drops batches for a revision the client is not on", () => {
    const doc = new ClientDoc("d", "abcdef", 5);
    expect(doc.acceptAnnotations(4, batch)).toBe(false);
    expect(doc.annotations).toEqual([]);
    expect(doc.acceptAnnotations(5, batch)).toBe(true);
    expect(doc.annotations).toEqual(batch);
  });

  it("maps server-revision coordinates through pending local edits", () => {
    const doc = new ClientDoc("d", "abcdef", 5);
    doc.localEdit(new Operation().insert("__").retain(6));
    expect(doc.acceptAnnotations(5, batch)).toBe(true);
    expect(doc.annotations.map((a) => [a.start, a.end])).toEqual([
      [2, 5],
      [6, 7],
      [6, 7],
    ]);
  });

  it("filters infos and warnings on request", () => {
    const doc = new ClientDoc("d", "abcdef", 5);
    doc.acceptAnnotations(5, batch);
    expect(doc.visibleAnnotations).toHaveLength(3);
    doc.showInfos = false;
    expect(doc.visibleAnnotations.map((a) => a.kind)).toEqual(["error", "warning"]);
    doc.showWarnings = false;
    expect(doc.visibleAnnotations.map((a) => a.kind)).toEqual(["error"]);
  });
});

/**
 * Miniature authoritative server: one document, a revision history,
 * per-connection delivery queues with arbitrary drain order.
 */
class MiniServer {
  text = "";
  history: Operation[] = [];

  constructor(text: string) {
    this.text = text;
  }

  get seq(): number {
    return this.history.length;
  }

  /** Commit an edit made against parentSeq; returns the canonical op. */
  commit(parentSeq: number, op: Operation): Operation {
    for (let i = parentSeq; i < this.history.length; i++) {
      [op] = Operation.transform(op, this.history[i]);
    }
    this.text = op.apply(this.text);
    this.history.push(op);
    return op;
  }
}

type Inbound =
  | { kind: "ack"; seq: number }
  | { kind: "remote"; seq: number; op: Operation };

class Session {
  doc: ClientDoc;
  inbox: Inbound[] = [];

  constructor(
    public readonly name: string,
    private server: MiniServer,
    private sessions: Session[],
  ) {
    this.doc = new ClientDoc("d", server.text, server.seq);
  }

  edit(op: Operation): void {
    const out = this.doc.localEdit(op);
    if (out) this.sendToServer(out.parentSeq, out.op);
  }

  private sendToServer(parentSeq: number, op: Operation): void {
    const canonical = this.server.commit(parentSeq, op);
    const seq = this.server.seq;
    for (const s of this.sessions) {
      if (s === this) s.inbox.push({ kind: "ack", seq });
      else s.inbox.push({ kind: "remote", seq, op: canonical });
    }
  }

  deliverOne(): boolean {
    const msg = this.inbox.shift();
    if (!msg) return false;
    if (msg.kind === "ack") {
      const next = this.doc.ack(msg.seq);
      if (next) this.sendToServer(next.parentSeq, next.op);
    } else {
      this.doc.remoteEdit(msg.seq, msg.op);
    }
    return true;
  }
}

function randomEdit(rand: () => number, len: number): Operation {
  const op = new Operation();
  if (len > 0 && rand() < 0.4) {
    const pos = randInt(rand, 0, len - 1);
    const n = randInt(rand, 1, Math.min(3, len - pos));
    return op.retain(pos).delete(n).retain(len - pos - n);
  }
  const pos = randInt(rand, 0, len);
  return op
    .retain(pos)
    .insert(randText(rand, "abcdef \n", randInt(rand, 1, 3)))
    .retain(len - pos);
}

describe("multi-session convergence", () => {
  it("converges 4 sessions over 400 interleaved edits", () => {
    const rand = rng(1618);
    const server = new MiniServer("fun seed = 0\n");
    const sessions: Session[] = [];
    for (let i = 0; i < 4; i++) {
      sessions.push(new Session(`s${i}`, server, sessions));
    }
    for (let round = 0; round < 100; round++) {
      for (const s of sessions) {
        if (rand() < 0.7) s.edit(randomEdit(rand, s.doc.text.length));
        // Deliver a random amount of queued traffic, possibly none, so
        // acknowledgements and remote edits interleave arbitrarily.
        for (let d = randInt(rand, 0, 2); d > 0; d--) s.deliverOne();
      }
    }
    let busy = true;
    while (busy) {
      busy = false;
      for (const s of sessions) {
        while (s.deliverOne()) busy = true;
      }
    }
    for (const s of sessions) {
      expect(s.doc.pending).toBe(false);
      expect(s.doc.text).toBe(server.text);
      expect(s.doc.seq).toBe(server.seq);
    }
  });
});
