/**
 * Binary codec for the synchronization protocol. Frames are a 1-byte
 * tag followed by the fields in order: unsigned LEB128 varints,
 * varint-length UTF-8 strings, 0/1 booleans, varint-count lists.
 * Layout matches the server byte for byte.
 */

import { Annotation, AnnotationKind, KINDS, Operation } from "./ot.js";

export const PROTOCOL_VERSION = 1;

export class DecodeError extends Error {
  constructor(
    public offset: number,
    public reason: string,
  ) {
    super(`offset ${offset}: ${reason}`);
  }
}

export interface SettingChange {
  path: string;
  old: unknown;
  new: unknown;
  hot: boolean;
}

export type Message =
  | { type: "client-hello"; protocolVersion: number }
  | { type: "server-hello"; digest: string; docs: string[] }
  | { type: "open-doc"; docId: string }
  | { type: "doc-state"; docId: string; seq: number; text: string }
  | { type: "edit"; docId: string; parentSeq: number; op: Operation }
  | { type: "ack"; docId: string; seq: number }
  | { type: "remote-edit"; docId: string; seq: number; op: Operation; author: number }
  | { type: "annotations"; docId: string; seq: number; annotations: Annotation[] }
  | { type: "fragment-step"; docId: string; fragmentIndex: number; variantIndex: number }
  | { type: "settings-changed"; changes: SettingChange[] }
  | { type: "error"; code: string; message: string };

const TAGS: Message["type"][] = [
  "client-hello",
  "server-hello",
  "open-doc",
  "doc-state",
  "edit",
  "ack",
  "remote-edit",
  "annotations",
  "fragment-step",
  "settings-changed",
  "error",
];

const utf8 = new TextEncoder();
const utf8dec = new TextDecoder("utf-8", { fatal: true });

// ---------------------------------------------------------------------------
// Writing

class Writer {
  private bytes: number[] = [];

  byte(b: number): void {
    this.bytes.push(b);
  }

  varint(n: number): void {
    if (n < 0) throw new RangeError(`negative varint: ${n}`);
    for (;;) {
      const b = n & 0x7f;
      n = Math.floor(n / 128);
      if (n) this.bytes.push(b | 0x80);
      else {
        this.bytes.push(b);
        return;
      }
    }
  }

  string(s: string): void {
    const data = utf8.encode(s);
    this.varint(data.length);
    for (const b of data) this.bytes.push(b);
  }

  bool(b: boolean): void {
    this.bytes.push(b ? 1 : 0);
  }

  op(op: Operation): void {
    this.varint(op.ops.length);
    for (const comp of op.ops) {
      if (typeof comp === "string") {
        this.byte(1);
        this.string(comp);
      } else if (comp > 0) {
        this.byte(0);
        this.varint(comp);
      } else {
        this.byte(2);
        this.varint(-comp);
      }
    }
  }

  annotation(a: Annotation): void {
    this.varint(a.start);
    this.varint(a.end);
    this.byte(KINDS.indexOf(a.kind));
    this.string(a.message ?? "");
    this.string(a.cls ?? "");
  }

  finish(): Uint8Array {
    return Uint8Array.from(this.bytes);
  }
}

/** Encode a message to its binary frame. */
export function encode(msg: Message): Uint8Array {
  const w = new Writer();
  w.byte(TAGS.indexOf(msg.type));
  switch (msg.type) {
    case "client-hello":
      w.varint(msg.protocolVersion);
      break;
    case "server-hello":
      w.string(msg.digest);
      w.varint(msg.docs.length);
      for (const doc of msg.docs) w.string(doc);
      break;
    case "open-doc":
      w.string(msg.docId);
      break;
    case "doc-state":
      w.string(msg.docId);
      w.varint(msg.seq);
      w.string(msg.text);
      break;
    case "edit":
      w.string(msg.docId);
      w.varint(msg.parentSeq);
      w.op(msg.op);
      break;
    case "ack":
      w.string(msg.docId);
      w.varint(msg.seq);
      break;
    case "remote-edit":
      w.string(msg.docId);
      w.varint(msg.seq);
      w.op(msg.op);
      w.varint(msg.author);
      break;
    case "annotations":
      w.string(msg.docId);
      w.varint(msg.seq);
      w.varint(msg.annotations.length);
      for (const a of msg.annotations) w.annotation(a);
      break;
    case "fragment-step":
      w.string(msg.docId);
      w.varint(msg.fragmentIndex);
      w.varint(msg.variantIndex);
      break;
    case "settings-changed":
      w.varint(msg.changes.length);
      for (const change of msg.changes) {
        w.string(change.path);
        w.string(JSON.stringify(change.old));
        w.string(JSON.stringify(change.new));
        w.bool(change.hot);
      }
      break;
    case "error":
      w.string(msg.code);
      w.string(msg.message);
      break;
  }
  return w.finish();
}

// ---------------------------------------------------------------------------
// Reading

class Reader {
  pos = 0;

  constructor(private data: Uint8Array) {}

  fail(reason: string): DecodeError {
    return new DecodeError(this.pos, reason);
  }

  byte(): number {
    if (this.pos >= this.data.length) throw this.fail("truncated");
    return this.data[this.pos++];
  }

  varint(): number {
    let result = 0;
    let shift = 0;
    for (;;) {
      const b = this.byte();
      result += (b & 0x7f) * 2 ** shift;
      if (!(b & 0x80)) return result;
      shift += 7;
      if (shift > 63) throw this.fail("varint too long");
    }
  }

  string(): string {
    const length = this.varint();
    if (this.pos + length > this.data.length) throw this.fail("truncated string");
    const raw = this.data.subarray(this.pos, this.pos + length);
    this.pos += length;
    try {
      return utf8dec.decode(raw);
    } catch {
      throw this.fail("invalid UTF-8");
    }
  }

  bool(): boolean {
    const b = this.byte();
    if (b > 1) throw this.fail("invalid boolean");
    return b === 1;
  }

  op(): Operation {
    const count = this.varint();
    const op = new Operation();
    for (let i = 0; i < count; i++) {
      const kind = this.byte();
      if (kind === 0) op.retain(this.varint());
      else if (kind === 1) op.insert(this.string());
      else if (kind === 2) op.delete(this.varint());
      else throw this.fail(`invalid op component kind ${kind}`);
    }
    return op;
  }

  annotation(): Annotation {
    const start = this.varint();
    const end = this.varint();
    const kindIndex = this.byte();
    if (kindIndex >= KINDS.length) {
      throw this.fail(`invalid annotation kind ${kindIndex}`);
    }
    const message = this.string();
    const cls = this.string();
    if (start > end) throw this.fail(`bad annotation range [${start}, ${end})`);
    return {
      start,
      end,
      kind: KINDS[kindIndex] as AnnotationKind,
      message: message || null,
      cls: cls || null,
    };
  }

  json(): unknown {
    const raw = this.string();
    if (!raw) return null;
    try {
      return JSON.parse(raw);
    } catch {
      throw this.fail("invalid change value");
    }
  }

  get atEnd(): boolean {
    return this.pos === this.data.length;
  }
}

/** Decode one binary frame; trailing bytes are an error. */
export function decode(data: Uint8Array): Message {
  const r = new Reader(data);
  const tag = r.byte();
  if (tag >= TAGS.length) throw new DecodeError(0, `unknown tag ${tag}`);
  const msg = decodeBody(TAGS[tag], r);
  if (!r.atEnd) throw new DecodeError(r.pos, "trailing data");
  return msg;
}

function decodeBody(type: Message["type"], r: Reader): Message {
  switch (type) {
    case "client-hello":
      return { type, protocolVersion: r.varint() };
    case "server-hello": {
      const digest = r.string();
      const docs: string[] = [];
      const count = r.varint();
      for (let i = 0; i < count; i++) docs.push(r.string());
      return { type, digest, docs };
    }
    case "open-doc":
      return { type, docId: r.string() };
    case "doc-state":
      return { type, docId: r.string(), seq: r.varint(), text: r.string() };
    case "edit":
      return { type, docId: r.string(), parentSeq: r.varint(), op: r.op() };
    case "ack":
      return { type, docId: r.string(), seq: r.varint() };
    case "remote-edit":
      return {
        type,
        docId: r.string(),
        seq: r.varint(),
        op: r.op(),
        author: r.varint(),
      };
    case "annotations": {
      const docId = r.string();
      const seq = r.varint();
      const annotations: Annotation[] = [];
      const count = r.varint();
      for (let i = 0; i < count; i++) annotations.push(r.annotation());
      return { type, docId, seq, annotations };
    }
    case "fragment-step":
      return {
        type,
        docId: r.string(),
        fragmentIndex: r.varint(),
        variantIndex: r.varint(),
      };
    case "settings-changed": {
      const changes: SettingChange[] = [];
      const count = r.varint();
      for (let i = 0; i < count; i++) {
        const path = r.string();
        const old = r.json();
        const next = r.json();
        const hot = r.bool();
        changes.push({ path, old, new: next, hot });
      }
      return { type, changes };
    }
    case "error":
      return { type, code: r.string(), message: r.string() };
  }
}
