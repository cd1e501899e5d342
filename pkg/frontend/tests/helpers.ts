import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { Annotation, Component, Operation } from "../src/ot.js";
import { Message } from "../src/wire.js";
import { FragmentState } from "../src/projection.js";

export function loadVectors<T>(name: string): T {
  const path = fileURLToPath(new URL(`./vectors/${name}`, import.meta.url));
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

export function opFrom(components: Component[]): Operation {
  return new Operation(components);
}

export function stateFrom(state: Record<string, number>): FragmentState {
  return new Map(Object.entries(state).map(([k, v]) => [Number(k), v]));
}

export function hexToBytes(hex: string): Uint8Array {
  const out = new Uint8Array(hex.length / 2);
  for (let i = 0; i < out.length; i++) {
    out[i] = parseInt(hex.slice(2 * i, 2 * i + 2), 16);
  }
  return out;
}

export function bytesToHex(data: Uint8Array): string {
  return [...data].map((b) => b.toString(16).padStart(2, "0")).join("");
}

/** Flatten a message into the JSON shape the vector generator emits. */
export function messageToJson(msg: Message): unknown {
  switch (msg.type) {
    case "client-hello":
      return { type: msg.type, protocolVersion: msg.protocolVersion };
    case "server-hello":
      return { type: msg.type, digest: msg.digest, docs: msg.docs };
    case "open-doc":
      return { type: msg.type, docId: msg.docId };
    case "doc-state":
      return { type: msg.type, docId: msg.docId, seq: msg.seq, text: msg.text };
    case "edit":
      return {
        type: msg.type,
        docId: msg.docId,
        parentSeq: msg.parentSeq,
        op: msg.op.ops,
      };
    case "ack":
      return { type: msg.type, docId: msg.docId, seq: msg.seq };
    case "remote-edit":
      return {
        type: msg.type,
        docId: msg.docId,
        seq: msg.seq,
        op: msg.op.ops,
        author: msg.author,
      };
    case "annotations":
      return {
        type: msg.type,
        docId: msg.docId,
        seq: msg.seq,
        annotations: msg.annotations,
      };
    case "fragment-step":
      return {
        type: msg.type,
        docId: msg.docId,
        fragmentIndex: msg.fragmentIndex,
        variantIndex: msg.variantIndex,
      };
    case "settings-changed":
      return { type: msg.type, changes: msg.changes };
    case "error":
      return { type: msg.type, code: msg.code, message: msg.message };
  }
}

export interface JsonAnnotation {
  start: number;
  end: number;
  kind: string;
  message: string | null;
  cls: string | null;
}

export function annFrom(a: JsonAnnotation): Annotation {
  return {
    start: a.start,
    end: a.end,
    kind: a.kind as Annotation["kind"],
    message: a.message,
    cls: a.cls,
  };
}

/** Rebuild a wire message from its vector JSON form. */
export function messageFromJson(json: any): Message {
  switch (json.type) {
    case "edit":
      return {
        type: "edit",
        docId: json.docId,
        parentSeq: json.parentSeq,
        op: opFrom(json.op),
      };
    case "remote-edit":
      return {
        type: "remote-edit",
        docId: json.docId,
        seq: json.seq,
        op: opFrom(json.op),
        author: json.author,
      };
    case "annotations":
      return {
        type: "annotations",
        docId: json.docId,
        seq: json.seq,
        annotations: json.annotations.map(annFrom),
      };
    default:
      return json as Message;
  }
}

/** Deterministic RNG (mulberry32) so failures reproduce. */
export function rng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a += 0x6d2b79f5;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randInt(rand: () => number, lo: number, hi: number): number {
  return lo + Math.floor(rand() * (hi - lo + 1));
}

export function randText(rand: () => number, pool: string, len: number): string {
  let out = "";
  for (let i = 0; i < len; i++) out += pool[Math.floor(rand() * pool.length)];
  return out;
}

const POOL = "abcdefg \n(){}?123";

/** Random operation sized for a base text, mirroring the vector generator. */
export function randomOp(rand: () => number, baseLen: number): Operation {
  const op = new Operation();
  let pos = 0;
  while (pos < baseLen) {
    const n = randInt(rand, 1, Math.max(1, Math.min(7, baseLen - pos)));
    const roll = rand();
    if (roll < 0.5) {
      op.retain(n);
      pos += n;
    } else if (roll < 0.75) {
      op.delete(n);
      pos += n;
    } else {
      op.insert(randText(rand, POOL, randInt(rand, 1, 4)));
    }
  }
  if (rand() < 0.3) op.insert(POOL[Math.floor(rand() * POOL.length)]);
  return op;
}

export function randomBase(rand: () => number, maxLen = 25): string {
  return randText(rand, POOL, randInt(rand, 0, maxLen));
}
