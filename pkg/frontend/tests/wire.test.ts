import { describe, expect, it } from "vitest";

import { DecodeError, Message, decode, encode } from "../src/wire.js";
import {
  bytesToHex,
  hexToBytes,
  loadVectors,
  messageFromJson,
  messageToJson,
  randInt,
  randText,
  rng,
} from "./helpers.js";
import { Operation } from "../src/ot.js";

interface WireVectors {
  cases: Array<{ hex: string; message: any }>;
}

const vectors = loadVectors<WireVectors>("wire.json");

function hasObjectSettingValue(message: any): boolean {
  if (message.type !== "settings-changed") return false;
  return message.changes.some(
    (c: any) =>
      (c.old !== null && typeof c.old === "object") ||
      (c.new !== null && typeof c.new === "object"),
  );
}

describe("wire vectors", () => {
  it("pins the hand-computed ack frame", () => {
    expect(bytesToHex(encode({ type: "ack", docId: "d", seq: 1 }))).toBe(
      "05016401",
    );
  });

  it("decodes every server-encoded frame to the expected message", () => {
    for (const c of vectors.cases) {
      expect(messageToJson(decode(hexToBytes(c.hex)))).toEqual(c.message);
    }
  });

  it("re-encodes every vector to the identical bytes", () => {
    for (const c of vectors.cases) {
      if (hasObjectSettingValue(c.message)) {
        // Structured setting values travel as JSON text; Python and
        // JSON.stringify space it differently, so only the decoded
        // meaning is comparable, not the bytes.
        const redecoded = decode(encode(messageFromJson(c.message)));
        expect(messageToJson(redecoded)).toEqual(c.message);
        continue;
      }
      expect(bytesToHex(encode(messageFromJson(c.message)))).toBe(c.hex);
    }
  });
});

const WORDS = ["", "a", "hole", "?", "val x", "äöü", "∀x. P x", "line\nbreak", '"quo"'];

function randomMessage(rand: () => number): Message {
  const pick = randInt(rand, 0, 10);
  const doc = ["inline-1", "snip-def-seq-conc", "file-src/Seq.thy", "d"][
    randInt(rand, 0, 3)
  ];
  const word = () => WORDS[randInt(rand, 1, WORDS.length - 1)];
  const randomOp = () => {
    const op = new Operation();
    for (let i = randInt(rand, 0, 5); i > 0; i--) {
      const roll = rand();
      if (roll < 0.4) op.retain(randInt(rand, 1, 20));
      else if (roll < 0.7) op.insert(word());
      else op.delete(randInt(rand, 1, 9));
    }
    return op;
  };
  switch (pick) {
    case 0:
      return { type: "client-hello", protocolVersion: randInt(rand, 0, 300) };
    case 1:
      return {
        type: "server-hello",
        digest: randText(rand, "0123456789abcdef", 16),
        docs: Array.from({ length: randInt(rand, 0, 4) }, word),
      };
    case 2:
      return { type: "open-doc", docId: doc };
    case 3:
      return {
        type: "doc-state",
        docId: doc,
        seq: randInt(rand, 0, 500),
        text: WORDS[randInt(rand, 0, WORDS.length - 1)],
      };
    case 4:
      return {
        type: "edit",
        docId: doc,
        parentSeq: randInt(rand, 0, 500),
        op: randomOp(),
      };
    case 5:
      return { type: "ack", docId: doc, seq: randInt(rand, 0, 500) };
    case 6:
      return {
        type: "remote-edit",
        docId: doc,
        seq: randInt(rand, 0, 500),
        op: randomOp(),
        author: randInt(rand, 1, 40),
      };
    case 7:
      return {
        type: "annotations",
        docId: doc,
        seq: randInt(rand, 0, 500),
        annotations: Array.from({ length: randInt(rand, 0, 5) }, () => {
          const start = randInt(rand, 0, 40);
          return {
            start,
            end: start + randInt(rand, 0, 12),
            kind: (["error", "warning", "info", "token"] as const)[
              randInt(rand, 0, 3)
            ],
            message: rand() < 0.5 ? null : word(),
            cls: rand() < 0.5 ? null : "keyword",
          };
        }),
      };
    case 8:
      return {
        type: "fragment-step",
        docId: doc,
        fragmentIndex: randInt(rand, 0, 9),
        variantIndex: randInt(rand, 0, 9),
      };
    case 9:
      return {
        type: "settings-changed",
        changes: Array.from({ length: randInt(rand, 0, 3) }, () => ({
          path: ["title", "show.infos", "binding.port", "env"][randInt(rand, 0, 3)],
          old: [null, true, 8080, "old", { A: "1" }][randInt(rand, 0, 4)],
          new: [null, false, 9090, "new", { B: "2" }][randInt(rand, 0, 4)],
          hot: rand() < 0.8,
        })),
      };
    default:
      return {
        type: "error",
        code: ["version-mismatch", "edit-rejected", "bad-frame"][randInt(rand, 0, 2)],
        message: WORDS[randInt(rand, 0, WORDS.length - 1)],
      };
  }
}

describe("wire round trips", () => {
  it("survives 10000 random encode/decode cycles", () => {
    const rand = rng(20260823);
    for (let i = 0; i < 10000; i++) {
      const msg = randomMessage(rand);
      expect(messageToJson(decode(encode(msg)))).toEqual(messageToJson(msg));
    }
  });
});

describe("wire error handling", () => {
  it("rejects unknown tags", () => {
    expect(() => decode(new Uint8Array([0x7f]))).toThrow(DecodeError);
  });

  it("rejects truncated frames", () => {
    const bytes = encode({ type: "doc-state", docId: "d", seq: 3, text: "hello" });
    expect(() => decode(bytes.slice(0, bytes.length - 2))).toThrow(DecodeError);
  });

  it("rejects trailing bytes", () => {
    const bytes = encode({ type: "ack", docId: "d", seq: 1 });
    const padded = new Uint8Array([...bytes, 0]);
    expect(() => decode(padded)).toThrow(DecodeError);
  });

  it("rejects empty input", () => {
    expect(() => decode(new Uint8Array())).toThrow(DecodeError);
  });

  it("rejects oversized varints", () => {
    // Tag 5 (ack) followed by a varint whose continuation never ends.
    const bytes = new Uint8Array([0x05, 0x01, 0x64, ...Array(11).fill(0x80)]);
    expect(() => decode(bytes)).toThrow(DecodeError);
  });
});
