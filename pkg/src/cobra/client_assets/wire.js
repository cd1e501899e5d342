/**
 * Binary codec for the synchronization protocol. Frames are a 1-byte
 * tag followed by the fields in order: unsigned LEB128 varints,
 * varint-length UTF-8 strings, 0/1 booleans, varint-count lists.
 * Layout matches the server byte for byte.
 */
import { KINDS, Operation } from "./ot.js";
export const PROTOCOL_VERSION = 1;
export class DecodeError extends Error {
    offset;
    reason;
    constructor(offset, reason) {
        super(`offset ${offset}: ${reason}`);
        this.offset = offset;
        this.reason = reason;
    }
}
const TAGS = [
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
    bytes = [];
    byte(b) {
        this.bytes.push(b);
    }
    varint(n) {
        if (n < 0)
            throw new RangeError(`negative varint: ${n}`);
        for (;;) {
            const b = n & 0x7f;
            n = Math.floor(n / 128);
            if (n)
                this.bytes.push(b | 0x80);
            else {
                this.bytes.push(b);
                return;
            }
        }
    }
    string(s) {
        const data = utf8.encode(s);
        this.varint(data.length);
        for (const b of data)
            this.bytes.push(b);
    }
    bool(b) {
        this.bytes.push(b ? 1 : 0);
    }
    op(op) {
        this.varint(op.ops.length);
        for (const comp of op.ops) {
            if (typeof comp === "string") {
                this.byte(1);
                this.string(comp);
            }
            else if (comp > 0) {
                this.byte(0);
                this.varint(comp);
            }
            else {
                this.byte(2);
                this.varint(-comp);
            }
        }
    }
    annotation(a) {
        this.varint(a.start);
        this.varint(a.end);
        this.byte(KINDS.indexOf(a.kind));
        this.string(a.message ?? "");
        this.string(a.cls ?? "");
    }
    finish() {
        return Uint8Array.from(this.bytes);
    }
}
/** Encode a message to its binary frame. */
export function encode(msg) {
    const w = new Writer();
    w.byte(TAGS.indexOf(msg.type));
    switch (msg.type) {
        case "client-hello":
            w.varint(msg.protocolVersion);
            break;
        case "server-hello":
            w.string(msg.digest);
            w.varint(msg.docs.length);
            for (const doc of msg.docs)
                w.string(doc);
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
            for (const a of msg.annotations)
                w.annotation(a);
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
    data;
    pos = 0;
    constructor(data) {
        this.data = data;
    }
    fail(reason) {
        return new DecodeError(this.pos, reason);
    }
    byte() {
        if (this.pos >= this.data.length)
            throw this.fail("truncated");
        return this.data[this.pos++];
    }
    varint() {
        let result = 0;
        let shift = 0;
        for (;;) {
            const b = this.byte();
            result += (b & 0x7f) * 2 ** shift;
            if (!(b & 0x80))
                return result;
            shift += 7;
            if (shift > 63)
                throw this.fail("varint too long");
        }
    }
    string() {
        const length = this.varint();
        if (this.pos + length > this.data.length)
            throw this.fail("truncated string");
        const raw = this.data.subarray(this.pos, this.pos + length);
        this.pos += length;
        try {
            return utf8dec.decode(raw);
        }
        catch {
            throw this.fail("invalid UTF-8");
        }
    }
    bool() {
        const b = this.byte();
        if (b > 1)
            throw this.fail("invalid boolean");
        return b === 1;
    }
    op() {
        const count = this.varint();
        const op = new Operation();
        for (let i = 0; i < count; i++) {
            const kind = this.byte();
            if (kind === 0)
                op.retain(this.varint());
            else if (kind === 1)
                op.insert(this.string());
            else if (kind === 2)
                op.delete(this.varint());
            else
                throw this.fail(`invalid op component kind ${kind}`);
        }
        return op;
    }
    annotation() {
        const start = this.varint();
        const end = this.varint();
        const kindIndex = this.byte();
        if (kindIndex >= KINDS.length) {
            throw this.fail(`invalid annotation kind ${kindIndex}`);
        }
        const message = this.string();
        const cls = this.string();
        if (start > end)
            throw this.fail(`bad annotation range [${start}, ${end})`);
        return {
            start,
            end,
            kind: KINDS[kindIndex],
            message: message || null,
            cls: cls || null,
        };
    }
    json() {
        const raw = this.string();
        if (!raw)
            return null;
        try {
            return JSON.parse(raw);
        }
        catch {
            throw this.fail("invalid change value");
        }
    }
    get atEnd() {
        return this.pos === this.data.length;
    }
}
/** Decode one binary frame; trailing bytes are an error. */
export function decode(data) {
    const r = new Reader(data);
    const tag = r.byte();
    if (tag >= TAGS.length)
        throw new DecodeError(0, `unknown tag ${tag}`);
    const msg = decodeBody(TAGS[tag], r);
    if (!r.atEnd)
        throw new DecodeError(r.pos, "trailing data");
    return msg;
}
function decodeBody(type, r) {
    switch (type) {
        case "client-hello":
            return { type, protocolVersion: r.varint() };
        case "server-hello": {
            const digest = r.string();
            const docs = [];
            const count = r.varint();
            for (let i = 0; i < count; i++)
                docs.push(r.string());
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
            const annotations = [];
            const count = r.varint();
            for (let i = 0; i < count; i++)
                annotations.push(r.annotation());
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
            const changes = [];
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
