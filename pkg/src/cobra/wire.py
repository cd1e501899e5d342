"""Binary message encoding for the synchronization protocol.

Messages travel as single binary WebSocket frames.  The layout is a
1-byte tag followed by the message fields in order: unsigned LEB128
varints for integers, varint byte-length plus UTF-8 for strings, a
0/1 byte for booleans, and varint count plus elements for lists.  An
operation is a component count followed by one byte per component
kind (0 retain, 1 insert, 2 delete) and its argument.

Example: Ack{doc "d", seq 1} encodes to 05 01 64 01.

Absent and empty strings are identified on the wire: an annotation
with no message decodes with message None.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Union

from .config import SettingChange
from .sync import KINDS, Annotation, Operation

__all__ = [
    "PROTOCOL_VERSION",
    "DecodeError",
    "ClientHello",
    "ServerHello",
    "OpenDoc",
    "DocState",
    "Edit",
    "Ack",
    "RemoteEdit",
    "Annotations",
    "FragmentStep",
    "SettingsChanged",
    "Error",
    "MESSAGE_TYPES",
    "encode",
    "decode",
]

PROTOCOL_VERSION = 1


class DecodeError(Exception):
    """A frame that cannot be decoded."""

    def __init__(self, offset: int, reason: str):
        super().__init__(f"offset {offset}: {reason}")
        self.offset = offset
        self.reason = reason


# ---------------------------------------------------------------------------
# Messages


@dataclass(frozen=True)
class ClientHello:
    protocol_version: int


@dataclass(frozen=True)
class ServerHello:
    """Greeting with a settings digest and the available documents."""

    digest: str
    docs: tuple[str, ...]


@dataclass(frozen=True)
class OpenDoc:
    doc_id: str


@dataclass(frozen=True)
class DocState:
    """Authoritative full text of a document at a revision."""

    doc_id: str
    seq: int
    text: str


@dataclass(frozen=True)
class Edit:
    """A client edit against the revision it was based on."""

    doc_id: str
    parent_seq: int
    op: Operation


@dataclass(frozen=True)
class Ack:
    doc_id: str
    seq: int


@dataclass(frozen=True)
class RemoteEdit:
    """Another session's committed edit, transformed for this view."""

    doc_id: str
    seq: int
    op: Operation
    author: int


@dataclass(frozen=True)
class Annotations:
    doc_id: str
    seq: int
    annotations: tuple[Annotation, ...]


@dataclass(frozen=True)
class FragmentStep:
    doc_id: str
    fragment_index: int
    variant_index: int


@dataclass(frozen=True)
class SettingsChanged:
    changes: tuple[SettingChange, ...]


@dataclass(frozen=True)
class Error:
    code: str
    message: str = ""


MESSAGE_TYPES: tuple[type, ...] = (
    ClientHello,
    ServerHello,
    OpenDoc,
    DocState,
    Edit,
    Ack,
    RemoteEdit,
    Annotations,
    FragmentStep,
    SettingsChanged,
    Error,
)

_TAGS = {cls: tag for tag, cls in enumerate(MESSAGE_TYPES)}

Message = Union[
    ClientHello,
    ServerHello,
    OpenDoc,
    DocState,
    Edit,
    Ack,
    RemoteEdit,
    Annotations,
    FragmentStep,
    SettingsChanged,
    Error,
]


# ---------------------------------------------------------------------------
# Primitive writers


def _w_varint(buf: bytearray, n: int) -> None:
    if n < 0:
        raise ValueError(f"negative varint: {n}")
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            buf.append(b | 0x80)
        else:
            buf.append(b)
            return


def _w_string(buf: bytearray, s: str) -> None:
    data = s.encode("utf-8")
    _w_varint(buf, len(data))
    buf.extend(data)


def _w_bool(buf: bytearray, b: bool) -> None:
    buf.append(1 if b else 0)


def _w_op(buf: bytearray, op: Operation) -> None:
    _w_varint(buf, len(op.ops))
    for comp in op.ops:
        if isinstance(comp, str):
            buf.append(1)
            _w_string(buf, comp)
        elif comp > 0:
            buf.append(0)
            _w_varint(buf, comp)
        else:
            buf.append(2)
            _w_varint(buf, -comp)


def _w_annotation(buf: bytearray, a: Annotation) -> None:
    _w_varint(buf, a.start)
    _w_varint(buf, a.end)
    buf.append(KINDS.index(a.kind))
    _w_string(buf, a.message or "")
    _w_string(buf, a.cls or "")


# ---------------------------------------------------------------------------
# Primitive readers


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def fail(self, reason: str) -> DecodeError:
        return DecodeError(self.pos, reason)

    def byte(self) -> int:
        if self.pos >= len(self.data):
            raise self.fail("truncated")
        b = self.data[self.pos]
        self.pos += 1
        return b

    def varint(self) -> int:
        result = 0
        shift = 0
        while True:
            b = self.byte()
            result |= (b & 0x7F) << shift
            if not b & 0x80:
                return result
            shift += 7
            if shift > 63:
                raise self.fail("varint too long")

    def string(self) -> str:
        length = self.varint()
        if self.pos + length > len(self.data):
            raise self.fail("truncated string")
        raw = self.data[self.pos : self.pos + length]
        self.pos += length
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise self.fail("invalid UTF-8") from None

    def boolean(self) -> bool:
        b = self.byte()
        if b > 1:
            raise self.fail("invalid boolean")
        return b == 1

    def operation(self) -> Operation:
        count = self.varint()
        op = Operation()
        for _ in range(count):
            kind = self.byte()
            if kind == 0:
                op.retain(self.varint())
            elif kind == 1:
                op.insert(self.string())
            elif kind == 2:
                op.delete(self.varint())
            else:
                raise self.fail(f"invalid op component kind {kind}")
        return op

    def annotation(self) -> Annotation:
        start = self.varint()
        end = self.varint()
        kind_index = self.byte()
        if kind_index >= len(KINDS):
            raise self.fail(f"invalid annotation kind {kind_index}")
        message = self.string()
        cls = self.string()
        try:
            return Annotation(start, end, KINDS[kind_index], message or None, cls or None)
        except ValueError as exc:
            raise self.fail(str(exc)) from None

    def json_value(self) -> object:
        raw = self.string()
        try:
            return json.loads(raw) if raw else None
        except ValueError:
            raise self.fail("invalid change value") from None


# ---------------------------------------------------------------------------
# Encoding


def encode(msg: object) -> bytes:
    """Encode a message to its binary frame."""
    tag = _TAGS.get(type(msg))
    if tag is None:
        raise TypeError(f"not a wire message: {msg!r}")
    buf = bytearray([tag])
    if isinstance(msg, ClientHello):
        _w_varint(buf, msg.protocol_version)
    elif isinstance(msg, ServerHello):
        _w_string(buf, msg.digest)
        _w_varint(buf, len(msg.docs))
        for doc in msg.docs:
            _w_string(buf, doc)
    elif isinstance(msg, OpenDoc):
        _w_string(buf, msg.doc_id)
    elif isinstance(msg, DocState):
        _w_string(buf, msg.doc_id)
        _w_varint(buf, msg.seq)
        _w_string(buf, msg.text)
    elif isinstance(msg, Edit):
        _w_string(buf, msg.doc_id)
        _w_varint(buf, msg.parent_seq)
        _w_op(buf, msg.op)
    elif isinstance(msg, Ack):
        _w_string(buf, msg.doc_id)
        _w_varint(buf, msg.seq)
    elif isinstance(msg, RemoteEdit):
        _w_string(buf, msg.doc_id)
        _w_varint(buf, msg.seq)
        _w_op(buf, msg.op)
        _w_varint(buf, msg.author)
    elif isinstance(msg, Annotations):
        _w_string(buf, msg.doc_id)
        _w_varint(buf, msg.seq)
        _w_varint(buf, len(msg.annotations))
        for a in msg.annotations:
            _w_annotation(buf, a)
    elif isinstance(msg, FragmentStep):
        _w_string(buf, msg.doc_id)
        _w_varint(buf, msg.fragment_index)
        _w_varint(buf, msg.variant_index)
    elif isinstance(msg, SettingsChanged):
        _w_varint(buf, len(msg.changes))
        for change in msg.changes:
            _w_string(buf, change.path)
            _w_string(buf, json.dumps(change.old))
            _w_string(buf, json.dumps(change.new))
            _w_bool(buf, change.hot)
    elif isinstance(msg, Error):
        _w_string(buf, msg.code)
        _w_string(buf, msg.message)
    return bytes(buf)


def decode(data: bytes) -> object:
    """Decode a binary frame; the frame must contain exactly one
    message."""
    reader = _Reader(data)
    tag = reader.byte()
    if tag >= len(MESSAGE_TYPES):
        raise DecodeError(0, f"unknown tag {tag}")
    msg = _DECODERS[tag](reader)
    if reader.pos != len(data):
        raise DecodeError(reader.pos, "trailing data")
    return msg


def _d_client_hello(r: _Reader) -> ClientHello:
    return ClientHello(r.varint())


def _d_server_hello(r: _Reader) -> ServerHello:
    digest = r.string()
    docs = tuple(r.string() for _ in range(r.varint()))
    return ServerHello(digest, docs)


def _d_open_doc(r: _Reader) -> OpenDoc:
    return OpenDoc(r.string())


def _d_doc_state(r: _Reader) -> DocState:
    return DocState(r.string(), r.varint(), r.string())


def _d_edit(r: _Reader) -> Edit:
    return Edit(r.string(), r.varint(), r.operation())


def _d_ack(r: _Reader) -> Ack:
    return Ack(r.string(), r.varint())


def _d_remote_edit(r: _Reader) -> RemoteEdit:
    return RemoteEdit(r.string(), r.varint(), r.operation(), r.varint())


def _d_annotations(r: _Reader) -> Annotations:
    doc_id = r.string()
    seq = r.varint()
    annotations = tuple(r.annotation() for _ in range(r.varint()))
    return Annotations(doc_id, seq, annotations)


def _d_fragment_step(r: _Reader) -> FragmentStep:
    return FragmentStep(r.string(), r.varint(), r.varint())


def _d_settings_changed(r: _Reader) -> SettingsChanged:
    changes = []
    for _ in range(r.varint()):
        path = r.string()
        old = r.json_value()
        new = r.json_value()
        hot = r.boolean()
        changes.append(SettingChange(path, old, new, hot))
    return SettingsChanged(tuple(changes))


def _d_error(r: _Reader) -> Error:
    return Error(r.string(), r.string())


_DECODERS = [
    _d_client_hello,
    _d_server_hello,
    _d_open_doc,
    _d_doc_state,
    _d_edit,
    _d_ack,
    _d_remote_edit,
    _d_annotations,
    _d_fragment_step,
    _d_settings_changed,
    _d_error,
]
