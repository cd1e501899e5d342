"""Concurrent text editing via operational transformation.

The model is the classic retain/insert/delete one:

  - an Operation describes a complete pass over a document; retains copy
    characters, inserts add new ones, deletes drop them,
  - a central RevisionLog orders operations; clients send operations
    against the revision they last saw and the log transforms them
    against everything that was committed in between,
  - a SyncClient mirrors the client side of the scheme: one operation in
    flight at a time, further local edits composed into a buffer.

Operations are kept in normal form: components are maximal (no two
adjacent components of the same kind) and an insert is never preceded by
an adjacent delete, so equal effects have equal representations.

Annotations are half-open ``[start, end)`` ranges attached to a document
revision.  ``transform_annotations`` rebases a batch across an operation
so results computed against an older revision can still be displayed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class SyncError(Exception):
    """Base class for synchronization failures."""


class LengthMismatch(SyncError):
    """An operation was applied or combined against the wrong base length."""


class InvalidParent(SyncError):
    """A client referenced a revision the log does not have."""


# A component is a positive int (retain), a negative int (delete) or a
# non-empty string (insert).  The numeric encoding round-trips through
# JSON untouched, which the wire format and the browser client rely on.
Component = int | str


class Operation:
    """A normalized sequence of retain/insert/delete components.

    Builder methods mutate in place and return self, so operations can
    be written as chains::

        Operation().retain(3).insert("xy").delete(2)
    """

    __slots__ = ("ops", "base_length", "target_length")

    def __init__(self, components: Iterable[Component] = ()) -> None:
        self.ops: list[Component] = []
        self.base_length = 0
        self.target_length = 0
        for c in components:
            if isinstance(c, str):
                self.insert(c)
            elif isinstance(c, int):
                if c >= 0:
                    self.retain(c)
                else:
                    self.delete(-c)
            else:
                raise TypeError(f"bad operation component: {c!r}")

    @classmethod
    def identity(cls, length: int) -> "Operation":
        return cls().retain(length)

    # -- builders ----------------------------------------------------

    def retain(self, n: int) -> "Operation":
        if n < 0:
            raise ValueError("retain expects a non-negative count")
        if n == 0:
            return self
        self.base_length += n
        self.target_length += n
        ops = self.ops
        if ops and isinstance(ops[-1], int) and ops[-1] > 0:
            ops[-1] += n
        else:
            ops.append(n)
        return self

    def insert(self, text: str) -> "Operation":
        if not text:
            return self
        self.target_length += len(text)
        ops = self.ops
        if ops and isinstance(ops[-1], str):
            ops[-1] += text
        elif ops and isinstance(ops[-1], int) and ops[-1] < 0:
            # Insert-then-delete and delete-then-insert have the same
            # effect; canonically the insert goes first.
            if len(ops) > 1 and isinstance(ops[-2], str):
                ops[-2] += text
            else:
                ops.insert(len(ops) - 1, text)
        else:
            ops.append(text)
        return self

    def delete(self, n: int) -> "Operation":
        if n < 0:
            raise ValueError("delete expects a non-negative count")
        if n == 0:
            return self
        self.base_length += n
        ops = self.ops
        if ops and isinstance(ops[-1], int) and ops[-1] < 0:
            ops[-1] -= n
        else:
            ops.append(-n)
        return self

    # -- queries -----------------------------------------------------

    @property
    def is_identity(self) -> bool:
        """True when applying the operation changes nothing."""
        return all(isinstance(c, int) and c > 0 for c in self.ops)

    def affected_span(self) -> tuple[int, int] | None:
        """Smallest base-coordinate range touched by the operation.

        Returns None for identity operations.  Inserts at position p
        count as touching the empty range [p, p).
        """
        start = None
        end = None
        pos = 0
        for c in self.ops:
            if isinstance(c, int) and c > 0:
                pos += c
                continue
            if start is None:
                start = pos
            if isinstance(c, str):
                end = max(end if end is not None else pos, pos)
            else:
                pos += -c
                end = max(end if end is not None else pos, pos)
        if start is None:
            return None
        return start, end if end is not None else start

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Operation):
            return NotImplemented
        return self.ops == other.ops

    def __hash__(self) -> int:
        return hash(tuple(self.ops))

    def __repr__(self) -> str:
        return f"Operation({self.ops!r})"

    # -- application -------------------------------------------------

    def apply(self, text: str) -> str:
        if len(text) != self.base_length:
            raise LengthMismatch(
                f"operation expects base length {self.base_length}, "
                f"text has length {len(text)}"
            )
        parts: list[str] = []
        pos = 0
        for c in self.ops:
            if isinstance(c, str):
                parts.append(c)
            elif c > 0:
                parts.append(text[pos : pos + c])
                pos += c
            else:
                pos += -c
        return "".join(parts)

    # -- combination -------------------------------------------------

    def compose(self, other: "Operation") -> "Operation":
        """A single operation with the effect of self then other."""
        if self.target_length != other.base_length:
            raise LengthMismatch(
                f"cannot compose: target length {self.target_length} != "
                f"base length {other.base_length}"
            )
        out = Operation()
        it1: Iterator[Component] = iter(self.ops)
        it2: Iterator[Component] = iter(other.ops)
        c1 = next(it1, None)
        c2 = next(it2, None)
        while c1 is not None or c2 is not None:
            if isinstance(c1, int) and c1 < 0:
                out.delete(-c1)
                c1 = next(it1, None)
                continue
            if isinstance(c2, str):
                out.insert(c2)
                c2 = next(it2, None)
                continue
            if c1 is None or c2 is None:
                raise LengthMismatch("operations do not line up")
            if isinstance(c1, str):
                if c2 > 0:
                    n = min(len(c1), c2)
                    out.insert(c1[:n])
                else:
                    n = min(len(c1), -c2)
                c1 = _rest_insert(c1, n, it1)
                c2 = _rest_number(c2, n, it2)
            else:
                if c2 > 0:
                    n = min(c1, c2)
                    out.retain(n)
                else:
                    n = min(c1, -c2)
                    out.delete(n)
                c1 = _rest_number(c1, n, it1)
                c2 = _rest_number(c2, n, it2)
        return out

    @staticmethod
    def transform(a: "Operation", b: "Operation") -> tuple["Operation", "Operation"]:
        """Transform concurrent operations a and b over the same base.

        Returns (a', b') such that b' applied after a has the same
        effect as a' applied after b.  When both insert at the same
        position, a's insert ends up first.
        """
        if a.base_length != b.base_length:
            raise LengthMismatch(
                f"cannot transform: base lengths differ "
                f"({a.base_length} != {b.base_length})"
            )
        ap = Operation()
        bp = Operation()
        it1: Iterator[Component] = iter(a.ops)
        it2: Iterator[Component] = iter(b.ops)
        c1 = next(it1, None)
        c2 = next(it2, None)
        while c1 is not None or c2 is not None:
            if isinstance(c1, str):
                ap.insert(c1)
                bp.retain(len(c1))
                c1 = next(it1, None)
                continue
            if isinstance(c2, str):
                ap.retain(len(c2))
                bp.insert(c2)
                c2 = next(it2, None)
                continue
            if c1 is None or c2 is None:
                raise LengthMismatch("operations do not line up")
            if c1 > 0 and c2 > 0:
                n = min(c1, c2)
                ap.retain(n)
                bp.retain(n)
            elif c1 < 0 and c2 < 0:
                n = min(-c1, -c2)
            elif c1 < 0:
                n = min(-c1, c2)
                ap.delete(n)
            else:
                n = min(c1, -c2)
                bp.delete(n)
            c1 = _rest_number(c1, n, it1)
            c2 = _rest_number(c2, n, it2)
        return ap, bp

    # -- construction from text --------------------------------------

    @classmethod
    def diff(cls, old: str, new: str) -> "Operation":
        """A single-splice operation turning old into new.

        Uses common prefix/suffix trimming, which is exactly what a
        textarea-style editor needs to report its changes.
        """
        if old == new:
            return cls.identity(len(old))
        start = 0
        limit = min(len(old), len(new))
        while start < limit and old[start] == new[start]:
            start += 1
        end_old = len(old)
        end_new = len(new)
        while end_old > start and end_new > start and old[end_old - 1] == new[end_new - 1]:
            end_old -= 1
            end_new -= 1
        return (
            cls()
            .retain(start)
            .delete(end_old - start)
            .insert(new[start:end_new])
            .retain(len(old) - end_old)
        )


def _rest_insert(c: str, n: int, it: Iterator[Component]) -> Component | None:
    rest = c[n:]
    return rest if rest else next(it, None)


def _rest_number(c: int, n: int, it: Iterator[Component]) -> Component | None:
    rest = c - n if c > 0 else c + n
    return rest if rest else next(it, None)


# ---------------------------------------------------------------------------
# Annotations


KINDS = ("error", "warning", "info", "token")


@dataclass(frozen=True)
class Annotation:
    """A classified half-open range over one document revision.

    kind is one of "error", "warning", "info" or "token"; token
    annotations carry the token class in cls, the other kinds usually
    carry a human-readable message.
    """

    start: int
    end: int
    kind: str
    message: str | None = None
    cls: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown annotation kind: {self.kind!r}")
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad annotation range [{self.start}, {self.end})")


def transform_position(pos: int, op: Operation, *, push_at_point: bool = False) -> int:
    """Map a base-text position through an operation.

    push_at_point controls what an insert exactly at pos does: True
    moves pos past the inserted text, False leaves it in front.
    """
    base = 0
    out = pos
    for c in op.ops:
        if isinstance(c, str):
            if base < pos or (push_at_point and base == pos):
                out += len(c)
        elif c > 0:
            base += c
        else:
            n = -c
            if base < pos:
                out -= min(n, pos - base)
            base += n
    return out


def transform_annotations(
    annotations: Iterable[Annotation], op: Operation
) -> list[Annotation]:
    """Rebase annotations across an operation on their document.

    Inserts before a range shift it; inserts strictly inside grow it;
    inserts exactly at the boundaries fall outside.  Ranges whose text
    is deleted entirely are dropped.
    """
    out: list[Annotation] = []
    for ann in annotations:
        start = transform_position(ann.start, op, push_at_point=True)
        end = transform_position(ann.end, op, push_at_point=False)
        if end < start:
            # Only possible for empty ranges split by an insert.
            end = start
        if start == end and ann.start != ann.end:
            continue
        out.append(Annotation(start, end, ann.kind, ann.message, ann.cls))
    return out


# ---------------------------------------------------------------------------
# Server-side revision log


@dataclass(frozen=True)
class Revision:
    seq: int
    op: Operation
    author: str


class RevisionLog:
    """Totally ordered edit history of one document.

    Revisions are numbered from 1; parent_seq 0 refers to the initial
    text.  receive() rebases an incoming operation over everything the
    sender had not seen and commits it.
    """

    def __init__(self, doc_id: str, initial_text: str = "") -> None:
        self.doc_id = doc_id
        self.revisions: list[Revision] = []
        self._texts: list[str] = [initial_text]

    @property
    def head_seq(self) -> int:
        return len(self.revisions)

    @property
    def text(self) -> str:
        return self._texts[-1]

    def text_at(self, seq: int) -> str:
        if not 0 <= seq <= self.head_seq:
            raise InvalidParent(f"no revision {seq} in {self.doc_id}")
        return self._texts[seq]

    def op_at(self, seq: int) -> Operation:
        if not 1 <= seq <= self.head_seq:
            raise InvalidParent(f"no revision {seq} in {self.doc_id}")
        return self.revisions[seq - 1].op

    def receive(self, author: str, parent_seq: int, op: Operation) -> tuple[int, Operation]:
        """Commit an operation made against revision parent_seq.

        Returns the assigned sequence number and the operation as
        committed, i.e. transformed against all revisions the sender
        had not seen.
        """
        if not 0 <= parent_seq <= self.head_seq:
            raise InvalidParent(
                f"parent revision {parent_seq} out of range "
                f"(log at {self.head_seq})"
            )
        if op.base_length != len(self._texts[parent_seq]):
            raise LengthMismatch(
                f"operation base length {op.base_length} does not match "
                f"revision {parent_seq}"
            )
        for rev in self.revisions[parent_seq:]:
            op, _ = Operation.transform(op, rev.op)
        seq = self.head_seq + 1
        self._texts.append(op.apply(self.text))
        self.revisions.append(Revision(seq, op, author))
        return seq, op


# ---------------------------------------------------------------------------
# Client-side scheme


class SyncClient:
    """Client half of the one-outstanding-operation scheme.

    The client applies local edits immediately, keeps at most one
    operation in flight, and composes further edits into a buffer that
    is sent once the outstanding operation is acknowledged.  Methods
    return (parent_seq, op) when a message should go to the server.

    State diagram::

        idle --local_edit--> awaiting ack (op in flight)
        awaiting --local_edit--> awaiting with buffer
        awaiting --ack--> idle, or buffer goes into flight
        remote operations transform whatever is pending
    """

    def __init__(self, text: str, seq: int = 0) -> None:
        self.text = text
        self.seq = seq
        self.outstanding: Operation | None = None
        self.buffer: Operation | None = None

    def local_edit(self, op: Operation) -> tuple[int, Operation] | None:
        self.text = op.apply(self.text)
        if self.outstanding is None:
            self.outstanding = op
            return self.seq, op
        if self.buffer is None:
            self.buffer = op
        else:
            self.buffer = self.buffer.compose(op)
        return None

    def ack(self, seq: int) -> tuple[int, Operation] | None:
        if self.outstanding is None:
            raise SyncError("ack with no operation in flight")
        self.seq = seq
        self.outstanding = self.buffer
        self.buffer = None
        if self.outstanding is not None:
            return self.seq, self.outstanding
        return None

    def remote_edit(self, seq: int, op: Operation) -> Operation:
        """Ingest an operation committed by another client.

        Returns the operation transformed to apply to the local text,
        which callers use to shift cursors or annotations.
        """
        if self.outstanding is not None:
            self.outstanding, op = Operation.transform(self.outstanding, op)
        if self.buffer is not None:
            self.buffer, op = Operation.transform(self.buffer, op)
        self.text = op.apply(self.text)
        self.seq = seq
        return op
