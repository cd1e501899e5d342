"""Tests for the operational transformation core."""

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from cobra.sync import (
    Annotation,
    InvalidParent,
    LengthMismatch,
    Operation,
    RevisionLog,
    SyncClient,
    SyncError,
    transform_annotations,
    transform_position,
)

from oracles import apply_components, random_operation


def op(*components) -> Operation:
    return Operation(components)


class TestOperationBuilder:
    def test_chaining_builds_components(self):
        o = Operation().retain(3).insert("xy").delete(2)
        assert o.ops == [3, "xy", -2]
        assert o.base_length == 5
        assert o.target_length == 5

    def test_adjacent_same_kind_components_merge(self):
        o = Operation().retain(2).retain(3).insert("a").insert("b").delete(1).delete(2)
        assert o.ops == [5, "ab", -3]

    def test_insert_moves_before_adjacent_delete(self):
        # delete-then-insert and insert-then-delete have the same
        # effect; the normal form puts the insert first.
        o = Operation().retain(1).delete(2).insert("z")
        assert o.ops == [1, "z", -2]
        o2 = Operation().delete(1).insert("a").delete(1).insert("b")
        assert o2.ops == ["ab", -2]

    def test_zero_length_components_are_dropped(self):
        o = Operation().retain(0).insert("").delete(0).retain(1)
        assert o.ops == [1]

    def test_constructor_accepts_component_list(self):
        o = op(2, "ab", -1, 3)
        assert o.ops == [2, "ab", -1, 3]
        assert o.base_length == 6
        assert o.target_length == 7

    def test_equal_effects_equal_representations(self):
        a = Operation().retain(1).delete(1).insert("x").delete(1).retain(1)
        b = Operation().retain(1).insert("x").delete(2).retain(1)
        assert a == b

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            Operation().retain(-1)
        with pytest.raises(ValueError):
            Operation().delete(-1)


class TestApply:
    def test_plain_splice(self):
        assert op(3, "XY", -2, 4).apply("abcdefghi") == "abcXYfghi"

    def test_identity(self):
        assert Operation.identity(5).apply("hello") == "hello"
        assert Operation().apply("") == ""

    def test_insert_into_empty(self):
        assert op("x").apply("") == "x"

    def test_length_mismatch_raises(self):
        with pytest.raises(LengthMismatch):
            op(3).apply("ab")
        with pytest.raises(LengthMismatch):
            op(1).apply("ab")

    def test_apply_matches_splice_oracle_randomized(self):
        rng = random.Random(1001)
        for _ in range(500):
            n = rng.randrange(0, 30)
            text = "".join(rng.choice("abcde \n") for _ in range(n))
            components = random_operation(rng, text)
            o = Operation(components)
            assert o.apply(text) == apply_components(text, o.ops)


class TestCompose:
    def test_sequential_effect(self):
        a = op("abc")          # "" -> "abc"
        b = op(1, -1, "X", 1)  # "abc" -> "aXc"
        assert a.compose(b).apply("") == "aXc"

    def test_compose_with_identity(self):
        a = op(2, "xy", -1, 1)
        assert a.compose(Operation.identity(a.target_length)) == a
        assert Operation.identity(a.base_length).compose(a) == a

    def test_length_mismatch_raises(self):
        with pytest.raises(LengthMismatch):
            op(3).compose(op(2))

    def test_compose_matches_sequential_apply_randomized(self):
        rng = random.Random(1002)
        for _ in range(500):
            n = rng.randrange(0, 25)
            text = "".join(rng.choice("abcde") for _ in range(n))
            a = Operation(random_operation(rng, text))
            mid = a.apply(text)
            b = Operation(random_operation(rng, mid))
            ab = a.compose(b)
            assert ab.apply(text) == b.apply(mid)
            assert ab.base_length == len(text)
            assert ab.target_length == len(b.apply(mid))

    def test_compose_associative_randomized(self):
        rng = random.Random(1003)
        for _ in range(200):
            n = rng.randrange(0, 20)
            text = "".join(rng.choice("abc") for _ in range(n))
            a = Operation(random_operation(rng, text))
            t1 = a.apply(text)
            b = Operation(random_operation(rng, t1))
            t2 = b.apply(t1)
            c = Operation(random_operation(rng, t2))
            left = a.compose(b).compose(c)
            right = a.compose(b.compose(c))
            assert left.apply(text) == right.apply(text)


class TestTransform:
    def test_insert_tie_breaks_left(self):
        # Both clients insert at offset 0 of the empty document.
        a = op("x")
        b = op("y")
        ap, bp = Operation.transform(a, b)
        assert bp.apply(a.apply("")) == "xy"
        assert ap.apply(b.apply("")) == "xy"

    def test_transform_against_identity(self):
        a = op(1, "z", -2, 1)
        i = Operation.identity(4)
        ap, ip = Operation.transform(a, i)
        assert ap == a
        assert ip.is_identity

    def test_concurrent_deletes_overlap_once(self):
        # Both delete the shared middle character.
        base = "abcd"
        a = op(1, -2, 1)   # delete "bc"
        b = op(2, -2)      # delete "cd"
        ap, bp = Operation.transform(a, b)
        assert bp.apply(a.apply(base)) == "a"
        assert ap.apply(b.apply(base)) == "a"

    def test_length_mismatch_raises(self):
        with pytest.raises(LengthMismatch):
            Operation.transform(op(3), op(2))

    def test_convergence_randomized(self):
        rng = random.Random(1004)
        for _ in range(1000):
            n = rng.randrange(0, 25)
            text = "".join(rng.choice("abcde \n") for _ in range(n))
            a = Operation(random_operation(rng, text))
            b = Operation(random_operation(rng, text))
            ap, bp = Operation.transform(a, b)
            assert bp.apply(a.apply(text)) == ap.apply(b.apply(text))

    @settings(max_examples=300, deadline=None)
    @given(st.data())
    def test_convergence_property(self, data):
        text = data.draw(st.text(alphabet="abc \n", max_size=20))
        a = Operation(data.draw(_operation_components(len(text))))
        b = Operation(data.draw(_operation_components(len(text))))
        ap, bp = Operation.transform(a, b)
        assert bp.apply(a.apply(text)) == ap.apply(b.apply(text))


def _operation_components(base_length: int):
    """Hypothesis strategy for component lists over a given base length."""

    def build(draw):
        components = []
        pos = 0
        while pos < base_length:
            span = draw(st.integers(1, min(4, base_length - pos)))
            kind = draw(st.sampled_from(["retain", "delete", "insert"]))
            if kind == "retain":
                components.append(span)
            elif kind == "delete":
                components.append(-span)
            else:
                components.append(draw(st.text(alphabet="xyz", min_size=1, max_size=3)))
                components.append(span)
            pos += span
        if draw(st.booleans()):
            components.append(draw(st.text(alphabet="xyz", min_size=1, max_size=3)))
        return components

    return st.composite(lambda draw: build(draw))()


class TestTransformPosition:
    def test_insert_before_shifts(self):
        assert transform_position(5, op(2, "ab", 4)) == 7

    def test_insert_at_point_respects_bias(self):
        o = op(3, "ab", 2)
        assert transform_position(3, o) == 3
        assert transform_position(3, o, push_at_point=True) == 5

    def test_delete_before_shifts_back(self):
        assert transform_position(5, op(1, -3, 2)) == 2

    def test_delete_across_point_clamps(self):
        assert transform_position(3, op(2, -4)) == 2


class TestTransformAnnotations:
    def ann(self, start, end, kind="info", message=None, cls=None):
        return Annotation(start, end, kind, message, cls)

    def test_insert_before_range_shifts_it(self):
        # Two characters inserted before [5, 7) move it to [7, 9).
        anns = [self.ann(5, 7)]
        o = op(3, "xy", 5)
        assert transform_annotations(anns, o) == [self.ann(7, 9)]

    def test_insert_inside_grows_range(self):
        anns = [self.ann(2, 4)]
        o = op(3, "zz", 3)
        assert transform_annotations(anns, o) == [self.ann(2, 6)]

    def test_insert_at_boundaries_stays_outside(self):
        anns = [self.ann(2, 4)]
        at_start = op(2, "zz", 4)
        assert transform_annotations(anns, at_start) == [self.ann(4, 6)]
        at_end = op(4, "zz", 2)
        assert transform_annotations(anns, at_end) == [self.ann(2, 4)]

    def test_fully_deleted_range_is_dropped(self):
        anns = [self.ann(2, 4, "error", "boom")]
        o = op(1, -4, 1)
        assert transform_annotations(anns, o) == []

    def test_partial_delete_shrinks(self):
        anns = [self.ann(2, 6)]
        o = op(4, -3, 1)  # deletes [4, 7)
        assert transform_annotations(anns, o) == [self.ann(2, 4)]

    def test_metadata_preserved(self):
        anns = [self.ann(0, 1, "token", None, "keyword")]
        o = op("zz", 5)
        out = transform_annotations(anns, o)
        assert out == [Annotation(2, 3, "token", None, "keyword")]

    def test_annotation_text_follows_edits_randomized(self):
        # The annotated substring must be unchanged by edits that do not
        # touch it, after mapping the range through the operation.
        rng = random.Random(1005)
        for _ in range(400):
            n = rng.randrange(4, 25)
            text = "".join(rng.choice("abcde") for _ in range(n))
            start = rng.randrange(0, n - 2)
            end = rng.randrange(start + 1, n)
            snippet = text[start:end]
            # Build an edit confined to outside the annotated range.
            if rng.random() < 0.5 and start > 0:
                pos = rng.randrange(0, start)
                o = Operation().retain(pos).insert("XY").retain(n - pos)
            elif end < n:
                pos = rng.randrange(end, n + 1)
                o = Operation().retain(pos).insert("XY").retain(n - pos)
            else:
                o = Operation.identity(n)
            [moved] = transform_annotations([Annotation(start, end, "info")], o)
            assert o.apply(text)[moved.start : moved.end] == snippet

    def test_kind_validation(self):
        with pytest.raises(ValueError):
            Annotation(0, 1, "fatal")
        with pytest.raises(ValueError):
            Annotation(3, 2, "info")


class TestRevisionLog:
    def test_sequential_edits_commit_in_order(self):
        log = RevisionLog("d", "")
        seq, committed = log.receive("a", 0, op("hello"))
        assert (seq, log.text) == (1, "hello")
        assert committed.ops == ["hello"]
        seq, _ = log.receive("a", 1, op(5, " world"))
        assert (seq, log.text) == (2, "hello world")

    def test_concurrent_edit_is_rebased(self):
        log = RevisionLog("d", "ab")
        log.receive("a", 0, op("x", 2))      # "xab"
        # b edits against revision 0, inserting at the end.
        seq, committed = log.receive("b", 0, op(2, "y"))
        assert seq == 2
        assert log.text == "xaby"
        assert committed.base_length == 3

    def test_insert_tie_goes_to_committed_revision(self):
        log = RevisionLog("d", "")
        log.receive("a", 0, op("a"))
        log.receive("b", 0, op("b"))
        # b's insert at 0 was transformed against a's committed insert;
        # the incoming operation stays left of the committed one.
        assert log.text == "ba"

    def test_text_at_returns_history(self):
        log = RevisionLog("d", "x")
        log.receive("a", 0, op(1, "y"))
        log.receive("a", 1, op(2, "z"))
        assert log.text_at(0) == "x"
        assert log.text_at(1) == "xy"
        assert log.text_at(2) == "xyz"
        assert log.head_seq == 2

    def test_invalid_parent_raises(self):
        log = RevisionLog("d", "")
        with pytest.raises(InvalidParent):
            log.receive("a", 1, op("x"))
        with pytest.raises(InvalidParent):
            log.receive("a", -1, op("x"))
        with pytest.raises(InvalidParent):
            log.text_at(7)

    def test_base_length_checked_against_parent(self):
        log = RevisionLog("d", "abc")
        with pytest.raises(LengthMismatch):
            log.receive("a", 0, op(2))


class TestSyncClient:
    def test_local_edit_sends_when_idle(self):
        c = SyncClient("ab", 0)
        sent = c.local_edit(op(2, "c"))
        assert sent == (0, op(2, "c"))
        assert c.text == "abc"

    def test_edits_buffer_while_awaiting_ack(self):
        c = SyncClient("", 0)
        assert c.local_edit(op("a")) is not None
        assert c.local_edit(op(1, "b")) is None
        assert c.local_edit(op(2, "c")) is None
        assert c.text == "abc"
        # Ack releases the buffer as one composed operation.
        sent = c.ack(1)
        assert sent == (1, op(1, "bc"))
        assert c.ack(2) is None

    def test_ack_without_flight_raises(self):
        c = SyncClient("", 0)
        with pytest.raises(SyncError):
            c.ack(1)

    def test_remote_edit_transforms_pending(self):
        c = SyncClient("ab", 0)
        c.local_edit(op(2, "x"))         # text "abx", outstanding
        c.local_edit(op(3, "y"))         # text "abxy", buffered
        applied = c.remote_edit(1, op("R", 2))
        assert c.text == "Rabxy"
        assert applied.apply("abxy") == "Rabxy"
        assert c.seq == 1

    def test_client_server_round_trip_converges(self):
        log = RevisionLog("d", "base")
        a = SyncClient("base", 0)
        b = SyncClient("base", 0)

        send_a = a.local_edit(op(4, "!"))
        send_b = b.local_edit(op("(", 4))
        # Server receives a first, then b.
        seq_a, op_a = log.receive("a", *send_a)
        seq_b, op_b = log.receive("b", *send_b)
        # Deliver acks and each other's committed operations in order.
        assert a.ack(seq_a) is None
        a.remote_edit(seq_b, op_b)
        b.remote_edit(seq_a, op_a)
        assert b.ack(seq_b) is None
        assert a.text == b.text == log.text == "(base!"


class TestConvergenceSimulation:
    def test_many_clients_random_edits_converge(self):
        rng = random.Random(1006)
        for _ in range(30):
            self._run_session(rng, clients=3, edits=20)

    def _run_session(self, rng, clients: int, edits: int) -> None:
        base = "".join(rng.choice("ab \n") for _ in range(rng.randrange(0, 8)))
        log = RevisionLog("d", base)
        peers = [SyncClient(base, 0) for _ in range(clients)]
        # Per-peer queue of (seq, op, author) not yet delivered, plus
        # pending sends. Delivery is in commit order but interleaved
        # randomly with new edits.
        outbox: list[tuple[int, tuple[int, Operation]]] = []
        delivered = [0] * clients

        def deliver(i: int) -> None:
            nxt = delivered[i] + 1
            if nxt > log.head_seq:
                return
            rev = log.revisions[nxt - 1]
            if rev.author == str(i):
                sent = peers[i].ack(nxt)
                if sent is not None:
                    outbox.append((i, sent))
            else:
                peers[i].remote_edit(nxt, rev.op)
            delivered[i] = nxt

        for _ in range(edits):
            i = rng.randrange(clients)
            o = Operation(random_operation(rng, peers[i].text, "xyz"))
            sent = peers[i].local_edit(o)
            if sent is not None:
                outbox.append((i, sent))
            # Randomly pump the network.
            for _ in range(rng.randrange(0, 4)):
                if outbox and rng.random() < 0.5:
                    j, (parent, o2) = outbox.pop(0)
                    log.receive(str(j), parent, o2)
                else:
                    j = rng.randrange(clients)
                    deliver(j)

        # Drain until quiescent; an ack can release a buffered send, so
        # keep alternating until nothing moves.
        while outbox or any(d < log.head_seq for d in delivered):
            while outbox:
                j, (parent, o2) = outbox.pop(0)
                log.receive(str(j), parent, o2)
            for i in range(clients):
                while delivered[i] < log.head_seq:
                    deliver(i)
        for i, p in enumerate(peers):
            assert p.outstanding is None and p.buffer is None
            assert p.text == log.text, f"client {i} diverged"


class TestAffectedSpan:
    def test_identity_has_no_span(self):
        assert Operation.identity(5).affected_span() is None

    def test_insert_span_is_a_point(self):
        assert op(3, "xy", 2).affected_span() == (3, 3)

    def test_delete_span_covers_removed_text(self):
        assert op(1, -3, 2).affected_span() == (1, 4)

    def test_mixed_span(self):
        assert op(1, "a", 2, -2, 1).affected_span() == (1, 5)


class TestDiff:
    def test_diff_produces_minimal_splice(self):
        o = Operation.diff("abcdef", "abXYef")
        assert o.ops == [2, "XY", -2, 2]

    def test_diff_identity(self):
        assert Operation.diff("same", "same").is_identity

    def test_diff_randomized_round_trip(self):
        rng = random.Random(1007)
        for _ in range(300):
            a = "".join(rng.choice("ab\n ") for _ in range(rng.randrange(0, 15)))
            b = "".join(rng.choice("ab\n ") for _ in range(rng.randrange(0, 15)))
            assert Operation.diff(a, b).apply(a) == b
