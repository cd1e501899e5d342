"""Demo analysis rules, prerequisites, and the worker pipeline."""

import asyncio
import json
import os
import random
import subprocess
import sys

from cobra.assistants import (
    BUILTIN_ASSISTANTS,
    AssistantSpec,
    AssistantWorker,
    assistant_for,
    check_prereqs,
    demo_analyze,
)
from cobra.sync import Annotation


def ann(start, end, kind, message=None, cls=None):
    return Annotation(start, end, kind, message, cls)


class TestDemoAnalyze:
    """Hand-computed expectations for the documented rule set."""

    def test_empty(self):
        assert demo_analyze("") == []

    def test_keyword_and_hole(self):
        assert demo_analyze("val x = ???") == [
            ann(0, 3, "token", cls="keyword"),
            ann(8, 11, "info", "hole", cls="hole"),
        ]

    def test_keyword_and_number(self):
        assert demo_analyze("val x = 42") == [
            ann(0, 3, "token", cls="keyword"),
            ann(8, 10, "token", cls="number"),
        ]

    def test_string_literal(self):
        assert demo_analyze('lemma foo: "bar baz"') == [
            ann(0, 5, "token", cls="keyword"),
            ann(11, 20, "token", cls="string"),
        ]

    def test_isabelle_comment_with_todo(self):
        assert demo_analyze("(* TODO *)") == [
            ann(0, 10, "token", cls="comment"),
            ann(3, 7, "warning", "TODO"),
        ]

    def test_line_comment_with_todo(self):
        assert demo_analyze("// TODO later") == [
            ann(0, 13, "token", cls="comment"),
            ann(3, 7, "warning", "TODO"),
        ]

    def test_unmatched_open_bracket(self):
        assert demo_analyze("val x = (1") == [
            ann(0, 3, "token", cls="keyword"),
            ann(8, 9, "error", "unbalanced bracket"),
            ann(9, 10, "token", cls="number"),
        ]

    def test_balanced_brackets(self):
        assert demo_analyze("f(g(x))") == []

    def test_unmatched_close_bracket(self):
        assert demo_analyze("a)") == [ann(1, 2, "error", "unbalanced bracket")]

    def test_mismatched_pairs(self):
        assert demo_analyze("[ { ] }") == [
            ann(0, 1, "error", "unbalanced bracket"),
            ann(4, 5, "error", "unbalanced bracket"),
        ]

    def test_nested_block_comment(self):
        assert demo_analyze("(* a (* b *) c *)") == [
            ann(0, 17, "token", cls="comment")
        ]

    def test_scala_comments_do_not_nest(self):
        assert demo_analyze("/* a /* b */") == [ann(0, 12, "token", cls="comment")]

    def test_string_hides_keyword(self):
        assert demo_analyze('"val"') == [ann(0, 5, "token", cls="string")]

    def test_string_hides_todo(self):
        assert demo_analyze('"TODO"') == [ann(0, 6, "token", cls="string")]

    def test_comment_hides_brackets_and_holes(self):
        assert demo_analyze("/* ( ??? */") == [ann(0, 11, "token", cls="comment")]

    def test_undefined_hole(self):
        assert demo_analyze("fibs = undefined") == [
            ann(7, 16, "info", "hole", cls="hole")
        ]

    def test_hole_requires_standalone_token(self):
        assert demo_analyze("undefinedX") == []
        assert demo_analyze("????") == []
        assert demo_analyze("??") == []

    def test_string_escapes(self):
        assert demo_analyze(r'"a\"b"') == [ann(0, 6, "token", cls="string")]

    def test_unterminated_string_stops_at_newline(self):
        [s] = [a for a in demo_analyze('"open\nval') if a.cls == "string"]
        assert (s.start, s.end) == (0, 5)
        assert ann(6, 9, "token", cls="keyword") in demo_analyze('"open\nval')

    def test_brackets_match_across_lines(self):
        assert demo_analyze("val x = (\nval y = )\n") == [
            ann(0, 3, "token", cls="keyword"),
            ann(10, 13, "token", cls="keyword"),
        ]

    def test_multiple_todos(self):
        out = demo_analyze("// TODO and TODO")
        assert [a for a in out if a.kind == "warning"] == [
            ann(3, 7, "warning", "TODO"),
            ann(12, 16, "warning", "TODO"),
        ]

    def test_deterministic_and_bounded(self):
        rng = random.Random(6001)
        alphabet = 'val x(){}[]"?/*-\n 123 lemma TODO undefined'
        for _ in range(300):
            text = "".join(
                rng.choice(alphabet) for _ in range(rng.randrange(0, 60))
            )
            first = demo_analyze(text)
            assert first == demo_analyze(text)
            for a in first:
                assert 0 <= a.start <= a.end <= len(text)
            starts = [a.start for a in first]
            assert starts == sorted(starts)


class TestPrereqs:
    def test_demo_has_none(self):
        report = check_prereqs(BUILTIN_ASSISTANTS["demo"], env={})
        assert report.ok
        assert report.items == ()

    def test_isabelle_env_missing(self):
        report = check_prereqs(BUILTIN_ASSISTANTS["isabelle"], env={})
        assert not report.ok
        [status] = report.items
        assert not status.ok
        assert "env.isabelle_home" in status.advice

    def test_isabelle_env_present(self):
        report = check_prereqs(
            BUILTIN_ASSISTANTS["isabelle"], env={"ISABELLE_HOME": "/opt/isa"}
        )
        assert report.ok

    def test_executable_probe(self, tmp_path):
        exe = tmp_path / "scalac"
        exe.write_text("#!/bin/sh\n")
        exe.chmod(0o755)
        ok = check_prereqs(
            BUILTIN_ASSISTANTS["scala"], env={}, path=str(tmp_path)
        )
        assert ok.ok
        missing = check_prereqs(
            BUILTIN_ASSISTANTS["scala"], env={}, path=str(tmp_path / "empty")
        )
        assert not missing.ok
        assert "scalac" in missing.items[0].advice

    def test_haskell_probes_ghc_mod(self):
        [prereq] = BUILTIN_ASSISTANTS["haskell"].prerequisites
        assert prereq.target == "ghc-mod"
        assert prereq.kind == "executable"

    def test_assistant_for(self):
        assert assistant_for("demo").mode == "demo"
        assert assistant_for("nope") is None

    def test_spec_validation(self):
        import pytest

        with pytest.raises(ValueError):
            AssistantSpec("x", "external", command=())
        with pytest.raises(ValueError):
            AssistantSpec("x", "demo", debounce_ms=-1)


class TestStdioProtocol:
    def test_round_trip_matches_builtin(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "cobra.assistants"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        try:
            requests = [
                {"id": 1, "doc": "inline-1", "text": "val x = ???"},
                {"id": 2, "doc": "inline-1", "text": ""},
                {"id": 3, "doc": "other", "text": "(* TODO *)"},
            ]
            payload = "".join(json.dumps(r) + "\n" for r in requests)
            out, _ = proc.communicate(payload, timeout=30)
        finally:
            proc.kill()
        lines = [json.loads(line) for line in out.splitlines()]
        assert [r["id"] for r in lines] == [1, 2, 3]
        assert lines[1]["annotations"] == []
        first = lines[0]["annotations"]
        assert {"start": 0, "end": 3, "kind": "token", "class": "keyword"} in first
        assert {
            "start": 8,
            "end": 11,
            "kind": "info",
            "message": "hole",
            "class": "hole",
        } in first

    def test_malformed_lines_skipped(self):
        proc = subprocess.Popen(
            [sys.executable, "-m", "cobra.assistants"],
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
        )
        try:
            payload = 'not json\n{"id": 7, "text": ""}\n{"id": 8}\n'
            out, _ = proc.communicate(payload, timeout=30)
        finally:
            proc.kill()
        lines = [json.loads(line) for line in out.splitlines()]
        assert [r["id"] for r in lines] == [7]


def run_worker(scenario):
    return asyncio.run(scenario())


class TestWorker:
    def test_demo_mode_delivery(self):
        batches = []

        async def scenario():
            async def deliver(batch):
                batches.append(batch)

            worker = AssistantWorker(
                BUILTIN_ASSISTANTS["demo"], deliver, debounce_s=0.01
            )
            worker.submit("doc", 1, "val x = 1")
            await asyncio.sleep(0.2)
            await worker.aclose()

        run_worker(scenario)
        [batch] = batches
        assert batch.doc_id == "doc"
        assert batch.for_seq == 1
        assert list(batch.annotations) == demo_analyze("val x = 1")

    def test_debounce_single_invocation(self, tmp_path):
        counter = tmp_path / "count"
        script = tmp_path / "assistant.py"
        script.write_text(
            "import sys, json\n"
            "count = 0\n"
            "for line in sys.stdin:\n"
            "    obj = json.loads(line)\n"
            "    count += 1\n"
            f"    open({str(counter)!r}, 'w').write(str(count))\n"
            "    print(json.dumps({'id': obj['id'], 'annotations': []}), flush=True)\n"
        )
        spec = AssistantSpec("demo", "external", command=(sys.executable, str(script)))
        batches = []

        async def scenario():
            async def deliver(batch):
                batches.append(batch)

            worker = AssistantWorker(spec, deliver, debounce_s=0.15)
            worker.submit("doc", 1, "first")
            await asyncio.sleep(0.02)
            worker.submit("doc", 2, "second")
            await asyncio.sleep(1.0)
            await worker.aclose()

        run_worker(scenario)
        assert counter.read_text() == "1"
        [batch] = batches
        assert batch.for_seq == 2

    def test_crash_surfaces_as_error_annotation(self):
        spec = AssistantSpec(
            "demo",
            "external",
            command=(sys.executable, "-c", "import sys; sys.exit(3)"),
        )
        batches = []

        async def scenario():
            async def deliver(batch):
                batches.append(batch)

            worker = AssistantWorker(spec, deliver, debounce_s=0.01, timeout=5)
            worker.submit("doc", 1, "some text")
            await asyncio.sleep(1.0)
            worker.submit("doc", 2, "more text")
            await asyncio.sleep(1.0)
            await worker.aclose()

        run_worker(scenario)
        assert len(batches) == 2
        for batch, text in zip(batches, ["some text", "more text"]):
            [a] = batch.annotations
            assert a.kind == "error"
            assert (a.start, a.end) == (0, len(text))

    def test_timeout_kills_and_reports(self, tmp_path):
        script = tmp_path / "slow.py"
        script.write_text("import sys, time\nsys.stdin.readline()\ntime.sleep(600)\n")
        spec = AssistantSpec("demo", "external", command=(sys.executable, str(script)))
        batches = []

        async def scenario():
            async def deliver(batch):
                batches.append(batch)

            worker = AssistantWorker(spec, deliver, debounce_s=0.01, timeout=0.3)
            worker.submit("doc", 1, "abc")
            await asyncio.sleep(1.5)
            await worker.aclose()

        run_worker(scenario)
        [batch] = batches
        [a] = batch.annotations
        assert a.kind == "error"
        assert "timed out" in a.message

    def test_quiescence_matches_head_analysis(self):
        batches = []
        texts = [f"val x = {i}" for i in range(12)]

        async def scenario():
            async def deliver(batch):
                batches.append(batch)

            worker = AssistantWorker(
                BUILTIN_ASSISTANTS["demo"], deliver, debounce_s=0.01
            )
            for i, text in enumerate(texts, start=1):
                worker.submit("doc", i, text)
                if i % 3 == 0:
                    await asyncio.sleep(0.05)
            await asyncio.sleep(0.3)
            await worker.aclose()

        run_worker(scenario)
        seqs = [b.for_seq for b in batches]
        assert seqs == sorted(seqs)
        assert batches[-1].for_seq == len(texts)
        assert list(batches[-1].annotations) == demo_analyze(texts[-1])
