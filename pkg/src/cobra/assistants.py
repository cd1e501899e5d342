"""Semantic assistants: builtin demo analysis and external workers.

An assistant turns document text into annotations (token classes,
infos, warnings, errors).  Real language integrations run as external
commands speaking newline-delimited JSON on stdin/stdout:

    request   {"id": 1, "doc": "inline-1", "text": "val x = 1"}
    response  {"id": 1, "annotations": [{"start": 0, "end": 3,
               "kind": "token", "class": "keyword"}]}

The builtin demo assistant implements a small deterministic rule set
in-process, so every pipeline behavior is testable without a prover
or compiler.  Running this module as a script serves the demo
assistant over the same stdio protocol, which doubles as a reference
implementation of an external assistant.
"""

from __future__ import annotations

import asyncio
import json
import os
import shutil
import sys
from dataclasses import dataclass, field
from typing import Awaitable, Callable, Iterable, Mapping, Sequence

from .sync import KINDS, Annotation

__all__ = [
    "KEYWORDS",
    "demo_analyze",
    "Prerequisite",
    "PrereqStatus",
    "Report",
    "AssistantSpec",
    "BUILTIN_ASSISTANTS",
    "assistant_for",
    "check_prereqs",
    "AnnotationBatch",
    "AssistantWorker",
    "stdio_main",
]


# ---------------------------------------------------------------------------
# The demo analysis

KEYWORDS = frozenset(
    ["lemma", "fun", "datatype", "val", "module", "where", "by", "apply", "done", "oops"]
)

_BLOCK_COMMENTS = [
    ("(*", "*)", True),  # nesting
    ("{-", "-}", True),
    ("/*", "*/", False),
]
_LINE_COMMENTS = ["//", "--"]
_OPEN_BRACKETS = "([{"
_CLOSE_BRACKETS = ")]}"
_PAIRS = {")": "(", "]": "[", "}": "{"}

_WORD_START = frozenset(
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_"
)
_WORD_CHARS = _WORD_START | frozenset("0123456789'")


def _scan_comment(text: str, i: int) -> int | None:
    """End offset of a comment starting at i, or None."""
    for opener in _LINE_COMMENTS:
        if text.startswith(opener, i):
            end = text.find("\n", i)
            return len(text) if end == -1 else end
    for opener, closer, nests in _BLOCK_COMMENTS:
        if text.startswith(opener, i):
            depth = 1
            j = i + len(opener)
            while j < len(text):
                if nests and text.startswith(opener, j):
                    depth += 1
                    j += len(opener)
                elif text.startswith(closer, j):
                    depth -= 1
                    j += len(closer)
                    if depth == 0:
                        return j
                else:
                    j += 1
            return len(text)
    return None


def demo_analyze(text: str) -> list[Annotation]:
    """Deterministic toy analysis used by the builtin assistant.

    Token classes: keywords from a fixed word list, digit runs as
    numbers, double-quoted literals as strings, comments (all three
    block styles plus ``//`` and ``--``) as comment spans.  ``???``
    and ``undefined`` outside comments and strings become "hole"
    infos, unmatched brackets become errors, and TODO inside a
    comment becomes a warning.
    """
    out: list[Annotation] = []
    opens: list[tuple[str, int]] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        comment_end = _scan_comment(text, i)
        if comment_end is not None:
            out.append(Annotation(i, comment_end, "token", cls="comment"))
            todo = text.find("TODO", i)
            while todo != -1 and todo < comment_end:
                out.append(Annotation(todo, todo + 4, "warning", "TODO"))
                todo = text.find("TODO", todo + 4)
            i = comment_end
            continue
        if c == '"':
            end = i + 1
            while end < n and text[end] not in '"\n':
                end = end + 2 if text[end] == "\\" else end + 1
            end = min(end, n)
            if end < n and text[end] == '"':
                end += 1
            out.append(Annotation(i, end, "token", cls="string"))
            i = end
            continue
        if c in _WORD_START:
            end = i + 1
            while end < n and text[end] in _WORD_CHARS:
                end += 1
            word = text[i:end]
            if word in KEYWORDS:
                out.append(Annotation(i, end, "token", cls="keyword"))
            elif word == "undefined":
                out.append(Annotation(i, end, "info", "hole", cls="hole"))
            i = end
            continue
        if c.isdigit():
            end = i + 1
            while end < n and text[end].isdigit():
                end += 1
            out.append(Annotation(i, end, "token", cls="number"))
            i = end
            continue
        if c == "?":
            end = i + 1
            while end < n and text[end] == "?":
                end += 1
            if end - i == 3:
                out.append(Annotation(i, end, "info", "hole", cls="hole"))
            i = end
            continue
        if c in _OPEN_BRACKETS:
            opens.append((c, i))
            i += 1
            continue
        if c in _CLOSE_BRACKETS:
            if opens and opens[-1][0] == _PAIRS[c]:
                opens.pop()
            else:
                out.append(Annotation(i, i + 1, "error", "unbalanced bracket"))
            i += 1
            continue
        i += 1
    for _, pos in opens:
        out.append(Annotation(pos, pos + 1, "error", "unbalanced bracket"))
    out.sort(key=lambda a: (a.start, a.end, a.kind, a.cls or "", a.message or ""))
    return out


# ---------------------------------------------------------------------------
# Assistant specifications and prerequisites


@dataclass(frozen=True)
class Prerequisite:
    """Something an assistant needs: an env variable or an executable."""

    name: str
    kind: str  # "env" | "executable"
    target: str

    def advice(self) -> str:
        if self.kind == "env":
            return (
                f"define env.{self.target.lower()} in cobra.conf "
                f"or export {self.target}"
            )
        return f"install {self.target} and make sure it is on the PATH"


@dataclass(frozen=True)
class PrereqStatus:
    name: str
    ok: bool
    advice: str = ""


@dataclass(frozen=True)
class Report:
    ok: bool
    items: tuple[PrereqStatus, ...] = ()


@dataclass(frozen=True)
class AssistantSpec:
    """How to run the assistant for one language."""

    language_id: str
    mode: str  # "demo" | "external"
    command: tuple[str, ...] = ()
    env: Mapping[str, str] = field(default_factory=dict)
    debounce_ms: int = 200
    prerequisites: tuple[Prerequisite, ...] = ()

    def __post_init__(self) -> None:
        if self.mode == "external" and not self.command:
            raise ValueError("external assistant needs a command")
        if self.debounce_ms < 0:
            raise ValueError("debounce_ms must be >= 0")


BUILTIN_ASSISTANTS: dict[str, AssistantSpec] = {
    "demo": AssistantSpec("demo", "demo"),
    "isabelle": AssistantSpec(
        "isabelle",
        "external",
        command=("cobra-assistant-isabelle",),
        prerequisites=(Prerequisite("Isabelle installation", "env", "ISABELLE_HOME"),),
    ),
    "scala": AssistantSpec(
        "scala",
        "external",
        command=("cobra-assistant-scala",),
        prerequisites=(Prerequisite("Scala compiler", "executable", "scalac"),),
    ),
    "haskell": AssistantSpec(
        "haskell",
        "external",
        command=("cobra-assistant-haskell",),
        prerequisites=(Prerequisite("ghc-mod", "executable", "ghc-mod"),),
    ),
}


def assistant_for(language_id: str) -> AssistantSpec | None:
    return BUILTIN_ASSISTANTS.get(language_id)


def check_prereqs(
    spec: AssistantSpec,
    env: Mapping[str, str] | None = None,
    *,
    path: str | None = None,
) -> Report:
    """Check an assistant's prerequisites against an environment.

    env defaults to the process environment; path (when given)
    replaces the search path for executable probes.
    """
    if env is None:
        env = os.environ
    items = []
    for prereq in spec.prerequisites:
        if prereq.kind == "env":
            ok = bool(env.get(prereq.target))
        else:
            search = path if path is not None else env.get("PATH", os.defpath)
            ok = shutil.which(prereq.target, path=search) is not None
        items.append(
            PrereqStatus(prereq.name, ok, "" if ok else prereq.advice())
        )
    return Report(all(s.ok for s in items), tuple(items))


# ---------------------------------------------------------------------------
# The worker pipeline


@dataclass(frozen=True)
class AnnotationBatch:
    """Annotations for one document as of one revision."""

    doc_id: str
    for_seq: int
    annotations: tuple[Annotation, ...]


def _annotations_to_json(annotations: Iterable[Annotation]) -> list[dict]:
    out = []
    for a in annotations:
        entry: dict = {"start": a.start, "end": a.end, "kind": a.kind}
        if a.message:
            entry["message"] = a.message
        if a.cls is not None:
            entry["class"] = a.cls
        out.append(entry)
    return out


def _annotations_from_json(entries: object) -> list[Annotation]:
    """Parse annotations from a response, skipping malformed entries."""
    out = []
    if not isinstance(entries, list):
        return out
    for entry in entries:
        try:
            start, end = int(entry["start"]), int(entry["end"])
            kind = entry["kind"]
            if kind not in KINDS or not 0 <= start <= end:
                continue
            out.append(
                Annotation(
                    start, end, kind, entry.get("message"), entry.get("class")
                )
            )
        except (KeyError, TypeError, ValueError):
            continue
    return out


class AssistantWorker:
    """Debounced analysis pipeline for one language.

    Edits call submit() with the latest committed text; after the
    debounce window the newest pending request per document runs, and
    the resulting batch is handed to the deliver callback.  Batches
    are delivered per document in increasing revision order; stale
    results are dropped.  External process failures surface as a
    single error annotation, never as an exception: an assistant
    crash must not take down the presentation.
    """

    def __init__(
        self,
        spec: AssistantSpec,
        deliver: Callable[[AnnotationBatch], Awaitable[None]],
        *,
        settings_env: Mapping[str, str] | None = None,
        timeout: float = 10.0,
        debounce_s: float | None = None,
    ):
        self.spec = spec
        self.deliver = deliver
        self.settings_env = dict(settings_env or {})
        self.timeout = timeout
        self.debounce_s = (
            spec.debounce_ms / 1000.0 if debounce_s is None else debounce_s
        )
        self._pending: dict[str, tuple[int, str]] = {}
        self._timers: dict[str, asyncio.Task] = {}
        self._delivered_seq: dict[str, int] = {}
        self._proc: asyncio.subprocess.Process | None = None
        self._reader: asyncio.Task | None = None
        self._futures: dict[int, asyncio.Future] = {}
        self._next_id = 0
        self._send_lock = asyncio.Lock()

    # -- submission

    def submit(self, doc_id: str, seq: int, text: str) -> None:
        """Schedule analysis of a document revision."""
        self._pending[doc_id] = (seq, text)
        timer = self._timers.get(doc_id)
        if timer is not None and not timer.done():
            timer.cancel()
        self._timers[doc_id] = asyncio.create_task(self._run_later(doc_id))

    async def _run_later(self, doc_id: str) -> None:
        await asyncio.sleep(self.debounce_s)
        pending = self._pending.pop(doc_id, None)
        if pending is None:
            return
        seq, text = pending
        annotations = await self._analyze(doc_id, text)
        if seq <= self._delivered_seq.get(doc_id, -1):
            return
        self._delivered_seq[doc_id] = seq
        await self.deliver(AnnotationBatch(doc_id, seq, tuple(annotations)))

    # -- analysis backends

    async def _analyze(self, doc_id: str, text: str) -> list[Annotation]:
        if self.spec.mode == "demo":
            return demo_analyze(text)
        try:
            return await asyncio.wait_for(
                self._ask_external(doc_id, text), self.timeout
            )
        except asyncio.TimeoutError:
            await self._kill()
            return [Annotation(0, len(text), "error", "assistant timed out")]
        except Exception as exc:
            await self._kill()
            return [Annotation(0, len(text), "error", f"assistant failed: {exc}")]

    async def _ask_external(self, doc_id: str, text: str) -> list[Annotation]:
        await self._ensure_process()
        assert self._proc is not None and self._proc.stdin is not None
        self._next_id += 1
        request_id = self._next_id
        future: asyncio.Future = asyncio.get_running_loop().create_future()
        self._futures[request_id] = future
        line = json.dumps(
            {"id": request_id, "doc": doc_id, "text": text}, sort_keys=True
        )
        try:
            async with self._send_lock:
                self._proc.stdin.write(line.encode() + b"\n")
                await self._proc.stdin.drain()
            return await future
        finally:
            self._futures.pop(request_id, None)

    async def _ensure_process(self) -> None:
        if self._proc is not None and self._proc.returncode is None:
            return
        env = dict(os.environ)
        env.update(self.spec.env)
        env.update({k.upper(): v for k, v in self.settings_env.items()})
        self._proc = await asyncio.create_subprocess_exec(
            *self.spec.command,
            stdin=asyncio.subprocess.PIPE,
            stdout=asyncio.subprocess.PIPE,
            stderr=asyncio.subprocess.DEVNULL,
            env=env,
        )
        self._reader = asyncio.create_task(self._read_responses(self._proc))

    async def _read_responses(self, proc: asyncio.subprocess.Process) -> None:
        assert proc.stdout is not None
        while True:
            line = await proc.stdout.readline()
            if not line:
                break
            try:
                obj = json.loads(line)
                request_id = int(obj["id"])
            except (ValueError, KeyError, TypeError):
                continue
            future = self._futures.get(request_id)
            if future is not None and not future.done():
                future.set_result(_annotations_from_json(obj.get("annotations")))
        for future in self._futures.values():
            if not future.done():
                future.set_exception(RuntimeError("assistant exited"))

    async def _kill(self) -> None:
        proc, self._proc = self._proc, None
        if proc is not None and proc.returncode is None:
            proc.kill()
            await proc.wait()
        if self._reader is not None:
            self._reader.cancel()
            self._reader = None

    async def aclose(self) -> None:
        for timer in self._timers.values():
            timer.cancel()
        self._timers.clear()
        await self._kill()


# ---------------------------------------------------------------------------
# Stdio mode: this module as an external assistant


def stdio_main(stdin=None, stdout=None) -> int:
    """Serve the demo analysis over the external stdio protocol."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        try:
            obj = json.loads(line)
            request_id = obj["id"]
            text = obj["text"]
        except (ValueError, KeyError, TypeError):
            continue
        if not isinstance(text, str):
            continue
        response = {
            "annotations": _annotations_to_json(demo_analyze(text)),
            "id": request_id,
        }
        stdout.write(json.dumps(response, sort_keys=True) + "\n")
        stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(stdio_main())
