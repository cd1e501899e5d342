"""HTTP and WebSocket serving for one presentation.

The module has three layers.  DocumentStore owns the editable state:
one revision log per source (a loaded file or an inline code element)
and one synchronized view per code element, each view being a
marker-stripped projection of its source.  Hub implements the message
protocol over abstract sessions, so every routing rule is testable
without a socket.  The aiohttp application at the bottom binds the hub
to real WebSocket connections and serves the static files around it.

A note on edit routing.  Clients edit views, the logs store raw
sources.  An incoming view operation is mapped onto the raw text at
its parent revision, rebased by the log, and mapped back into every
view of the same source for broadcast; a view untouched by the commit
still gets an identity operation so per-view sequence numbers stay
gapless.  The mapped-back operation is verified against a fresh
projection; when an edit changed document structure (say, a marker
line appeared) the broadcast falls back to a plain text diff.  The
editing client's own prediction is replayed server side with the same
transform convention the client uses, and a client whose prediction
cannot match simply receives a fresh DocState, which always means
"drop local state, this is the text".
"""

from __future__ import annotations

import asyncio
import dataclasses
import hashlib
import ipaddress
import json
import logging
import mimetypes
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Awaitable, Callable, Mapping

from aiohttp import WSMsgType, web

from . import wire
from .assistants import (
    AnnotationBatch,
    AssistantSpec,
    AssistantWorker,
    assistant_for,
    check_prereqs,
)
from .config import (
    CONFIG_NAME,
    ConfigError,
    Settings,
    diff_settings,
    load_settings,
    watch_config,
)
from .languages import DEMO, LanguageSyntax, REGISTRY, for_filename
from .slidedoc import CodeBlock, Deck, parse_slides, render_boilerplate
from .snippets import (
    EditRejected,
    Projection,
    SnippetError,
    UnknownSnippet,
    map_annotations,
    map_raw_edit,
    map_view_edit,
    project,
    scan_source,
)
from .sync import Operation, RevisionLog, SyncError

log = logging.getLogger("cobra.server")

SLIDES_NAME = "slides.html"


class ServerError(Exception):
    pass


class MissingSlides(ServerError):
    def __init__(self, path: Path) -> None:
        super().__init__(f"no {SLIDES_NAME} in {path}")
        self.path = path


def load_presentation(directory: Path) -> tuple[Deck, Settings, list[str]]:
    """Settings and parsed deck of a presentation directory."""
    settings, warnings = load_settings(directory)
    slides_path = directory / SLIDES_NAME
    try:
        text = slides_path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise MissingSlides(directory) from None
    return parse_slides(text), settings, warnings


def settings_digest(settings: Settings) -> str:
    """Short stable fingerprint of a settings value."""
    blob = json.dumps(dataclasses.asdict(settings), sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Document registry


@dataclass
class DocView:
    """One synchronized document: a projection of an origin source."""

    id: str
    origin_key: str
    snippet: str | None


@dataclass
class Origin:
    """One raw source text shared by any number of views."""

    key: str
    syntax: LanguageSyntax
    log: RevisionLog
    views: list[str] = field(default_factory=list)
    fragment_state: dict[int, int] = field(default_factory=dict)
    # Canonical per-view operation history; view_ops[v][k] took the
    # view from revision k to k+1 and is what every client received.
    view_ops: dict[str, list[Operation]] = field(default_factory=dict)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)


class DocumentStore:
    """All origins and views of one presentation.

    View ids are the code element ids from the deck (``inline-<n>``,
    ``file-<path>``, ``snip-<name>``); view revision numbers are the
    origin's revision numbers, so views of a shared source advance in
    lockstep.
    """

    def __init__(self) -> None:
        self.docs: dict[str, DocView] = {}
        self.origins: dict[str, Origin] = {}

    @classmethod
    def build(cls, directory: Path, deck: Deck, settings: Settings) -> "DocumentStore":
        """Load every source a deck references.

        Files are read from the presentation directory and scanned
        strictly, so marker and fragment mistakes surface at startup
        instead of as silently broken views.
        """
        store = cls()
        fallback = REGISTRY.get(settings.language) or DEMO
        snippet_origin: dict[str, str] = {}

        def add_view(block: CodeBlock, origin: Origin, snippet: str | None) -> None:
            if block.id in store.docs:
                return
            store.docs[block.id] = DocView(block.id, origin.key, snippet)
            origin.views.append(block.id)
            origin.view_ops[block.id] = []

        file_blocks = [b for b in deck.all_code if b.src is not None]
        for block in file_blocks:
            key = f"file:{block.src}"
            if key not in store.origins:
                path = directory / block.src
                try:
                    text = path.read_text(encoding="utf-8")
                except FileNotFoundError:
                    raise ServerError(f"missing source file: {block.src}") from None
                syntax = (
                    REGISTRY.get(block.language or "")
                    or for_filename(block.src)
                    or fallback
                )
                scan = scan_source(text, syntax, strict=True)
                origin = Origin(key, syntax, RevisionLog(key, text))
                store.origins[key] = origin
                for name in scan.snippet_names:
                    snippet_origin.setdefault(name, key)
            add_view(block, store.origins[key], None)

        for block in deck.all_code:
            if block.snippet is not None:
                key = snippet_origin.get(block.snippet)
                if key is None:
                    raise UnknownSnippet(block.snippet)
                add_view(block, store.origins[key], block.snippet)
            elif block.src is None:
                key = f"inline:{block.id}"
                syntax = REGISTRY.get(block.language or "") or fallback
                text = block.inline_text or ""
                scan_source(text, syntax, strict=True)
                origin = Origin(key, syntax, RevisionLog(key, text))
                store.origins[key] = origin
                add_view(block, origin, None)
        return store

    def origin_of(self, view_id: str) -> Origin:
        return self.origins[self.docs[view_id].origin_key]

    def try_projection(self, view_id: str, seq: int | None = None) -> Projection | None:
        """The view's projection at a revision, or None when the view's
        snippet no longer exists in the source."""
        view = self.docs[view_id]
        origin = self.origins[view.origin_key]
        text = origin.log.text if seq is None else origin.log.text_at(seq)
        try:
            return project(text, origin.syntax, snippet=view.snippet)
        except UnknownSnippet:
            return None

    def view_text(self, view_id: str, seq: int | None = None) -> str:
        proj = self.try_projection(view_id, seq)
        return proj.text if proj is not None else ""

    def view_fragments(self, view_id: str, seq: int | None = None) -> list[int]:
        """Source fragment indices visible in a view, in order."""
        proj = self.try_projection(view_id, seq)
        if proj is None:
            return []
        lo, hi = proj.range
        return [
            i
            for i, f in enumerate(proj.scan.fragments)
            if lo <= f.whole_range[0] and f.whole_range[1] <= hi
        ]


# ---------------------------------------------------------------------------
# Sessions and message routing

Send = Callable[[wire.Message], Awaitable[None]]

_ROLE_PRESENTER = "presenter"
_ROLE_VIEWER = "viewer"


def _is_loopback(host: str) -> bool:
    if host in ("localhost", ""):
        return host == "localhost"
    try:
        return ipaddress.ip_address(host.strip("[]")).is_loopback
    except ValueError:
        return False


class Session:
    """One connected client."""

    def __init__(self, client_id: int, send: Send, role: str) -> None:
        self.client_id = client_id
        self.role = role
        self.open_docs: set[str] = set()
        self.greeted = False
        self.close_requested = False
        self._send = send

    async def send(self, msg: wire.Message) -> None:
        await self._send(msg)


class Hub:
    """Protocol logic over abstract sessions.

    The hub never touches sockets; a transport calls connect(), feeds
    decoded messages to handle(), and honors session.close_requested.
    """

    def __init__(
        self,
        store: DocumentStore,
        deck: Deck,
        settings: Settings,
        *,
        assistant_overrides: Mapping[str, AssistantSpec | None] | None = None,
        assistant_debounce_s: float | None = None,
    ) -> None:
        self.store = store
        self.deck = deck
        self.settings = settings
        self.sessions: dict[int, Session] = {}
        self.latest_annotations: dict[str, wire.Annotations] = {}
        self.assistant_warnings: list[str] = []
        self.workers: dict[str, AssistantWorker] = {}
        self._next_client = 1
        self._build_workers(assistant_overrides or {}, assistant_debounce_s)

    # -- assistants

    def _build_workers(
        self,
        overrides: Mapping[str, AssistantSpec | None],
        debounce_s: float | None,
    ) -> None:
        env = dict(os.environ)
        for key, value in self.settings.env.items():
            env[key.upper()] = value
        for lang in sorted({o.syntax.language_id for o in self.store.origins.values()}):
            spec = overrides[lang] if lang in overrides else assistant_for(lang)
            if spec is None:
                continue
            report = check_prereqs(spec, env)
            if not report.ok:
                for item in report.items:
                    if not item.ok:
                        self.assistant_warnings.append(
                            f"{lang} assistant disabled: {item.name} missing; {item.advice}"
                        )
                continue
            self.workers[lang] = AssistantWorker(
                spec,
                self._deliver_batch,
                settings_env=self.settings.env,
                debounce_s=debounce_s,
            )

    async def start(self) -> None:
        """Request an initial analysis of every source."""
        for origin in self.store.origins.values():
            self._schedule_analysis(origin)

    async def aclose(self) -> None:
        for worker in self.workers.values():
            await worker.aclose()

    def _schedule_analysis(self, origin: Origin) -> None:
        worker = self.workers.get(origin.syntax.language_id)
        if worker is not None:
            worker.submit(origin.key, origin.log.head_seq, origin.log.text)

    async def _deliver_batch(self, batch: AnnotationBatch) -> None:
        origin = self.store.origins.get(batch.doc_id)
        if origin is None:
            return
        async with origin.lock:
            for view_id in origin.views:
                proj = self.store.try_projection(view_id, batch.for_seq)
                anns = (
                    map_annotations(proj, batch.annotations)
                    if proj is not None
                    else []
                )
                msg = wire.Annotations(view_id, batch.for_seq, tuple(anns))
                self.latest_annotations[view_id] = msg
                await self._broadcast(view_id, msg)

    # -- session lifecycle

    async def connect(self, send: Send, *, peer_host: str) -> Session:
        role = _ROLE_PRESENTER if _is_loopback(peer_host) else _ROLE_VIEWER
        session = Session(self._next_client, send, role)
        self._next_client += 1
        self.sessions[session.client_id] = session
        return session

    async def disconnect(self, session: Session) -> None:
        self.sessions.pop(session.client_id, None)

    async def _broadcast(self, view_id: str, msg: wire.Message) -> None:
        for session in list(self.sessions.values()):
            if view_id in session.open_docs:
                await session.send(msg)

    # -- routing

    async def handle(self, session: Session, msg: wire.Message) -> None:
        if isinstance(msg, wire.ClientHello):
            await self._on_hello(session, msg)
            return
        if not session.greeted:
            await session.send(wire.Error("bad-request", "hello first"))
            session.close_requested = True
            return
        if isinstance(msg, wire.OpenDoc):
            await self._on_open(session, msg)
        elif isinstance(msg, wire.Edit):
            await self._on_edit(session, msg)
        elif isinstance(msg, wire.FragmentStep):
            await self._on_fragment_step(session, msg)
        else:
            await session.send(
                wire.Error("bad-request", type(msg).__name__)
            )

    async def _on_hello(self, session: Session, msg: wire.ClientHello) -> None:
        if msg.protocol_version != wire.PROTOCOL_VERSION:
            await session.send(
                wire.Error(
                    "version-mismatch",
                    f"server speaks protocol {wire.PROTOCOL_VERSION}",
                )
            )
            session.close_requested = True
            return
        session.greeted = True
        docs = tuple(block.id for block in self.deck.all_code)
        await session.send(wire.ServerHello(settings_digest(self.settings), docs))

    async def _on_open(self, session: Session, msg: wire.OpenDoc) -> None:
        view = self.store.docs.get(msg.doc_id)
        if view is None:
            await session.send(wire.Error("doc-not-found", msg.doc_id))
            return
        origin = self.store.origins[view.origin_key]
        async with origin.lock:
            session.open_docs.add(msg.doc_id)
            seq = origin.log.head_seq
            await session.send(
                wire.DocState(msg.doc_id, seq, self.store.view_text(msg.doc_id, seq))
            )
            stored = self.latest_annotations.get(msg.doc_id)
            if stored is not None:
                await session.send(stored)
            visible = self.store.view_fragments(msg.doc_id, seq)
            for view_index, raw_index in enumerate(visible):
                variant = origin.fragment_state.get(raw_index, 0)
                if variant:
                    await session.send(
                        wire.FragmentStep(msg.doc_id, view_index, variant)
                    )

    async def _on_edit(self, session: Session, msg: wire.Edit) -> None:
        view = self.store.docs.get(msg.doc_id)
        if view is None:
            await session.send(wire.Error("doc-not-found", msg.doc_id))
            return
        origin = self.store.origins[view.origin_key]
        async with origin.lock:
            await self._commit_edit(session, origin, msg)

    async def _resync(self, session: Session, view_id: str) -> None:
        origin = self.store.origin_of(view_id)
        seq = origin.log.head_seq
        await session.send(
            wire.DocState(view_id, seq, self.store.view_text(view_id, seq))
        )

    async def _commit_edit(
        self, session: Session, origin: Origin, msg: wire.Edit
    ) -> None:
        view_id = msg.doc_id
        view = self.store.docs[view_id]
        try:
            parent_proj = project(
                origin.log.text_at(msg.parent_seq),
                origin.syntax,
                snippet=view.snippet,
            )
            raw_op = map_view_edit(parent_proj, msg.op)
            seq, committed = origin.log.receive(
                str(session.client_id), msg.parent_seq, raw_op
            )
        except (SnippetError, SyncError) as exc:
            await session.send(wire.Error("edit-rejected", str(exc)))
            await self._resync(session, view_id)
            return

        before = origin.log.text_at(seq - 1)
        after = origin.log.text_at(seq)
        for v in origin.views:
            origin.view_ops[v].append(
                self._canonical_view_op(v, committed, seq, before, after)
            )

        for other in list(self.sessions.values()):
            for v in origin.views:
                if other is session and v == view_id:
                    continue
                if v in other.open_docs:
                    await other.send(
                        wire.RemoteEdit(
                            v, seq, origin.view_ops[v][seq - 1], session.client_id
                        )
                    )
        await session.send(wire.Ack(view_id, seq))
        if not self._author_converges(origin, view_id, msg, seq):
            await self._resync(session, view_id)
        self._schedule_analysis(origin)

    def _canonical_view_op(
        self, view_id: str, committed: Operation, seq: int, before: str, after: str
    ) -> Operation:
        """The broadcast operation taking a view across one commit.

        Mapping the committed raw operation keeps positions faithful
        for concurrent editors; when the commit changed which text is
        visible (new markers, a renamed snippet) the mapped operation
        cannot reproduce the view and a plain diff takes over.
        """
        proj_before = self.store.try_projection(view_id, seq - 1)
        text_before = proj_before.text if proj_before is not None else ""
        text_after = self.store.view_text(view_id, seq)
        if proj_before is not None:
            try:
                mapped = map_raw_edit(proj_before, committed)
                if mapped.apply(text_before) == text_after:
                    return mapped
            except (SnippetError, SyncError):
                pass
        return Operation.diff(text_before, text_after)

    def _author_converges(
        self, origin: Origin, view_id: str, msg: wire.Edit, seq: int
    ) -> bool:
        """Replay the author's client-side transform of its own edit.

        The client rebases its outstanding operation over the remote
        edits it received since the edit's parent; its text after the
        ack matches the server's view exactly when that rebase lands on
        the committed result.
        """
        op = msg.op
        try:
            for past in origin.view_ops[view_id][msg.parent_seq : seq - 1]:
                op, _ = Operation.transform(op, past)
            predicted = op.apply(self.store.view_text(view_id, seq - 1))
        except SyncError:
            return False
        return predicted == self.store.view_text(view_id, seq)

    async def _on_fragment_step(self, session: Session, msg: wire.FragmentStep) -> None:
        if session.role != _ROLE_PRESENTER:
            await session.send(wire.Error("forbidden", "presenter only"))
            return
        view = self.store.docs.get(msg.doc_id)
        if view is None:
            await session.send(wire.Error("doc-not-found", msg.doc_id))
            return
        origin = self.store.origins[view.origin_key]
        async with origin.lock:
            visible = self.store.view_fragments(msg.doc_id)
            if not 0 <= msg.fragment_index < len(visible):
                return
            raw_index = visible[msg.fragment_index]
            proj = self.store.try_projection(msg.doc_id)
            fragment = proj.scan.fragments[raw_index]
            variant = max(0, min(len(fragment.variants) - 1, msg.variant_index))
            origin.fragment_state[raw_index] = variant
            for v in origin.views:
                frags = self.store.view_fragments(v)
                if raw_index in frags:
                    await self._broadcast(
                        v, wire.FragmentStep(v, frags.index(raw_index), variant)
                    )

    # -- settings

    async def apply_settings(self, settings: Settings) -> list:
        """Adopt a new resolved configuration and notify sessions."""
        changes = diff_settings(self.settings, settings)
        if not changes:
            return []
        self.settings = settings
        for worker in self.workers.values():
            worker.settings_env = dict(settings.env)
        msg = wire.SettingsChanged(tuple(changes))
        for session in list(self.sessions.values()):
            if session.greeted:
                await session.send(msg)
        return changes


# ---------------------------------------------------------------------------
# HTTP application

_ASSETS_DIR = Path(__file__).resolve().parent / "client_assets"


def _safe_child(base: Path, tail: str) -> Path | None:
    """base/tail when it stays inside base and is a file, else None."""
    if "\x00" in tail:
        return None
    candidate = (base / tail.lstrip("/")).resolve()
    base = base.resolve()
    if candidate != base and not candidate.is_relative_to(base):
        return None
    return candidate if candidate.is_file() else None


def _file_response(path: Path) -> web.Response:
    ctype, _ = mimetypes.guess_type(path.name)
    return web.Response(
        body=path.read_bytes(), content_type=ctype or "application/octet-stream"
    )


def build_app(hub: Hub, directory: Path) -> web.Application:
    app = web.Application()

    async def index(request: web.Request) -> web.Response:
        html = render_boilerplate(hub.deck, hub.settings)
        return web.Response(text=html, content_type="text/html")

    async def client_asset(request: web.Request) -> web.Response:
        path = _safe_child(_ASSETS_DIR, request.match_info["tail"])
        if path is None:
            raise web.HTTPNotFound()
        return _file_response(path)

    async def presentation_file(request: web.Request) -> web.Response:
        path = _safe_child(directory, request.match_info["tail"])
        if path is None:
            raise web.HTTPNotFound()
        return _file_response(path)

    async def websocket(request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse()
        await ws.prepare(request)
        write_lock = asyncio.Lock()

        async def send(msg: wire.Message) -> None:
            async with write_lock:
                if not ws.closed:
                    await ws.send_bytes(wire.encode(msg))

        session = await hub.connect(send, peer_host=request.remote or "")
        try:
            async for frame in ws:
                if frame.type != WSMsgType.BINARY:
                    await send(wire.Error("bad-request", "binary frames only"))
                    break
                try:
                    msg = wire.decode(frame.data)
                except wire.DecodeError as exc:
                    await send(wire.Error("bad-frame", str(exc)))
                    break
                await hub.handle(session, msg)
                if session.close_requested:
                    break
        finally:
            await hub.disconnect(session)
            await ws.close()
        return ws

    app.router.add_get("/", index)
    app.router.add_get("/ws", websocket)
    app.router.add_get("/client/{tail:.+}", client_asset)
    app.router.add_get("/{tail:.+}", presentation_file)
    return app


# ---------------------------------------------------------------------------
# Process-level server


class Server:
    """A running presentation: hub, HTTP binding, and config watcher."""

    def __init__(
        self,
        directory: Path,
        *,
        port: int | None = None,
        interface: str | None = None,
        watch: bool = True,
        assistant_overrides: Mapping[str, AssistantSpec | None] | None = None,
    ) -> None:
        self.directory = Path(directory).resolve()
        self._port_override = port
        self._interface_override = interface
        self._watch = watch
        deck, settings, self.warnings = load_presentation(self.directory)
        self.settings = self._with_overrides(settings)
        self.deck = deck
        store = DocumentStore.build(self.directory, deck, self.settings)
        self.hub = Hub(
            store, deck, self.settings, assistant_overrides=assistant_overrides
        )
        self._runner: web.AppRunner | None = None
        self._site: web.TCPSite | None = None
        self._watcher: asyncio.Task | None = None

    def _with_overrides(self, settings: Settings) -> Settings:
        if self._port_override is not None:
            settings = dataclasses.replace(settings, binding_port=self._port_override)
        if self._interface_override is not None:
            settings = dataclasses.replace(
                settings, binding_interface=self._interface_override
            )
        return settings

    @property
    def url(self) -> str:
        host = self.settings.binding_interface
        if host in ("0.0.0.0", "::") or _is_loopback(host):
            host = "localhost"
        return f"http://{host}:{self.settings.binding_port}/"

    async def start(self) -> None:
        await self.hub.start()
        self._runner = web.AppRunner(build_app(self.hub, self.directory))
        await self._runner.setup()
        await self._bind()
        if self._watch:
            self._watcher = asyncio.create_task(
                watch_config(
                    self.directory / CONFIG_NAME,
                    self._on_config_change,
                    on_error=self._on_config_error,
                )
            )

    async def _bind(self) -> None:
        assert self._runner is not None
        self._site = web.TCPSite(
            self._runner,
            self.settings.binding_interface,
            self.settings.binding_port,
        )
        await self._site.start()

    async def stop(self) -> None:
        if self._watcher is not None:
            self._watcher.cancel()
            try:
                await self._watcher
            except asyncio.CancelledError:
                pass
            self._watcher = None
        await self.hub.aclose()
        if self._runner is not None:
            await self._runner.cleanup()
            self._runner = None
            self._site = None

    async def serve_forever(self) -> None:
        await self.start()
        try:
            await asyncio.Event().wait()
        finally:
            await self.stop()

    def _on_config_error(self, exc: ConfigError) -> None:
        log.warning("configuration ignored: %s", exc)

    async def _on_config_change(self, settings: Settings, warnings: list[str]) -> None:
        for w in warnings:
            log.warning("%s", w)
        settings = self._with_overrides(settings)
        changes = await self.hub.apply_settings(settings)
        if not changes:
            return
        old_port = self.settings.binding_port
        self.settings = settings
        for change in changes:
            if not change.hot:
                log.warning("%s change needs a restart", change.path)
        if self.settings.binding_port != old_port and self._site is not None:
            old_site = self._site
            try:
                await self._bind()
            except OSError as exc:
                log.warning("cannot move to port %s: %s", self.settings.binding_port, exc)
                self._site = old_site
                return
            await old_site.stop()
            log.info("now listening on %s", self.url)
