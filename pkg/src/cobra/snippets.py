"""Snippet extraction, fragment variants, and edit projection.

Source files carry presentation structure inside comments:

  - marker comments ``begin #name`` / ``end #name`` delimit named
    snippets; the marker lines themselves are never shown,
  - fragment constructs hide alternative versions of a piece of code in
    comments next to the live version, e.g. ``/*(*/???/*|3 * 7)*/``
    shows ``???`` first and ``3 * 7`` after one step, while the file on
    disk stays a valid program,
  - selection constructs like ``(*(*)A(*)*)`` mark a region to
    highlight during the talk.

A Projection maps between the raw text and a view with this scaffolding
stripped.  map_view_edit translates an operation expressed in view
coordinates into one over the raw document that produces the same
visible change; map_raw_edit goes the other way for broadcasting.

Every operation returned by map_view_edit is verified: applying it to
the raw text and re-projecting must give exactly the text the view
operation produces.  Edits for which no translation passes that check
(for example deleting the newline that keeps a marker on its own line,
which would drag visible text onto the stripped line) raise
EditRejected rather than silently diverging.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .languages import LanguageSyntax
from .sync import Annotation, LengthMismatch, Operation


class SnippetError(Exception):
    """Base class for source-structure errors."""


class DuplicateSnippet(SnippetError):
    def __init__(self, name: str, offset: int) -> None:
        super().__init__(f"snippet #{name} defined twice (second at offset {offset})")
        self.name = name
        self.offset = offset


class UnmatchedMarker(SnippetError):
    def __init__(self, name: str, kind: str, offset: int) -> None:
        super().__init__(f"{kind} marker #{name} at offset {offset} has no partner")
        self.name = name
        self.kind = kind
        self.offset = offset


class MalformedFragment(SnippetError):
    def __init__(self, offset: int, reason: str) -> None:
        super().__init__(f"fragment construct at offset {offset}: {reason}")
        self.offset = offset
        self.reason = reason


class UnknownSnippet(SnippetError):
    def __init__(self, name: str) -> None:
        super().__init__(f"no snippet named #{name}")
        self.name = name


class EditRejected(SnippetError):
    """The view edit cannot be expressed as a raw edit.

    Raised when no translated operation survives re-projection intact,
    e.g. an edit that would merge visible text into a hidden marker
    line or introduce new scaffolding from inside a view.
    """


# ---------------------------------------------------------------------------
# Comment scanning


@dataclass(frozen=True)
class CommentSpan:
    """One comment, delimiters included.

    body_start/body_end delimit the text between the comment tokens.
    bracket is "(" or ")" for the atomic fragment delimiter comments,
    None otherwise.  terminated is False for a block comment that runs
    off the end of the file; such a span doubles as the diagnostic for
    it, scanning continues after it.
    """

    start: int
    end: int
    body_start: int
    body_end: int
    terminated: bool = True
    line: bool = False
    bracket: str | None = None


def _skip_string(text: str, i: int) -> int:
    """Index just past a double-quoted literal starting at i."""
    n = len(text)
    i += 1
    while i < n:
        c = text[i]
        if c == "\\" and i + 1 < n:
            i += 2
            continue
        if c == '"':
            return i + 1
        i += 1
    return n


def comment_spans(text: str, syntax: LanguageSyntax) -> list[CommentSpan]:
    """All comments of text, left to right.

    Double-quoted string literals are skipped so comment tokens inside
    them do not open comments.  For nesting languages an inner open
    token deepens the comment.  The fragment delimiter tokens (see
    LanguageSyntax.fragment_open) are matched first and yield their own
    single spans; without that, nesting languages would misparse them.
    """
    spans: list[CommentSpan] = []
    bo, bc = syntax.block_open, syntax.block_close
    fro, frc = syntax.fragment_open, syntax.fragment_close
    line = syntax.line_comment
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == '"':
            i = _skip_string(text, i)
            continue
        if text.startswith(fro, i):
            spans.append(
                CommentSpan(i, i + len(fro), i + len(bo), i + len(fro) - len(bc), bracket="(")
            )
            i += len(fro)
            continue
        if text.startswith(frc, i):
            spans.append(
                CommentSpan(i, i + len(frc), i + len(bo), i + len(frc) - len(bc), bracket=")")
            )
            i += len(frc)
            continue
        if text.startswith(bo, i):
            start = i
            i += len(bo)
            depth = 1
            while i < n and depth:
                if text.startswith(bc, i):
                    depth -= 1
                    i += len(bc)
                elif syntax.nesting and text.startswith(bo, i):
                    depth += 1
                    i += len(bo)
                else:
                    i += 1
            terminated = depth == 0
            body_end = i - len(bc) if terminated else i
            spans.append(CommentSpan(start, i, start + len(bo), body_end, terminated))
            continue
        if line is not None and text.startswith(line, i):
            start = i
            j = text.find("\n", i)
            end = n if j == -1 else j
            spans.append(CommentSpan(start, end, start + len(line), end, line=True))
            i = end
            continue
        i += 1
    return spans


# ---------------------------------------------------------------------------
# Markers and snippets


_MARKER_RE = re.compile(r"^\*?\s*(begin|end)\s+#(\S+)\s*$")


@dataclass(frozen=True)
class Marker:
    """A begin/end marker comment and the line it owns."""

    name: str
    kind: str  # "begin" | "end"
    offset: int  # start of the marker comment
    line_start: int
    line_end: int  # exclusive, includes the trailing newline if present


@dataclass(frozen=True)
class SnippetDef:
    """A named slice of the document between two marker lines.

    The range starts after the begin marker's line and ends before the
    newline that precedes the end marker's line, so the snippet text
    neither starts nor ends with marker scaffolding.
    """

    name: str
    begin_offset: int
    end_offset: int


def _line_range(text: str, offset: int) -> tuple[int, int]:
    start = text.rfind("\n", 0, offset) + 1
    j = text.find("\n", offset)
    end = len(text) if j == -1 else j + 1
    return start, end


def find_markers(text: str, syntax: LanguageSyntax, spans: Sequence[CommentSpan] | None = None) -> list[Marker]:
    """Marker comments in document order."""
    if spans is None:
        spans = comment_spans(text, syntax)
    markers: list[Marker] = []
    for span in spans:
        if span.bracket is not None:
            continue
        body = text[span.body_start : span.body_end].strip()
        m = _MARKER_RE.match(body)
        if not m:
            continue
        ls, le = _line_range(text, span.start)
        markers.append(Marker(m.group(2), m.group(1), span.start, ls, le))
    return markers


def extract_snippets(
    text: str,
    syntax: LanguageSyntax,
    markers: Sequence[Marker] | None = None,
    *,
    strict: bool = True,
) -> list[SnippetDef]:
    """Named snippets defined by begin/end markers.

    Snippets may overlap and nest arbitrarily; each name pairs its own
    begin with its own end.  A name defined twice raises
    DuplicateSnippet, a begin without end or end without begin raises
    UnmatchedMarker.  With strict=False broken markers are skipped
    instead (first definition wins), which is what re-projection of a
    document mid-edit uses.
    """
    if markers is None:
        markers = find_markers(text, syntax)
    open_markers: dict[str, Marker] = {}
    done: dict[str, SnippetDef] = {}
    order: list[str] = []
    for marker in markers:
        if marker.kind == "begin":
            if marker.name in done or marker.name in open_markers:
                if strict:
                    raise DuplicateSnippet(marker.name, marker.offset)
                continue
            open_markers[marker.name] = marker
            order.append(marker.name)
        else:
            begin = open_markers.pop(marker.name, None)
            if begin is None:
                if strict:
                    raise UnmatchedMarker(marker.name, "end", marker.offset)
                continue
            begin_offset = begin.line_end
            end_offset = marker.line_start
            if end_offset > 0 and text[end_offset - 1] == "\n":
                end_offset -= 1
            end_offset = max(begin_offset, end_offset)
            done[marker.name] = SnippetDef(marker.name, begin_offset, end_offset)
    if open_markers and strict:
        first = min(open_markers.values(), key=lambda m: m.offset)
        raise UnmatchedMarker(first.name, "begin", first.offset)
    return [done[name] for name in order if name in done]


# ---------------------------------------------------------------------------
# Fragment constructs


@dataclass(frozen=True)
class Variant:
    """One alternative of a fragment construct.

    pieces lists the raw ranges whose concatenation is the variant's
    text; live is True when any of it sits outside comments (i.e. this
    is the version the compiler sees).
    """

    text: str
    live: bool
    pieces: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Fragment:
    """A staged-variant or selection construct.

    whole_range covers everything from the opening to the closing
    delimiter comment.  Exactly one variant is live.  kind is
    "selection" for single-variant constructs (highlight targets) and
    "staged" otherwise.
    """

    whole_range: tuple[int, int]
    variants: tuple[Variant, ...]
    kind: str

    @property
    def live_index(self) -> int:
        for i, v in enumerate(self.variants):
            if v.live:
                return i
        return 0


def parse_fragments(
    text: str,
    syntax: LanguageSyntax,
    spans: Sequence[CommentSpan] | None = None,
    *,
    strict: bool = True,
) -> list[Fragment]:
    """Fragment constructs of text, in document order.

    A construct opens at a comment whose body starts with "(" and
    closes at the first unnested ")" in a later comment's body; "|" at
    nesting depth zero inside comment bodies separates variants.  Text
    between the delimiters contributes to the current variant: live
    code directly, comment text without its delimiters.  A "(" and ")"
    inside one and the same comment is ordinary prose, not a construct.

    Raises MalformedFragment for constructs that never close or do not
    have exactly one live variant.  With strict=False such constructs
    are skipped and their comments remain ordinary comments, so a text
    that is briefly malformed mid-edit still projects.
    """
    if spans is None:
        spans = comment_spans(text, syntax)
    fragments: list[Fragment] = []
    i = 0
    while i < len(spans):
        span = spans[i]
        body = text[span.body_start : span.body_end]
        if not body.startswith("("):
            i += 1
            continue
        try:
            construct = _parse_construct(text, spans, i)
        except MalformedFragment:
            if strict:
                raise
            i += 1
            continue
        if construct is None:
            i += 1
            continue
        fragment, next_i = construct
        fragments.append(fragment)
        i = next_i
    return fragments


def _parse_construct(
    text: str, spans: Sequence[CommentSpan], open_index: int
) -> tuple[Fragment, int] | None:
    """Parse one construct whose opening comment is spans[open_index].

    Returns None when the "(" closes inside the same comment (prose).
    """
    open_span = spans[open_index]
    start = open_span.start
    # Cut points are raw offsets of the "|" separators; each sits
    # inside some comment body.
    cuts: list[int] = []
    depth = 0
    si = open_index
    pos = open_span.body_start + 1  # just after the opening "("
    while si < len(spans):
        span = spans[si]
        scan_from = pos if si == open_index else span.body_start
        j = scan_from
        while j < span.body_end:
            c = text[j]
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    if si == open_index:
                        return None  # prose: closed within the opening comment
                    return (
                        _build_fragment(text, spans, open_index, si, j, cuts),
                        si + 1,
                    )
                depth -= 1
            elif c == "|" and depth == 0:
                cuts.append(j)
            j += 1
        si += 1
    raise MalformedFragment(start, "construct never closes")


def _build_fragment(
    text: str,
    spans: Sequence[CommentSpan],
    open_index: int,
    close_index: int,
    close_pos: int,
    cuts: list[int],
) -> Fragment:
    open_span = spans[open_index]
    close_span = spans[close_index]
    seg_start = open_span.body_start + 1
    bounds = [seg_start, *cuts, close_pos]
    variants: list[Variant] = []
    inner = spans[open_index : close_index + 1]
    for k in range(len(bounds) - 1):
        a = bounds[k] if k == 0 else bounds[k] + 1  # skip the "|" itself
        b = bounds[k + 1]
        pieces = _variant_pieces(a, b, inner)
        body = "".join(text[s:e] for s, e in pieces)
        if pieces:
            live = any(_is_live_piece(s, e, inner) for s, e in pieces)
        else:
            live = _crosses_out(a, b, inner)
        variants.append(Variant(body, live, tuple(pieces)))
    live_count = sum(1 for v in variants if v.live)
    if live_count == 0:
        raise MalformedFragment(open_span.start, "no live variant")
    if live_count > 1:
        raise MalformedFragment(open_span.start, "multiple live variants")
    kind = "selection" if len(variants) == 1 else "staged"
    return Fragment((open_span.start, close_span.end), tuple(variants), kind)


def _variant_pieces(
    a: int, b: int, spans: Sequence[CommentSpan]
) -> list[tuple[int, int]]:
    """Content ranges of [a, b): live text plus comment bodies.

    Comment delimiters inside the range are excluded, so the variant
    text reads the way the author wrote it.
    """
    pieces: list[tuple[int, int]] = []
    pos = a
    for span in spans:
        if span.end <= a or span.start >= b:
            continue
        if span.start > pos:
            pieces.append((pos, span.start))
        s = max(a, span.body_start)
        e = min(b, span.body_end)
        if s < e:
            pieces.append((s, e))
        pos = min(b, span.end)
    if pos < b:
        pieces.append((pos, b))
    return [p for p in pieces if p[0] < p[1]]


def _is_live_piece(s: int, e: int, spans: Sequence[CommentSpan]) -> bool:
    for span in spans:
        if span.start <= s and e <= span.end:
            return False
    return True


def _crosses_out(a: int, b: int, spans: Sequence[CommentSpan]) -> bool:
    """True when (a, b) contains a position outside all comments.

    This keeps a variant live even when its text is currently empty:
    the spot between the delimiting comments still belongs to the live
    code, so the construct stays well formed while someone deletes and
    retypes the live text.
    """

    def outside(p: int) -> bool:
        return all(not (s.start < p < s.end) for s in spans)

    for span in spans:
        for p in (span.start, span.end):
            if a < p < b and outside(p):
                return True
    return False


# ---------------------------------------------------------------------------
# Scanning a whole source


@dataclass
class SourceScan:
    """Everything the projection machinery needs to know about a text."""

    text: str
    syntax: LanguageSyntax
    comments: list[CommentSpan]
    markers: list[Marker]
    snippets: list[SnippetDef]
    fragments: list[Fragment]

    @property
    def snippet_names(self) -> list[str]:
        return [s.name for s in self.snippets]

    def snippet(self, name: str) -> SnippetDef:
        for s in self.snippets:
            if s.name == name:
                return s
        raise UnknownSnippet(name)


def scan_source(text: str, syntax: LanguageSyntax, *, strict: bool = True) -> SourceScan:
    spans = comment_spans(text, syntax)
    markers = find_markers(text, syntax, spans)
    snippets = extract_snippets(text, syntax, markers, strict=strict)
    fragments = parse_fragments(text, syntax, spans, strict=strict)
    return SourceScan(text, syntax, spans, markers, snippets, fragments)


# ---------------------------------------------------------------------------
# Projection


@dataclass(frozen=True)
class Piece:
    """A visible run: view offset, raw offset, length."""

    view: int
    raw: int
    length: int

    @property
    def view_end(self) -> int:
        return self.view + self.length

    @property
    def raw_end(self) -> int:
        return self.raw + self.length


@dataclass
class Projection:
    """A bidirectional map between raw text and a projected view."""

    raw_text: str
    text: str
    pieces: list[Piece]
    range: tuple[int, int]
    syntax: LanguageSyntax
    snippet: str | None
    fragment_state: Mapping[int, int] | None
    strip_markers: bool
    scan: SourceScan
    marker_line_starts: frozenset[int] = field(default_factory=frozenset)
    variant_entry_gaps: frozenset[int] = field(default_factory=frozenset)

    def to_raw(self, view_pos: int) -> int:
        """Raw offset of a view position; the view end maps past the
        last visible character."""
        if not 0 <= view_pos <= len(self.text):
            raise IndexError(view_pos)
        if not self.pieces:
            return self.range[0]
        if view_pos == len(self.text):
            return self.pieces[-1].raw_end
        idx = max(bisect_right(self._view_starts(), view_pos) - 1, 0)
        piece = self.pieces[idx]
        return piece.raw + (view_pos - piece.view)

    def to_view(self, raw_pos: int) -> int | None:
        """View offset of a raw position, or None when it is hidden."""
        for piece in self.pieces:
            if piece.raw <= raw_pos < piece.raw_end:
                return piece.view + (raw_pos - piece.raw)
        return None

    def _view_starts(self) -> list[int]:
        return [p.view for p in self.pieces]

    def project_params(self) -> dict:
        return {
            "snippet": self.snippet,
            "fragment_state": self.fragment_state,
            "strip_markers": self.strip_markers,
        }


def _merge_ranges(ranges: Iterable[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[tuple[int, int]] = []
    for s, e in sorted(r for r in ranges if r[0] < r[1]):
        if merged and s <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], e))
        else:
            merged.append((s, e))
    return merged


def project(
    text: str,
    syntax: LanguageSyntax,
    *,
    snippet: str | None = None,
    fragment_state: Mapping[int, int] | None = None,
    strip_markers: bool = True,
    scan: SourceScan | None = None,
) -> Projection:
    """Project a raw source into a view.

    snippet selects a named slice (None for the whole document).  With
    strip_markers, marker lines are hidden.  fragment_state maps
    fragment index to active variant; when given, each construct shows
    only that variant's text and all its comment scaffolding is hidden.
    fragment_state=None leaves constructs exactly as written, which is
    how documents are synchronized between server and clients; the
    final variant projection happens at the rendering side with the
    same machinery.

    Scanning is lenient here: constructs that are malformed (say,
    mid-edit) stay visible as plain comments instead of failing the
    projection.
    """
    if scan is None:
        scan = scan_source(text, syntax, strict=False)
    if snippet is None:
        lo, hi = 0, len(text)
    else:
        sd = scan.snippet(snippet)
        lo, hi = sd.begin_offset, sd.end_offset

    hidden: list[tuple[int, int]] = []
    marker_line_starts: set[int] = set()
    variant_entry_gaps: set[int] = set()
    if strip_markers:
        for m in scan.markers:
            hidden.append((m.line_start, m.line_end))
            marker_line_starts.add(m.line_start)
    if fragment_state is not None:
        for idx, frag in enumerate(scan.fragments):
            active = fragment_state.get(idx, 0)
            active = max(0, min(len(frag.variants) - 1, active))
            keep = _merge_ranges(frag.variants[active].pieces)
            pos = frag.whole_range[0]
            for s, e in keep:
                hidden.append((pos, s))
                if pos < s:
                    variant_entry_gaps.add(pos)
                pos = e
            hidden.append((pos, frag.whole_range[1]))

    pieces: list[Piece] = []
    parts: list[str] = []
    view = 0
    pos = lo
    for s, e in _merge_ranges(hidden):
        if e <= lo or s >= hi:
            continue
        s, e = max(s, lo), min(e, hi)
        if s > pos:
            pieces.append(Piece(view, pos, s - pos))
            parts.append(text[pos:s])
            view += s - pos
        pos = max(pos, e)
    if pos < hi:
        pieces.append(Piece(view, pos, hi - pos))
        parts.append(text[pos:hi])
    return Projection(
        raw_text=text,
        text="".join(parts),
        pieces=pieces,
        range=(lo, hi),
        syntax=syntax,
        snippet=snippet,
        fragment_state=dict(fragment_state) if fragment_state is not None else None,
        strip_markers=strip_markers,
        scan=scan,
        marker_line_starts=frozenset(marker_line_starts),
        variant_entry_gaps=frozenset(variant_entry_gaps),
    )


# ---------------------------------------------------------------------------
# Edit translation


def map_view_edit(proj: Projection, view_op: Operation) -> Operation:
    """Translate a view operation into a raw-document operation.

    The result applies to the full raw text and produces, after
    re-projection, exactly the text view_op produces on the view.
    Insertions at hidden-range boundaries attach to the visible side;
    when that would drag text onto a stripped marker line the insertion
    attaches to the other side instead, and appending at the very end
    of a snippet adds a newline to keep the end marker on its own line.

    Raises EditRejected when no translation survives re-projection.
    """
    if view_op.base_length != len(proj.text):
        raise LengthMismatch(
            f"view operation base {view_op.base_length} != view length {len(proj.text)}"
        )
    expected = view_op.apply(proj.text)
    # Candidate translations, tried in order: boundary insertions
    # attaching left, attaching right, and deletions processed before
    # the insertion at the same point (for line replacements ending at
    # a hidden marker line).
    plans = [
        (view_op.ops, 0),
        (view_op.ops, 1),
        (_deletes_first(view_op.ops), 0),
    ]
    for ops, anchor_strategy in plans:
        candidate = _walk_view_edit(proj, ops, anchor_strategy)
        try:
            new_raw = candidate.apply(proj.raw_text)
            reprojected = project(new_raw, proj.syntax, **proj.project_params())
        except SnippetError:
            continue
        if reprojected.text == expected:
            return candidate
    raise EditRejected("view edit does not survive re-projection")


def _deletes_first(ops: Sequence) -> list:
    """Swap adjacent insert/delete pairs (equal effect, delete first)."""
    out = list(ops)
    i = 0
    while i + 1 < len(out):
        if isinstance(out[i], str) and isinstance(out[i + 1], int) and out[i + 1] < 0:
            out[i], out[i + 1] = out[i + 1], out[i]
            i += 2
        else:
            i += 1
    return out


def _walk_view_edit(proj: Projection, components: Sequence, strategy: int) -> Operation:
    pieces = proj.pieces
    out = Operation()
    raw_pos = 0
    v = 0
    pi = 0  # piece index of the cursor
    off = 0  # offset within pieces[pi]

    def advance_to(target: int) -> None:
        nonlocal raw_pos
        if target > raw_pos:
            out.retain(target - raw_pos)
            raw_pos = target

    def normalize() -> None:
        nonlocal pi, off
        while pi < len(pieces) and off >= pieces[pi].length:
            off -= pieces[pi].length
            pi += 1

    for comp in components:
        if isinstance(comp, str):
            anchor, suffix = _insert_anchor(proj, v, pi, off, strategy)
            advance_to(anchor)
            out.insert(comp + suffix)
        elif comp > 0:
            v += comp
            off += comp
            normalize()
        else:
            n = -comp
            v += n
            while n > 0:
                piece = pieces[pi]
                take = min(n, piece.length - off)
                start = piece.raw + off
                advance_to(start)
                out.delete(take)
                raw_pos = start + take
                off += take
                n -= take
                normalize()
    advance_to(len(proj.raw_text))
    return out


def _insert_anchor(
    proj: Projection, v: int, pi: int, off: int, strategy: int
) -> tuple[int, str]:
    pieces = proj.pieces
    if not pieces:
        anchor = proj.range[0]
    elif v == 0:
        anchor = pieces[0].raw
    elif off > 0:
        anchor = pieces[pi].raw + off
    elif strategy == 1 and pi < len(pieces):
        return pieces[pi].raw, ""
    else:
        anchor = pieces[pi - 1].raw_end if pi > 0 else pieces[0].raw
        if anchor in proj.variant_entry_gaps and pi < len(pieces):
            # The gap ahead is fragment scaffolding; land inside the
            # active variant, not in front of the whole construct.
            return pieces[pi].raw, ""
    if anchor in proj.marker_line_starts:
        if pi < len(pieces):
            return pieces[pi].raw, ""
        return anchor, "\n"
    return anchor, ""


def map_raw_edit(proj: Projection, raw_op: Operation) -> Operation:
    """Translate a raw-document operation into view coordinates.

    Changes to hidden text vanish; an insertion is attributed to the
    view when it touches a visible run (inside it or at either end).
    The result is a best-effort prediction: callers compare its outcome
    against a fresh projection and fall back to resynchronizing the
    whole view when document structure changed.
    """
    if raw_op.base_length != len(proj.raw_text):
        raise LengthMismatch(
            f"raw operation base {raw_op.base_length} != raw length {len(proj.raw_text)}"
        )
    pieces = proj.pieces
    out = Operation()
    r = 0

    def visible_insert(pos: int) -> bool:
        for piece in pieces:
            if piece.raw <= pos <= piece.raw_end:
                return True
            if piece.raw > pos:
                break
        return False

    def overlap(a: int, b: int) -> int:
        total = 0
        for piece in pieces:
            total += max(0, min(b, piece.raw_end) - max(a, piece.raw))
        return total

    for comp in raw_op.ops:
        if isinstance(comp, str):
            if visible_insert(r):
                out.insert(comp)
        elif comp > 0:
            out.retain(overlap(r, r + comp))
            r += comp
        else:
            n = -comp
            out.delete(overlap(r, r + n))
            r += n
    return out


def map_annotations(proj: Projection, annotations: Iterable[Annotation]) -> list[Annotation]:
    """Carry raw-coordinate annotations over to view coordinates.

    Diagnostics (error/warning/info) are clipped to the visible text
    and split at hidden gaps, so a problem inside a snippet never
    disappears just because part of its range is scaffolding.  Token
    classifications are kept only when their whole range is visible in
    one run; a partially hidden token span would color text the viewer
    reads differently (e.g. comment scaffolding around a live variant).
    """
    out: list[Annotation] = []
    for ann in annotations:
        if ann.start == ann.end:
            pos = proj.to_view(ann.start)
            if pos is not None:
                out.append(Annotation(pos, pos, ann.kind, ann.message, ann.cls))
            continue
        parts: list[tuple[int, int]] = []
        for piece in proj.pieces:
            s = max(ann.start, piece.raw)
            e = min(ann.end, piece.raw_end)
            if s < e:
                parts.append((piece.view + s - piece.raw, piece.view + e - piece.raw))
        if not parts:
            continue
        if ann.kind == "token":
            covered = sum(e - s for s, e in parts)
            if len(parts) == 1 and covered == ann.end - ann.start:
                s, e = parts[0]
                out.append(Annotation(s, e, ann.kind, ann.message, ann.cls))
            continue
        for s, e in parts:
            out.append(Annotation(s, e, ann.kind, ann.message, ann.cls))
    return out
