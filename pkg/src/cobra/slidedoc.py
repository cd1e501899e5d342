"""Slide document model: parsing slides.html and rendering the page.

A presentation is written as a headerless HTML fragment: top-level
``section`` elements are slides, sections nested one level deeper are
vertically arranged slides, and ``code`` elements become editable code
snippets.  Everything else passes through verbatim.  This module
parses that fragment into a deck model, splits ``$``-delimited math in
text, resolves code references, and generates the complete HTML
document the server serves.

The parser is a small tolerant tokenizer rather than a full HTML tree
builder: the input dialect is constrained, and ``code`` content must
be captured verbatim including ``<`` characters, so inside ``code``
only the literal sequence ``</code`` ends the element.
"""

from __future__ import annotations

import html as _html
import json
import re
from dataclasses import dataclass, field
from typing import Callable, Collection, Iterator, Union

from .config import Settings
from .languages import REGISTRY, for_filename

__all__ = [
    "SlideError",
    "ParseError",
    "StructureError",
    "UnresolvedSnippet",
    "MissingFile",
    "Element",
    "TextNode",
    "CommentNode",
    "CodeBlock",
    "Slide",
    "Deck",
    "TextSpan",
    "MathSpan",
    "CodeRef",
    "parse_slides",
    "split_math",
    "collect_code_refs",
    "render_boilerplate",
]


class SlideError(Exception):
    """Base class for slide document problems."""


class ParseError(SlideError):
    """Malformed slide markup, with position information."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class StructureError(ParseError):
    """Slide structure violates the two-level section model."""


class UnresolvedSnippet(SlideError):
    """A code element references a snippet name that does not exist."""

    def __init__(self, name: str):
        super().__init__(f"no snippet named {name!r}")
        self.name = name


class MissingFile(SlideError):
    """A code element references a source file that does not exist."""

    def __init__(self, path: str):
        super().__init__(f"source file not found: {path}")
        self.path = path


# ---------------------------------------------------------------------------
# Document model

Attrs = list[tuple[str, Union[str, None]]]


@dataclass
class TextNode:
    text: str


@dataclass
class CommentNode:
    text: str


@dataclass
class Element:
    tag: str
    attrs: Attrs = field(default_factory=list)
    children: list = field(default_factory=list)
    self_closing: bool = False

    @property
    def classes(self) -> list[str]:
        return _attr_classes(self.attrs)


@dataclass
class CodeBlock:
    """An editable code element.

    The id is a stable synchronization key: ``inline-<n>`` for inline
    blocks in document order, ``file-<path>`` for external sources,
    ``snip-<name>`` for snippet references.  Exactly one of src or
    inline_text provides the content.
    """

    id: str
    language: str | None
    src: str | None
    snippet: str | None
    classes: frozenset[str]
    inline_text: str | None
    attrs: Attrs = field(default_factory=list)


@dataclass
class Slide:
    attrs: Attrs = field(default_factory=list)
    children: list = field(default_factory=list)
    vertical_children: list["Slide"] = field(default_factory=list)

    @property
    def classes(self) -> list[str]:
        return _attr_classes(self.attrs)


@dataclass
class Deck:
    slides: list[Slide] = field(default_factory=list)
    hidden_code: list[CodeBlock] = field(default_factory=list)
    all_code: list[CodeBlock] = field(default_factory=list)


def _attr_classes(attrs: Attrs) -> list[str]:
    for name, value in attrs:
        if name == "class" and value:
            return value.split()
    return []


# ---------------------------------------------------------------------------
# Tokenizer

_NAME_RE = re.compile(r"[a-zA-Z][a-zA-Z0-9-]*")
_VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)


@dataclass
class _Tag:
    name: str
    attrs: Attrs
    self_closing: bool
    closing: bool
    pos: int


class _Tokenizer:
    """Yields text, comment, and tag tokens from a slide fragment."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def where(self, pos: int | None = None) -> tuple[int, int]:
        p = self.pos if pos is None else pos
        line = self.text.count("\n", 0, p) + 1
        col = p - (self.text.rfind("\n", 0, p) + 1) + 1
        return line, col

    def fail(self, message: str, pos: int | None = None) -> ParseError:
        line, col = self.where(pos)
        return ParseError(line, col, message)

    def tokens(self) -> Iterator[object]:
        text = self.text
        while self.pos < len(text):
            lt = text.find("<", self.pos)
            if lt == -1:
                yield TextNode(_html.unescape(text[self.pos :]))
                self.pos = len(text)
                return
            if lt > self.pos:
                yield TextNode(_html.unescape(text[self.pos : lt]))
                self.pos = lt
            token = self._angle()
            if token is not None:
                yield token

    def _angle(self) -> object:
        text = self.text
        start = self.pos
        if text.startswith("<!--", start):
            end = text.find("-->", start + 4)
            if end == -1:
                self.pos = len(text)
                return CommentNode(text[start + 4 :])
            self.pos = end + 3
            return CommentNode(text[start + 4 : end])
        if text.startswith("<!", start) or text.startswith("<?", start):
            end = text.find(">", start)
            self.pos = len(text) if end == -1 else end + 1
            return None
        closing = text.startswith("</", start)
        name_pos = start + (2 if closing else 1)
        m = _NAME_RE.match(text, name_pos)
        if m is None:
            # Not actually a tag ("a < b"); emit the "<" as text.
            self.pos = start + 1
            return TextNode("<")
        name = m.group().lower()
        self.pos = m.end()
        attrs, self_closing = self._attrs(start)
        if closing and attrs:
            attrs = []  # attributes on end tags carry no meaning
        return _Tag(name, attrs, self_closing, closing, start)

    def _attrs(self, tag_start: int) -> tuple[Attrs, bool]:
        text = self.text
        attrs: Attrs = []
        while True:
            while self.pos < len(text) and text[self.pos] in " \t\r\n":
                self.pos += 1
            if self.pos >= len(text):
                raise self.fail("unterminated tag", tag_start)
            c = text[self.pos]
            if c == ">":
                self.pos += 1
                return attrs, False
            if c == "/" and text.startswith("/>", self.pos):
                self.pos += 2
                return attrs, True
            name_start = self.pos
            while self.pos < len(text) and text[self.pos] not in " \t\r\n=/>\"'":
                self.pos += 1
            if self.pos == name_start:
                raise self.fail("malformed attribute", self.pos)
            name = text[name_start : self.pos].lower()
            while self.pos < len(text) and text[self.pos] in " \t\r\n":
                self.pos += 1
            if self.pos < len(text) and text[self.pos] == "=":
                self.pos += 1
                attrs.append((name, self._attr_value()))
            else:
                attrs.append((name, None))

    def _attr_value(self) -> str:
        text = self.text
        while self.pos < len(text) and text[self.pos] in " \t\r\n":
            self.pos += 1
        if self.pos >= len(text):
            raise self.fail("missing attribute value")
        c = text[self.pos]
        if c in "\"'":
            open_pos = self.pos
            end = text.find(c, self.pos + 1)
            if end == -1:
                raise self.fail("unterminated attribute value", open_pos)
            value = text[self.pos + 1 : end]
            self.pos = end + 1
            return _html.unescape(value)
        start = self.pos
        while self.pos < len(text) and text[self.pos] not in " \t\r\n>":
            self.pos += 1
        if self.pos == start:
            raise self.fail("missing attribute value", start)
        return _html.unescape(text[start : self.pos])

    def raw_text_until_close(self, tag: str) -> str:
        """Verbatim content up to ``</tag``; consumes the end tag."""
        lower = self.text.lower()
        end = lower.find("</" + tag, self.pos)
        if end == -1:
            raw = self.text[self.pos :]
            self.pos = len(self.text)
            return raw
        raw = self.text[self.pos : end]
        gt = self.text.find(">", end)
        self.pos = len(self.text) if gt == -1 else gt + 1
        return raw


# ---------------------------------------------------------------------------
# Deck construction


def parse_slides(text: str) -> Deck:
    """Parse a headerless slides fragment into a deck.

    Top-level sections become slides and directly nested sections
    become vertical slides; a third section level raises
    StructureError.  ``code`` elements anywhere become CodeBlock
    nodes; a top-level code element (outside all sections) lands in
    hidden_code.  Unknown tags pass through as opaque elements.
    """
    tok = _Tokenizer(text)
    deck = Deck()
    stack: list[tuple[object, int]] = []  # (node, open position)
    inline_count = 0

    def current_children() -> list | None:
        return stack[-1][0].children if stack else None

    def section_depth() -> int:
        return sum(
            1
            for node, _ in stack
            if isinstance(node, Slide)
            or (isinstance(node, Element) and node.tag == "section")
        )

    def place(node: object) -> None:
        children = current_children()
        if children is not None:
            children.append(node)

    for token in tok.tokens():
        if isinstance(token, TextNode):
            place(token)
            continue
        if isinstance(token, CommentNode):
            place(token)
            continue
        tag: _Tag = token
        if tag.closing:
            _close_tag(stack, tag)
            continue
        if tag.name == "code":
            raw = "" if tag.self_closing else tok.raw_text_until_close("code")
            block, inline_count = _make_code_block(tag.attrs, raw, inline_count)
            deck.all_code.append(block)
            if stack:
                place(block)
            else:
                deck.hidden_code.append(block)
            continue
        if tag.name == "section":
            depth = section_depth()
            if depth >= 2:
                line, col = tok.where(tag.pos)
                raise StructureError(line, col, "sections nest at most two levels")
            if depth == 0 and not stack:
                node = Slide(attrs=tag.attrs)
                deck.slides.append(node)
            elif depth == 1 and isinstance(stack[-1][0], Slide):
                node = Slide(attrs=tag.attrs)
                stack[-1][0].vertical_children.append(node)
            else:
                node = Element("section", tag.attrs)
                place(node)
            if not tag.self_closing:
                stack.append((node, tag.pos))
            continue
        node = Element(tag.name, tag.attrs, self_closing=tag.self_closing)
        place(node)
        if not tag.self_closing and tag.name not in _VOID_TAGS:
            stack.append((node, tag.pos))

    for node, pos in stack:
        if isinstance(node, Slide) or (
            isinstance(node, Element) and node.tag == "section"
        ):
            line, col = tok.where(pos)
            raise ParseError(line, col, "unclosed section")
    return deck


def _close_tag(stack: list[tuple[object, int]], tag: _Tag) -> None:
    for i in range(len(stack) - 1, -1, -1):
        node = stack[i][0]
        name = "section" if isinstance(node, Slide) else node.tag
        if name == tag.name:
            del stack[i:]
            return
    # Stray end tag: ignore.


def _make_code_block(attrs: Attrs, raw: str, inline_count: int) -> tuple[CodeBlock, int]:
    src = None
    for name, value in attrs:
        if name == "src" and value:
            src = value
            break
    classes = frozenset(_attr_classes(attrs))
    language = next((c for c in classes if c in REGISTRY), None)
    snippet = None
    path = None
    if src is None:
        inline_count += 1
        block_id = f"inline-{inline_count}"
        inline_text = raw
    elif src.startswith("#"):
        snippet = src[1:]
        block_id = f"snip-{snippet}"
        inline_text = None
    else:
        path = src.replace("\\", "/")
        if path.startswith("./"):
            path = path[2:]
        block_id = f"file-{path}"
        inline_text = None
        if language is None:
            syntax = for_filename(path)
            language = syntax.language_id if syntax else None
    return (
        CodeBlock(
            id=block_id,
            language=language,
            src=path,
            snippet=snippet,
            classes=classes,
            inline_text=inline_text,
            attrs=attrs,
        ),
        inline_count,
    )


# ---------------------------------------------------------------------------
# Math splitting


@dataclass(frozen=True)
class TextSpan:
    text: str


@dataclass(frozen=True)
class MathSpan:
    tex: str
    display: bool = False


def split_math(text: str) -> list[Union[TextSpan, MathSpan]]:
    """Split text into literal spans and ``$``-delimited math.

    ``$…$`` is inline math, ``$$…$$`` display math, ``\\$`` a literal
    dollar sign.  Unmatched or empty delimiters stay literal text;
    the function never fails.
    """
    out: list[Union[TextSpan, MathSpan]] = []
    current: list[str] = []

    def flush() -> None:
        if current:
            out.append(TextSpan("".join(current)))
            current.clear()

    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\" and i + 1 < n and text[i + 1] == "$":
            current.append("$")
            i += 2
            continue
        if c == "$":
            display = text.startswith("$$", i)
            delim = "$$" if display else "$"
            close = _find_closer(text, i + len(delim), delim)
            if close != -1 and close > i + len(delim):
                flush()
                out.append(MathSpan(text[i + len(delim) : close], display))
                i = close + len(delim)
                continue
            current.append("$")
            i += 1
            continue
        current.append(c)
        i += 1
    flush()
    return out


def _find_closer(text: str, start: int, delim: str) -> int:
    pos = start
    while True:
        pos = text.find(delim, pos)
        if pos == -1:
            return -1
        if pos > 0 and text[pos - 1] == "\\":
            pos += 1
            continue
        return pos


# ---------------------------------------------------------------------------
# Code references


@dataclass(frozen=True)
class CodeRef:
    """A code element's resolved content source."""

    id: str
    kind: str  # "inline" | "file" | "snippet"
    path: str | None = None
    snippet: str | None = None


def collect_code_refs(
    deck: Deck,
    *,
    snippets: Collection[str] | None = None,
    file_exists: Callable[[str], bool] | None = None,
) -> list[CodeRef]:
    """One reference per code element, in document order.

    When a snippet name collection or file lookup is supplied, unknown
    references raise UnresolvedSnippet / MissingFile.
    """
    refs: list[CodeRef] = []
    for block in deck.all_code:
        if block.snippet is not None:
            if snippets is not None and block.snippet not in snippets:
                raise UnresolvedSnippet(block.snippet)
            refs.append(CodeRef(block.id, "snippet", snippet=block.snippet))
        elif block.src is not None:
            if file_exists is not None and not file_exists(block.src):
                raise MissingFile(block.src)
            refs.append(CodeRef(block.id, "file", path=block.src))
        else:
            refs.append(CodeRef(block.id, "inline"))
    return refs


# ---------------------------------------------------------------------------
# Rendering

_CLIENT_PREFIX = "client"


def render_boilerplate(deck: Deck, settings: Settings) -> str:
    """The complete HTML document for a deck.

    Deterministic: the same deck and settings always produce the same
    bytes.  The document embeds the slides, theme links, a JSON boot
    configuration for the client, and the client script include.
    Math in text nodes is rewritten to ``\\(…\\)`` / ``\\[…\\]``.
    """
    out: list[str] = []
    out.append("<!doctype html>")
    out.append('<html lang="en">')
    out.append("<head>")
    out.append('<meta charset="utf-8">')
    out.append(
        '<meta name="viewport" content="width=device-width, initial-scale=1">'
    )
    out.append(f"<title>{_html.escape(settings.title)}</title>")
    out.append(_stylesheet(f"{_CLIENT_PREFIX}/cobra.css"))
    out.append(_stylesheet(f"{_CLIENT_PREFIX}/theme/{settings.theme_slides}.css"))
    out.append(_stylesheet(f"{_CLIENT_PREFIX}/code/{settings.theme_code}.css"))
    out.append("</head>")
    out.append("<body>")
    out.append('<div class="reveal"><div class="slides">')
    for slide in deck.slides:
        _render_slide(out, slide)
    out.append("</div></div>")
    for block in deck.hidden_code:
        _render_code(out, block)
    boot = json.dumps(_boot_config(deck, settings), sort_keys=True)
    out.append(
        f'<script id="boot-config" type="application/json">{boot}</script>'
    )
    out.append(f'<script type="module" src="{_CLIENT_PREFIX}/main.js"></script>')
    out.append("</body>")
    out.append("</html>")
    return "\n".join(out) + "\n"


def _stylesheet(href: str) -> str:
    return f'<link rel="stylesheet" href="{href}">'


def _render_attrs(attrs: Attrs) -> str:
    parts = []
    for name, value in attrs:
        if value is None:
            parts.append(f" {name}")
        else:
            parts.append(f' {name}="{_html.escape(value, quote=True)}"')
    return "".join(parts)


def _render_slide(out: list[str], slide: Slide) -> None:
    out.append(f"<section{_render_attrs(slide.attrs)}>")
    for child in slide.children:
        _render_node(out, child)
    for vertical in slide.vertical_children:
        _render_slide(out, vertical)
    out.append("</section>")


def _render_node(out: list[str], node: object) -> None:
    if isinstance(node, TextNode):
        out.append(_render_text(node.text))
    elif isinstance(node, CommentNode):
        out.append(f"<!--{node.text}-->")
    elif isinstance(node, CodeBlock):
        _render_code(out, node)
    elif isinstance(node, Slide):
        _render_slide(out, node)
    elif isinstance(node, Element):
        open_tag = f"<{node.tag}{_render_attrs(node.attrs)}"
        if node.self_closing:
            out.append(open_tag + "/>")
            return
        out.append(open_tag + ">")
        if node.tag not in _VOID_TAGS:
            for child in node.children:
                _render_node(out, child)
            out.append(f"</{node.tag}>")


def _render_text(text: str) -> str:
    parts = []
    for span in split_math(text):
        if isinstance(span, TextSpan):
            parts.append(_html.escape(span.text))
        elif span.display:
            parts.append(f"\\[{_html.escape(span.tex)}\\]")
        else:
            parts.append(f"\\({_html.escape(span.tex)}\\)")
    return "".join(parts)


def _render_code(out: list[str], block: CodeBlock) -> None:
    open_tag = f"<code{_render_attrs(block.attrs)}"
    text = _html.escape(block.inline_text) if block.inline_text else ""
    out.append(f"{open_tag}>{text}</code>")


def _boot_config(deck: Deck, settings: Settings) -> dict:
    documents = []
    for block in deck.all_code:
        entry: dict = {
            "id": block.id,
            "classes": sorted(block.classes),
            "language": block.language or settings.language,
        }
        if block.snippet is not None:
            entry["kind"] = "snippet"
            entry["snippet"] = block.snippet
        elif block.src is not None:
            entry["kind"] = "file"
            entry["path"] = block.src
        else:
            entry["kind"] = "inline"
        documents.append(entry)
    return {
        "documents": documents,
        "language": settings.language,
        "show_infos": settings.show_infos,
        "show_warnings": settings.show_warnings,
        "title": settings.title,
        "transition": settings.reveal_transition,
    }
