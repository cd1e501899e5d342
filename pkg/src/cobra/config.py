"""Configuration parsing, defaults resolution, and live reload.

Presentations are configured by a ``cobra.conf`` file written in a
HOCON-style syntax: ``key = value`` or ``key: value`` assignments,
dotted paths, nested objects with braces, and ``#`` / ``//`` line
comments.  Substitutions, includes, and value concatenation are not
supported; plain key/value settings cover everything a presentation
needs.

All settings have built-in defaults (see ``REFERENCE_CONF``), so an
empty or missing configuration file yields a fully usable setup.
"""

from __future__ import annotations

import asyncio
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Awaitable, Callable, Iterator, Mapping

from .languages import REGISTRY

__all__ = [
    "ConfigError",
    "ConfigSyntaxError",
    "PathConflict",
    "TypeMismatch",
    "ConfigTree",
    "Settings",
    "SettingChange",
    "REFERENCE_CONF",
    "parse_config",
    "defaults_tree",
    "resolve",
    "diff_settings",
    "load_config",
    "load_settings",
    "watch_config",
]


class ConfigError(Exception):
    """Base class for configuration problems."""


class ConfigSyntaxError(ConfigError):
    """A malformed configuration file, with position information."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class PathConflict(ConfigError):
    """A scalar setting was reopened as an object (or vice versa)."""

    def __init__(self, path: str):
        super().__init__(f"cannot treat setting {path!r} as an object")
        self.path = path


class TypeMismatch(ConfigError):
    """A setting has a value of the wrong type."""

    def __init__(self, path: str, expected: str, found: object):
        super().__init__(f"setting {path!r} expects {expected}, got {found!r}")
        self.path = path
        self.expected = expected
        self.found = found


# ---------------------------------------------------------------------------
# Configuration trees


@dataclass
class ConfigTree:
    """A nested map of settings, scalars at the leaves."""

    root: dict[str, Any] = field(default_factory=dict)
    source: str = "defaults"

    def get(self, path: str) -> Any:
        """Value at a dotted path, or None when absent."""
        node: Any = self.root
        for seg in path.split("."):
            if not isinstance(node, dict) or seg not in node:
                return None
            node = node[seg]
        return node

    def paths(self) -> Iterator[tuple[str, Any]]:
        """All (dotted path, scalar) leaves, in insertion order."""

        def walk(node: dict[str, Any], prefix: str) -> Iterator[tuple[str, Any]]:
            for key, value in node.items():
                path = f"{prefix}.{key}" if prefix else key
                if isinstance(value, dict):
                    yield from walk(value, path)
                else:
                    yield path, value

        return walk(self.root, "")

    def set(self, segments: list[str], value: Any) -> None:
        """Assign a scalar or merge an object at a path.

        Later assignments override earlier ones; objects merge into
        existing objects.  Descending through an existing scalar is a
        PathConflict.
        """
        node = self.root
        for i, seg in enumerate(segments[:-1]):
            child = node.setdefault(seg, {})
            if not isinstance(child, dict):
                raise PathConflict(".".join(segments[: i + 1]))
            node = child
        last = segments[-1]
        existing = node.get(last)
        if isinstance(value, dict):
            if existing is not None and not isinstance(existing, dict):
                raise PathConflict(".".join(segments))
            target = node.setdefault(last, {})
            _merge_into(target, value)
        else:
            node[last] = value


def _merge_into(target: dict[str, Any], extra: dict[str, Any]) -> None:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _merge_into(target[key], value)
        else:
            target[key] = value if not isinstance(value, dict) else dict(value)


# ---------------------------------------------------------------------------
# Parser

_INT_RE = re.compile(r"[+-]?\d+$")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_ESCAPES = {'"': '"', "\\": "\\", "/": "/", "n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    # -- position bookkeeping

    def _where(self, pos: int | None = None) -> tuple[int, int]:
        p = self.pos if pos is None else pos
        line = self.text.count("\n", 0, p) + 1
        col = p - (self.text.rfind("\n", 0, p) + 1) + 1
        return line, col

    def fail(self, message: str, pos: int | None = None) -> ConfigSyntaxError:
        line, col = self._where(pos)
        return ConfigSyntaxError(line, col, message)

    # -- character-level helpers

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def at_comment(self) -> bool:
        return self.peek() == "#" or self.text.startswith("//", self.pos)

    def skip_blank(self, *, newlines: bool) -> None:
        """Skip whitespace and comments; optionally stop at newlines."""
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == "\n" and not newlines:
                return
            if c in " \t\r\n" or (c == "," and newlines):
                self.pos += 1
            elif self.at_comment():
                end = self.text.find("\n", self.pos)
                self.pos = len(self.text) if end == -1 else end
            else:
                return

    # -- grammar

    def parse(self, tree: ConfigTree) -> ConfigTree:
        self.skip_blank(newlines=True)
        while self.pos < len(self.text):
            self.entry(tree, [])
            self.skip_blank(newlines=True)
        return tree

    def entry(self, tree: ConfigTree, prefix: list[str]) -> None:
        segments = prefix + self.key_path()
        self.skip_blank(newlines=False)
        c = self.peek()
        if c == "{":
            tree.set(segments, self.object_value(segments))
            return
        if c in "=:":
            self.pos += 1
            self.skip_blank(newlines=False)
            if self.peek() == "{":
                tree.set(segments, self.object_value(segments))
            else:
                tree.set(segments, self.scalar_value())
            return
        raise self.fail("expected '=', ':' or '{' after setting name")

    def key_path(self) -> list[str]:
        segments = [self.key_segment()]
        while self.peek() == ".":
            self.pos += 1
            segments.append(self.key_segment())
        return segments

    def key_segment(self) -> str:
        if self.peek() == '"':
            return self.quoted_string()
        start = self.pos
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in ' \t\r\n=:.{}#,"' or self.at_comment():
                break
            self.pos += 1
        if self.pos == start:
            raise self.fail("expected a setting name")
        return self.text[start : self.pos]

    def object_value(self, segments: list[str]) -> dict[str, Any]:
        open_pos = self.pos
        self.pos += 1  # past "{"
        sub = ConfigTree()
        self.skip_blank(newlines=True)
        while True:
            if self.pos >= len(self.text):
                raise self.fail("unterminated '{'", open_pos)
            if self.peek() == "}":
                self.pos += 1
                return sub.root
            self.entry(sub, [])
            self.skip_blank(newlines=True)

    def scalar_value(self) -> Any:
        if self.peek() == '"':
            return self.quoted_string()
        start = self.pos
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c in "\n}," or self.at_comment():
                break
            self.pos += 1
        raw = self.text[start : self.pos].strip()
        if not raw:
            raise self.fail("expected a value", start)
        if raw in ("true", "yes", "on"):
            return True
        if raw in ("false", "no", "off"):
            return False
        if _INT_RE.match(raw):
            return int(raw)
        if _FLOAT_RE.match(raw):
            return float(raw)
        return raw

    def quoted_string(self) -> str:
        open_pos = self.pos
        self.pos += 1
        out: list[str] = []
        while self.pos < len(self.text):
            c = self.text[self.pos]
            if c == '"':
                self.pos += 1
                return "".join(out)
            if c == "\n":
                break
            if c == "\\":
                self.pos += 1
                esc = self.peek()
                if esc == "u":
                    code = self.text[self.pos + 1 : self.pos + 5]
                    if len(code) < 4:
                        raise self.fail("bad unicode escape", self.pos - 1)
                    try:
                        out.append(chr(int(code, 16)))
                    except ValueError:
                        raise self.fail("bad unicode escape", self.pos - 1) from None
                    self.pos += 5
                    continue
                if esc not in _ESCAPES:
                    raise self.fail(f"unknown escape \\{esc}", self.pos - 1)
                out.append(_ESCAPES[esc])
                self.pos += 1
                continue
            out.append(c)
            self.pos += 1
        raise self.fail("unterminated string", open_pos)


def parse_config(text: str, *, source: str = "<config>") -> ConfigTree:
    """Parse configuration text into a tree.

    Later assignments to the same path win; assigning through an
    existing scalar raises PathConflict; malformed input raises
    ConfigSyntaxError with line and column.
    """
    return _Parser(text).parse(ConfigTree(source=source))


# ---------------------------------------------------------------------------
# Defaults and resolution

REFERENCE_CONF = """\
# Built-in defaults.  Every setting here can be overridden in the
# cobra.conf of a presentation directory.

title = "New Presentation"

# Main language of the presentation (demo, isabelle, scala, haskell).
language = demo

theme {
  # Style sheet used for the slides.
  slides = white
  # Style sheet used for code snippets.
  code = idea
}

binding {
  # Network interface the server listens on.  Unlike every other
  # setting, changing this requires a restart.
  interface = localhost
  # Port under which the server will be available.
  port = 8080
}

reveal {
  # Default transition between slides (e.g. slide, fade, none).
  transition = slide
}

show {
  # Display informational / warning annotations from assistants.
  infos = true
  warnings = true
}

# Environment variables passed to language assistants, e.g.
#   env.isabelle_home = /opt/isabelle
env {
}
"""

_DEFAULTS: ConfigTree | None = None


def defaults_tree() -> ConfigTree:
    """The built-in defaults, parsed once."""
    global _DEFAULTS
    if _DEFAULTS is None:
        _DEFAULTS = parse_config(REFERENCE_CONF, source="defaults")
    return _DEFAULTS


@dataclass(frozen=True)
class Settings:
    """Fully resolved presentation settings."""

    title: str
    language: str
    theme_slides: str
    theme_code: str
    binding_interface: str
    binding_port: int
    reveal_transition: str
    env: Mapping[str, str]
    show_infos: bool
    show_warnings: bool


def _lookup(user: ConfigTree, defaults: ConfigTree, path: str) -> Any:
    value = user.get(path)
    return defaults.get(path) if value is None else value


def _string(user: ConfigTree, defaults: ConfigTree, path: str) -> str:
    value = _lookup(user, defaults, path)
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise TypeMismatch(path, "a string", value)
    return str(value)


def _boolean(user: ConfigTree, defaults: ConfigTree, path: str) -> bool:
    value = _lookup(user, defaults, path)
    if not isinstance(value, bool):
        raise TypeMismatch(path, "a boolean", value)
    return value


def _port(user: ConfigTree, defaults: ConfigTree, path: str) -> int:
    value = _lookup(user, defaults, path)
    if isinstance(value, bool) or not isinstance(value, int):
        raise TypeMismatch(path, "a port number", value)
    if not 1 <= value <= 65535:
        raise TypeMismatch(path, "a port between 1 and 65535", value)
    return value


def _env_map(tree: ConfigTree) -> dict[str, str]:
    env = tree.get("env")
    if env is None:
        return {}
    if not isinstance(env, dict):
        raise TypeMismatch("env", "an object", env)
    out: dict[str, str] = {}
    sub = ConfigTree(root=env)
    for path, value in sub.paths():
        if isinstance(value, bool):
            out[path] = "true" if value else "false"
        else:
            out[path] = str(value)
    return out


def resolve(
    user: ConfigTree, defaults: ConfigTree | None = None
) -> tuple[Settings, list[str]]:
    """Resolve a user tree against defaults into typed settings.

    Returns the settings plus warnings for unknown keys.  Keys under
    ``env.`` pass through verbatim as assistant environment variables;
    any other key not present in the defaults is ignored with a
    warning.
    """
    if defaults is None:
        defaults = defaults_tree()
    language = _string(user, defaults, "language")
    if language and language not in REGISTRY:
        raise TypeMismatch("language", "a registered language id", language)
    settings = Settings(
        title=_string(user, defaults, "title"),
        language=language,
        theme_slides=_string(user, defaults, "theme.slides"),
        theme_code=_string(user, defaults, "theme.code"),
        binding_interface=_string(user, defaults, "binding.interface"),
        binding_port=_port(user, defaults, "binding.port"),
        reveal_transition=_string(user, defaults, "reveal.transition"),
        env=_env_map(user),
        show_infos=_boolean(user, defaults, "show.infos"),
        show_warnings=_boolean(user, defaults, "show.warnings"),
    )
    warnings = [
        f"unknown setting: {path}"
        for path, _ in user.paths()
        if not path.startswith("env.") and defaults.get(path) is None
    ]
    return settings, warnings


# ---------------------------------------------------------------------------
# Change detection


@dataclass(frozen=True)
class SettingChange:
    """One changed setting; hot changes apply without a restart."""

    path: str
    old: Any
    new: Any
    hot: bool = True


_FIELD_PATHS = [
    ("title", "title"),
    ("language", "language"),
    ("theme_slides", "theme.slides"),
    ("theme_code", "theme.code"),
    ("binding_interface", "binding.interface"),
    ("binding_port", "binding.port"),
    ("reveal_transition", "reveal.transition"),
    ("env", "env"),
    ("show_infos", "show.infos"),
    ("show_warnings", "show.warnings"),
]


def diff_settings(old: Settings, new: Settings) -> list[SettingChange]:
    """Changed settings between two resolutions.

    Every change is hot-reloadable except the network interface, which
    cannot be switched while the server is running.
    """
    changes: list[SettingChange] = []
    for attr, path in _FIELD_PATHS:
        a, b = getattr(old, attr), getattr(new, attr)
        if a != b:
            changes.append(SettingChange(path, a, b, hot=path != "binding.interface"))
    return changes


# ---------------------------------------------------------------------------
# Loading and watching files

CONFIG_NAME = "cobra.conf"


def load_config(path: Path) -> ConfigTree:
    """Parse a configuration file; a missing file is an empty tree."""
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return ConfigTree(source=str(path))
    return parse_config(text, source=str(path))


def load_settings(directory: Path) -> tuple[Settings, list[str]]:
    """Resolved settings for a presentation directory."""
    return resolve(load_config(directory / CONFIG_NAME))


def _mtime(path: Path) -> float | None:
    try:
        return os.stat(path).st_mtime
    except OSError:
        return None


async def watch_config(
    path: Path,
    on_change: Callable[[Settings, list[str]], Awaitable[None] | None],
    *,
    interval: float = 0.5,
    on_error: Callable[[ConfigError], None] | None = None,
) -> None:
    """Poll a configuration file and publish re-resolved settings.

    Runs until cancelled.  A change that fails to parse or resolve is
    reported through on_error (when given) and otherwise ignored, so a
    half-saved file never takes down a running presentation.
    """
    last = _mtime(path)
    while True:
        await asyncio.sleep(interval)
        current = _mtime(path)
        if current == last:
            continue
        last = current
        try:
            settings, warnings = resolve(load_config(path))
        except ConfigError as exc:
            if on_error is not None:
                on_error(exc)
            continue
        result = on_change(settings, warnings)
        if asyncio.iscoroutine(result):
            await result
