"""Comment syntax descriptions for the supported source languages.

Snippet markers and fragment constructs live inside comments, so the
only thing the code machinery needs to know about a language is how its
comments work: the block delimiters, whether blocks nest, and the line
comment leader if there is one.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class LanguageSyntax:
    """Comment structure of one language."""

    language_id: str
    block_open: str
    block_close: str
    line_comment: str | None
    nesting: bool

    @property
    def fragment_open(self) -> str:
        """Atomic comment token opening a fragment construct.

        The sequence block_open + "(" + block_close is treated as one
        indivisible comment.  For languages with nesting comments a
        plain left-to-right scan would misread it (the embedded "("
        next to "*" looks like another opener), so it is matched before
        ordinary comment scanning.
        """
        return self.block_open + "(" + self.block_close

    @property
    def fragment_close(self) -> str:
        """Atomic comment token closing a fragment construct."""
        return self.block_open + ")" + self.block_close


ISABELLE = LanguageSyntax("isabelle", "(*", "*)", None, nesting=True)
SCALA = LanguageSyntax("scala", "/*", "*/", "//", nesting=False)
HASKELL = LanguageSyntax("haskell", "{-", "-}", "--", nesting=True)

# The demo language: C-style comments, no semantics beyond what the
# demo assistant computes.  Used by generated starter presentations.
DEMO = LanguageSyntax("demo", "/*", "*/", "//", nesting=False)

REGISTRY: dict[str, LanguageSyntax] = {
    s.language_id: s for s in (ISABELLE, SCALA, HASKELL, DEMO)
}

EXTENSIONS: dict[str, str] = {
    ".thy": "isabelle",
    ".scala": "scala",
    ".sc": "scala",
    ".hs": "haskell",
    ".lhs": "haskell",
    ".demo": "demo",
}


def by_id(language_id: str) -> LanguageSyntax | None:
    return REGISTRY.get(language_id)


def for_filename(name: str) -> LanguageSyntax | None:
    """Language syntax inferred from a file name's extension."""
    dot = name.rfind(".")
    if dot == -1:
        return None
    lang = EXTENSIONS.get(name[dot:].lower())
    return REGISTRY.get(lang) if lang else None
