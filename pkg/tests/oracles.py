"""Independent reference models used by the test suite.

Everything here is deliberately naive: list splices, line scans,
character-at-a-time state machines.  The point is that these models are
simple enough to trust by inspection, so the production code can be
checked against them on randomized inputs.
"""

from __future__ import annotations

import random


class SpliceDoc:
    """A document as a list of characters edited by direct splicing."""

    def __init__(self, text: str) -> None:
        self.chars = list(text)

    def insert(self, pos: int, text: str) -> None:
        self.chars[pos:pos] = list(text)

    def delete(self, pos: int, count: int) -> None:
        del self.chars[pos : pos + count]

    @property
    def text(self) -> str:
        return "".join(self.chars)


def apply_components(text: str, components: list) -> str:
    """Apply retain/insert/delete components by splicing.

    Components use the same encoding as Operation.ops: positive int
    retain, negative int delete, string insert.
    """
    doc = SpliceDoc(text)
    pos = 0
    for c in components:
        if isinstance(c, str):
            doc.insert(pos, c)
            pos += len(c)
        elif c > 0:
            pos += c
        else:
            doc.delete(pos, -c)
    assert pos == len(doc.chars), "components did not cover the text"
    return doc.text


def random_edit(rng: random.Random, text: str, alphabet: str = "abXY \n") -> list:
    """A random single-splice component list valid for text."""
    n = len(text)
    pos = rng.randrange(n + 1)
    if rng.random() < 0.5 and pos < n:
        count = rng.randint(1, min(4, n - pos))
        return [pos, -count, n - pos - count]
    word = "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 4)))
    return [pos, word, n - pos]


def random_operation(rng: random.Random, base: str, alphabet: str = "abXY \n"):
    """A random multi-component operation over base, as a component list."""
    components: list = []
    pos = 0
    n = len(base)
    while pos < n:
        kind = rng.random()
        span = rng.randint(1, min(5, n - pos))
        if kind < 0.5:
            components.append(span)
        elif kind < 0.8:
            components.append(-span)
        else:
            components.append("".join(rng.choice(alphabet) for _ in range(rng.randint(1, 3))))
            components.append(span)
        pos += span
    if rng.random() < 0.3:
        components.append("".join(rng.choice(alphabet) for _ in range(rng.randint(1, 3))))
    return components
