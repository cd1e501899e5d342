#!/usr/bin/env python3
"""Generate shared test vectors from the server implementation.

The browser client re-implements the wire codec, the operation algebra
and the fragment projection; these fixtures pin both sides to the same
bytes and the same strings.  Run from the frontend directory:

    python3 scripts/gen_vectors.py
"""

import json
import random
import string
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[2] / "src"))

from cobra import wire
from cobra.languages import HASKELL, ISABELLE, REGISTRY, SCALA
from cobra.snippets import EditRejected, map_view_edit, parse_fragments, project
from cobra.sync import Annotation, Operation

OUT_DIR = Path(__file__).resolve().parents[1] / "tests" / "vectors"

WORDS = ["", "a", "hole", "?", "val x", "äöü", "∀x. P x", "line\nbreak", '"quo"']


def random_op(rng: random.Random) -> Operation:
    op = Operation()
    for _ in range(rng.randint(0, 6)):
        roll = rng.random()
        if roll < 0.4:
            op.retain(rng.randint(1, 20))
        elif roll < 0.7:
            op.insert(rng.choice(WORDS[1:]))
        else:
            op.delete(rng.randint(1, 9))
    return op


def random_annotation(rng: random.Random) -> Annotation:
    start = rng.randint(0, 40)
    return Annotation(
        start,
        start + rng.randint(0, 12),
        rng.choice(["error", "warning", "info", "token"]),
        rng.choice([None, "unbalanced bracket", "TODO", "äöü ⟹"]),
        rng.choice([None, "keyword", "hole", "state"]),
    )


def random_message(rng: random.Random):
    pick = rng.randrange(11)
    doc = rng.choice(["inline-1", "snip-def-seq-conc", "file-src/Seq.thy", "d"])
    if pick == 0:
        return wire.ClientHello(rng.randint(0, 300))
    if pick == 1:
        return wire.ServerHello(
            "%016x" % rng.getrandbits(64),
            tuple(rng.choice(WORDS[1:]) for _ in range(rng.randint(0, 4))),
        )
    if pick == 2:
        return wire.OpenDoc(doc)
    if pick == 3:
        return wire.DocState(doc, rng.randint(0, 500), rng.choice(WORDS))
    if pick == 4:
        return wire.Edit(doc, rng.randint(0, 500), random_op(rng))
    if pick == 5:
        return wire.Ack(doc, rng.randint(0, 500))
    if pick == 6:
        return wire.RemoteEdit(doc, rng.randint(0, 500), random_op(rng), rng.randint(1, 40))
    if pick == 7:
        return wire.Annotations(
            doc,
            rng.randint(0, 500),
            tuple(random_annotation(rng) for _ in range(rng.randint(0, 5))),
        )
    if pick == 8:
        return wire.FragmentStep(doc, rng.randint(0, 9), rng.randint(0, 9))
    if pick == 9:
        from cobra.config import SettingChange

        return wire.SettingsChanged(
            tuple(
                SettingChange(
                    rng.choice(["title", "show.infos", "binding.port", "env"]),
                    rng.choice([None, True, 8080, "old", {"A": "1"}]),
                    rng.choice([None, False, 9090, "new", {"B": "2"}]),
                    rng.random() < 0.8,
                )
                for _ in range(rng.randint(0, 3))
            )
        )
    return wire.Error(rng.choice(["version-mismatch", "edit-rejected", "bad-frame"]), rng.choice(WORDS))


def msg_json(msg) -> dict:
    if isinstance(msg, wire.ClientHello):
        return {"type": "client-hello", "protocolVersion": msg.protocol_version}
    if isinstance(msg, wire.ServerHello):
        return {"type": "server-hello", "digest": msg.digest, "docs": list(msg.docs)}
    if isinstance(msg, wire.OpenDoc):
        return {"type": "open-doc", "docId": msg.doc_id}
    if isinstance(msg, wire.DocState):
        return {"type": "doc-state", "docId": msg.doc_id, "seq": msg.seq, "text": msg.text}
    if isinstance(msg, wire.Edit):
        return {"type": "edit", "docId": msg.doc_id, "parentSeq": msg.parent_seq, "op": msg.op.ops}
    if isinstance(msg, wire.Ack):
        return {"type": "ack", "docId": msg.doc_id, "seq": msg.seq}
    if isinstance(msg, wire.RemoteEdit):
        return {
            "type": "remote-edit",
            "docId": msg.doc_id,
            "seq": msg.seq,
            "op": msg.op.ops,
            "author": msg.author,
        }
    if isinstance(msg, wire.Annotations):
        return {
            "type": "annotations",
            "docId": msg.doc_id,
            "seq": msg.seq,
            "annotations": [ann_json(a) for a in msg.annotations],
        }
    if isinstance(msg, wire.FragmentStep):
        return {
            "type": "fragment-step",
            "docId": msg.doc_id,
            "fragmentIndex": msg.fragment_index,
            "variantIndex": msg.variant_index,
        }
    if isinstance(msg, wire.SettingsChanged):
        return {
            "type": "settings-changed",
            "changes": [
                {"path": c.path, "old": c.old, "new": c.new, "hot": c.hot}
                for c in msg.changes
            ],
        }
    if isinstance(msg, wire.Error):
        return {"type": "error", "code": msg.code, "message": msg.message}
    raise TypeError(msg)


def ann_json(a: Annotation) -> dict:
    return {"start": a.start, "end": a.end, "kind": a.kind, "message": a.message, "cls": a.cls}


def gen_wire() -> dict:
    rng = random.Random(4711)
    cases = [
        {"hex": wire.encode(wire.Ack("d", 1)).hex(), "message": msg_json(wire.Ack("d", 1))},
    ]
    for _ in range(400):
        msg = random_message(rng)
        cases.append({"hex": wire.encode(msg).hex(), "message": msg_json(msg)})
    return {"cases": cases}


POOL = "abcdefg \n(){}?123"


def sized_op(rng: random.Random, base_len: int) -> Operation:
    op = Operation()
    pos = 0
    while pos < base_len:
        n = rng.randint(1, max(1, min(7, base_len - pos)))
        roll = rng.random()
        if roll < 0.5:
            op.retain(n)
            pos += n
        elif roll < 0.75:
            op.delete(n)
            pos += n
        else:
            op.insert("".join(rng.choice(POOL) for _ in range(rng.randint(1, 4))))
    if rng.random() < 0.3:
        op.insert(rng.choice(POOL))
    return op


def gen_ot() -> dict:
    rng = random.Random(1848)
    transform_cases = []
    for _ in range(300):
        text = "".join(rng.choice(POOL) for _ in range(rng.randint(0, 25)))
        a = sized_op(rng, len(text))
        b = sized_op(rng, len(text))
        ap, bp = Operation.transform(a, b)
        transform_cases.append(
            {
                "text": text,
                "a": a.ops,
                "b": b.ops,
                "aPrime": ap.ops,
                "bPrime": bp.ops,
                "converged": bp.apply(a.apply(text)),
            }
        )
    compose_cases = []
    for _ in range(300):
        text = "".join(rng.choice(POOL) for _ in range(rng.randint(0, 25)))
        first = sized_op(rng, len(text))
        mid = first.apply(text)
        second = sized_op(rng, len(mid))
        compose_cases.append(
            {
                "text": text,
                "first": first.ops,
                "second": second.ops,
                "composed": first.compose(second).ops,
                "result": second.apply(mid),
            }
        )
    diff_cases = []
    for _ in range(200):
        old = "".join(rng.choice(POOL) for _ in range(rng.randint(0, 20)))
        new = "".join(rng.choice(POOL) for _ in range(rng.randint(0, 20)))
        diff_cases.append({"old": old, "new": new, "op": Operation.diff(old, new).ops})
    return {"transform": transform_cases, "compose": compose_cases, "diff": diff_cases}


FRAGMENT_SOURCES = [
    ("scala", "val x = /*(*/???/*|3 * 7)*/\n"),
    ("scala", "val x = /*(???|*/3 * 7/*)*/\n"),
    ("haskell", "fibs = {-(-}undefined{-|0 : 1 : zipWith (+) fibs (tail fibs))-}\n"),
    ("isabelle", "lemma x: A ⟹ (*(*)A(*)*)\n"),
    ("scala", 'def f = /*(*/"?"/*|g(1)|h(2, 3))*/ + 1\n'),
    ("demo", "int x = /*(*/0/*|42)*/; // set x\n"),
    ("scala", "// no constructs here\nval y = 2\n"),
    ("haskell", "x = 1 {- prose (not a construct) -}\n"),
]


def frag_json(frag) -> dict:
    return {
        "wholeRange": list(frag.whole_range),
        "kind": frag.kind,
        "variants": [
            {"text": v.text, "live": v.live, "pieces": [list(p) for p in v.pieces]}
            for v in frag.variants
        ],
    }


def gen_fragments() -> dict:
    cases = []
    for lang, source in FRAGMENT_SOURCES:
        frags = parse_fragments(source, REGISTRY[lang], strict=False)
        cases.append(
            {"language": lang, "source": source, "fragments": [frag_json(f) for f in frags]}
        )
    return {"cases": cases}


EDIT_SOURCES = [
    ("scala", "val x = /*(*/???/*|3 * 7)*/\n"),
    ("scala", 'def f = /*(*/"?"/*|g(1)|h(2, 3))*/ + 1\n'),
    ("haskell", "fibs = {-(-}undefined{-|0 : 1 : zipWith (+) fibs (tail fibs))-}\n"),
    ("demo", "int x = /*(*/0/*|42)*/; // set x\n"),
]


def gen_projection() -> dict:
    display_cases = []
    for lang, source in EDIT_SOURCES + FRAGMENT_SOURCES:
        syntax = REGISTRY[lang]
        count = len(parse_fragments(source, syntax, strict=False))
        states = [{}]
        if count:
            states += [{0: 1}, {0: 99}, {0: 2}]
        for state in states:
            proj = project(source, syntax, fragment_state=state)
            display_cases.append(
                {
                    "language": lang,
                    "source": source,
                    "state": {str(k): v for k, v in state.items()},
                    "display": proj.text,
                }
            )

    rng = random.Random(2718)
    edit_cases = []
    for _ in range(250):
        lang, source = rng.choice(EDIT_SOURCES)
        syntax = REGISTRY[lang]
        count = len(parse_fragments(source, syntax, strict=False))
        state = {0: rng.randint(0, 2)} if count else {}
        proj = project(source, syntax, fragment_state=state)
        view = proj.text
        if rng.random() < 0.5 and view:
            pos = rng.randrange(len(view))
            n = rng.randint(1, min(3, len(view) - pos))
            op = Operation().retain(pos).delete(n).retain(len(view) - pos - n)
        else:
            pos = rng.randint(0, len(view))
            chunk = "".join(rng.choice("abc12 ") for _ in range(rng.randint(1, 3)))
            op = Operation().retain(pos).insert(chunk).retain(len(view) - pos)
        case = {
            "language": lang,
            "source": source,
            "state": {str(k): v for k, v in state.items()},
            "op": op.ops,
        }
        try:
            raw_op = map_view_edit(proj, op)
            case["newSource"] = raw_op.apply(source)
            case["newDisplay"] = op.apply(view)
        except EditRejected:
            case["rejected"] = True
        edit_cases.append(case)
    return {"display": display_cases, "edits": edit_cases}


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, data in [
        ("wire.json", gen_wire()),
        ("ot.json", gen_ot()),
        ("fragments.json", gen_fragments()),
        ("projection.json", gen_projection()),
    ]:
        path = OUT_DIR / name
        path.write_text(json.dumps(data, ensure_ascii=False, indent=1) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
