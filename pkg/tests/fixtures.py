"""Test fixtures: a small five-slide presentation with external source.

SLIDES_HTML and SEQ_THY form one coherent presentation: the slides pull
three snippets out of the hidden Isabelle theory and carry two inline
code samples with staged fragments.
"""

from __future__ import annotations

from pathlib import Path

SLIDES_HTML = """\
<code class="hidden" src="src/Seq.thy">
</code>
<section>
  <h2>A Short Demo</h2>
  Sequences and their concatenation
  <code src="#def-seq-conc">
  </code>
</section>
<section>
  <h2>A Short Lemma</h2>
  <code src="#reverse-conc" class="states">
  </code>
</section>
<section>
  <h2>A Short Proof</h2>
  <code src="#reverse-reverse" class="states">
  </code>
</section>
<section>
  <h2>A Short Haskell Demo</h2>
  <code class="haskell">
    module Example where
    fibs = {-(-}undefined{-|0 : 1 : zipWith (+) fibs (tail fibs))-}
  </code>
</section>
<section>
  <h2>A Short Scala Demo</h2>
  <code class="scala">
    object Example {
      val x = /*(???|*/3 * 7/*)*/
    }
  </code>
</section>
"""

SEQ_THY = """\
theory Seq
imports Main
begin

(** begin #def-seq-conc *)
datatype 'a seq = Empty | Seq 'a "'a seq"

fun conc :: "'a seq ⇒ 'a seq ⇒ 'a seq"
where
  "conc Empty ys = ys"
| "conc (Seq x xs) ys = Seq x (conc xs ys)"
(** end #def-seq-conc *)

fun reverse :: "'a seq ⇒ 'a seq"
where
  "reverse Empty = Empty"
| "reverse (Seq x xs) = conc (reverse xs) (Seq x Empty)"

lemma conc_empty: "conc xs Empty = xs"
  by (induct xs, simp_all)

lemma conc_assoc: "conc (conc xs ys) zs = conc xs (conc ys zs)"
  by (induct xs, simp_all)

(** begin #reverse-conc *)
lemma reverse_conc: "reverse (conc xs ys) = conc (reverse ys) (reverse xs)"
  apply (induct xs)
  apply (simp_all add: conc_empty conc_assoc)
  done
(** end #reverse-conc *)

(** begin #reverse-reverse *)
lemma reverse_reverse: "reverse (reverse xs) = xs"
  oops
(** end #reverse-reverse *)

end
"""

# Overlapping snippets: #outer closes between #inner's begin and end.
OVERLAP_SCALA = """\
object Overlap {
/* begin #outer */
  val a = 1
/* begin #inner */
  val b = 2
/* end #outer */
  val c = 3
/* end #inner */
}
"""

SCALA_FRAGMENT = "val x = /*(*/???/*|3 * 7)*/\n"
SCALA_FRAGMENT_FLIPPED = "val x = /*(???|*/3 * 7/*)*/\n"
HASKELL_FRAGMENT = "fibs = {-(-}undefined{-|0 : 1 : zipWith (+) fibs (tail fibs))-}\n"
ISABELLE_SELECTION = "lemma x: A ⟹ (*(*)A(*)*)\n"


def write_presentation(root: Path, *, conf: str | None = None) -> Path:
    """Materialize the fixture presentation in a directory."""
    root.mkdir(parents=True, exist_ok=True)
    (root / "slides.html").write_text(SLIDES_HTML, encoding="utf-8")
    src = root / "src"
    src.mkdir(exist_ok=True)
    (src / "Seq.thy").write_text(SEQ_THY, encoding="utf-8")
    if conf is not None:
        (root / "cobra.conf").write_text(conf, encoding="utf-8")
    return root
