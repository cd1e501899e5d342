"""Cobra serves live code presentations.

A presentation is a directory with a ``slides.html`` file, an optional
``cobra.conf``, and the source files referenced from the slides.  The
server parses the slides, extracts code snippets, keeps every connected
browser in sync through operational transformation, and feeds edits to
per-language semantic assistants whose results are broadcast back as
annotations.
"""

__version__ = "0.1.0"
