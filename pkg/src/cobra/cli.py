"""Command-line interface.

Three commands: ``new`` scaffolds a presentation directory, ``run``
serves one (a bare directory argument means run), ``configure`` checks
whether a language's assistant can work on this machine.  Exit codes:
0 success, 1 runtime failure, 2 usage or configuration problem.
"""

from __future__ import annotations

import argparse
import asyncio
import errno
import sys
from pathlib import Path

from .assistants import BUILTIN_ASSISTANTS, assistant_for, check_prereqs
from .config import CONFIG_NAME, ConfigError
from .server import SLIDES_NAME, MissingSlides, Server, ServerError
from .slidedoc import SlideError
from .snippets import SnippetError

_COMMANDS = ("new", "run", "configure")

_CONF_TEMPLATE = """\
# Presentation settings.  Every key is optional and falls back to the
# value shown; a running server picks up edits to this file without a
# restart (only binding.interface needs one).

title = "New Presentation"
language = demo

# Network exposure.  localhost keeps the audience read-only on your
# machine; bind a LAN address to let them edit along.
# binding.interface = localhost
# binding.port = 8080

# Appearance.
# theme.slides = white        # white | black
# theme.code = idea           # idea | darcula
# reveal.transition = slide

# Annotation visibility defaults for all code blocks.
# show.infos = true
# show.warnings = true

# Extra environment for assistant processes, e.g.:
# env.isabelle_home = /opt/Isabelle2025
"""

_SLIDES_TEMPLATE = """\
<section>
  <h1>{name}</h1>
  <p>This presentation is served live: edit slides.html and reload.</p>
</section>

<section>
  <h2>Live code</h2>
  <p>The audience sees every keystroke, and fragments step variants:</p>
  <code class="demo">
fun greeting = "hello"
val answer = /*(*/???/*|6 * 7)*/
</code>
</section>
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cobra",
        description="Serve live code presentations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    new = sub.add_parser("new", help="create a presentation directory")
    new.add_argument("name", help="directory to create")

    run = sub.add_parser("run", help="serve a presentation directory")
    run.add_argument("directory", help="presentation directory")
    run.add_argument("--port", type=int, help="override binding.port")
    run.add_argument("--interface", help="override binding.interface")
    run.add_argument(
        "--no-watch",
        action="store_true",
        help="do not watch cobra.conf for changes",
    )

    configure = sub.add_parser(
        "configure", help="check a language assistant's prerequisites"
    )
    configure.add_argument("language", help="language identifier")
    return parser


def cmd_new(name: str) -> int:
    target = Path(name)
    if target.exists():
        print(f"error: {target} already exists", file=sys.stderr)
        return 2
    try:
        target.mkdir(parents=True)
        (target / CONFIG_NAME).write_text(_CONF_TEMPLATE, encoding="utf-8")
        (target / SLIDES_NAME).write_text(
            _SLIDES_TEMPLATE.format(name=target.name or name), encoding="utf-8"
        )
    except OSError as exc:
        print(f"error: cannot create {target}: {exc}", file=sys.stderr)
        return 1
    print(f"created {target}/ with {CONFIG_NAME} and {SLIDES_NAME}")
    print(f"run it with: cobra {target}")
    return 0


async def _serve(server: Server) -> int:
    try:
        await server.start()
    except OSError as exc:
        if exc.errno == errno.EADDRINUSE:
            print(
                f"error: address in use: cannot bind "
                f"{server.settings.binding_interface}:"
                f"{server.settings.binding_port}",
                file=sys.stderr,
            )
            return 2
        print(f"error: cannot bind: {exc}", file=sys.stderr)
        return 1
    for warning in server.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    for warning in server.hub.assistant_warnings:
        print(f"warning: {warning}", file=sys.stderr)
    print(f"presentation at {server.url}")
    try:
        await asyncio.Event().wait()
        return 0
    finally:
        await server.stop()


def cmd_run(directory: str, *, port=None, interface=None, watch=True) -> int:
    try:
        server = Server(
            Path(directory), port=port, interface=interface, watch=watch
        )
    except MissingSlides as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, SlideError, SnippetError, ServerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return asyncio.run(_serve(server))
    except KeyboardInterrupt:
        print("stopped")
        return 0


def cmd_configure(language: str) -> int:
    spec = assistant_for(language)
    if spec is None:
        known = ", ".join(sorted(BUILTIN_ASSISTANTS))
        print(
            f"error: unknown language {language!r}; known: {known}",
            file=sys.stderr,
        )
        return 2
    report = check_prereqs(spec)
    if not spec.prerequisites:
        print(f"{language}: no prerequisites, ready to use")
        return 0
    for item in report.items:
        if item.ok:
            print(f"ok: {item.name}")
        else:
            print(f"missing: {item.name}; {item.advice}")
    if report.ok:
        print(f"{language}: ready to use")
        return 0
    print(f"{language}: not ready", file=sys.stderr)
    return 1


def main(argv: list[str] | None = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    if args and args[0] not in _COMMANDS and not args[0].startswith("-"):
        args.insert(0, "run")
    parser = build_parser()
    try:
        ns = parser.parse_args(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if ns.command == "new":
        return cmd_new(ns.name)
    if ns.command == "run":
        return cmd_run(
            ns.directory,
            port=ns.port,
            interface=ns.interface,
            watch=not ns.no_watch,
        )
    return cmd_configure(ns.language)


if __name__ == "__main__":
    sys.exit(main())
