"""Command line front end.

Five subcommands cover the document life cycle: ``validate`` checks
files and reports diagnostics, ``translate`` rewrites keywords into
another language, ``inspect`` prints the canonical model in a stable,
diffable form, ``run`` replays a recorded gaze trace headlessly and
writes the CSV logs, and ``serve`` opens a live session for a remote
player.  ``keywords`` dumps the keyword table.

Exit codes: 0 on success, 1 for semantic failures (bad documents,
failed runs), 2 for environment failures (unreadable files, bad
addresses).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

from .analyzer import TranslationError, translate, validate
from .diagnostics import Diagnostic
from .engine import EngineConfig, EngineError
from .gazeio import (DEFAULT_DISPERSION_PX, DEFAULT_MIN_FIXATION_MS,
                     RunHeader, TraceError, detect_fixations, read_trace,
                     replay, write_aoi_csv, write_events_csv,
                     write_fixations_csv, write_samples_csv)
from .keywords import load_registry
from .model import GimlDocument
from .parser import parse
from .schema import LANGUAGE_CODES

ASSET_ROOT_VAR = "GIML_ASSET_ROOT"

OK = 0
FAILED = 1
BROKEN = 2


# ---------------------------------------------------------------------------
# shared helpers

def _asset_root() -> Optional[str]:
    return os.environ.get(ASSET_ROOT_VAR) or None


def _load(path: str, language: Optional[str]) -> GimlDocument:
    data = Path(path).read_bytes()
    return parse(data, language_hint=language, source_path=path)


def _print_diagnostics(path: str, diagnostics: list[Diagnostic],
                       out) -> None:
    for item in diagnostics:
        where = "%s:%d:%d" % (path, item.line, item.col)
        tail = " (did you mean '%s'?)" % item.suggestion \
            if item.suggestion else ""
        print("%s: %s %s: %s%s" % (where, item.severity, item.code,
                                   item.message, tail), file=out)


def _severity_counts(diagnostics: list[Diagnostic]) -> tuple[int, int]:
    errors = sum(1 for d in diagnostics if d.severity == "error")
    warnings = sum(1 for d in diagnostics if d.severity == "warning")
    return errors, warnings


def canonical_dump(doc: GimlDocument) -> str:
    """Stable text rendering of the canonical document.

    The first line names the source language; everything below it is
    language independent, so two documents that differ only in keyword
    language dump identically from the second line on.
    """
    regions = sum(len(s.regions) for s in doc.scenes)
    overlays = sum(1 + (r.activation is not None) + (r.reaction is not None)
                   for s in doc.scenes for r in s.regions)
    lines = [
        "language: %s" % doc.source_language,
        "images: %d" % len(doc.images),
        "sounds: %d" % len(doc.sounds),
        "movies: %d" % len(doc.movies),
        "lists: %d" % len(doc.lists),
        "scenes: %d" % len(doc.scenes),
        "regions: %d" % regions,
        "state overlays: %d" % overlays,
        "",
        json.dumps(doc.fingerprint(), indent=2, sort_keys=True,
                   ensure_ascii=False),
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands

def _gather(paths: list[str]) -> list[Path]:
    found: list[Path] = []
    for name in paths:
        path = Path(name)
        if path.is_dir():
            found.extend(sorted(path.rglob("*.xml")))
        else:
            found.append(path)
    return found


def cmd_validate(args) -> int:
    files = _gather(args.paths)
    if not files:
        print("no files to check", file=sys.stderr)
        return BROKEN
    total_errors = total_warnings = 0
    for path in files:
        try:
            doc = _load(str(path), args.language)
        except OSError as exc:
            print("cannot read %s: %s" % (path, exc), file=sys.stderr)
            return BROKEN
        diagnostics = validate(doc, asset_root=_asset_root())
        errors, warnings = _severity_counts(diagnostics)
        total_errors += errors
        total_warnings += warnings
        print("%s: %d error(s), %d warning(s)" % (path, errors, warnings))
        _print_diagnostics(str(path), diagnostics, sys.stdout)
    if len(files) > 1:
        print("checked %d files: %d error(s), %d warning(s)"
              % (len(files), total_errors, total_warnings))
    if total_errors or (args.strict and total_warnings):
        return FAILED
    return OK


def cmd_translate(args) -> int:
    try:
        data = Path(args.path).read_bytes()
    except OSError as exc:
        print("cannot read %s: %s" % (args.path, exc), file=sys.stderr)
        return BROKEN
    try:
        text = translate(data, args.language)
    except TranslationError as exc:
        _print_diagnostics(args.path, exc.diagnostics, sys.stderr)
        return FAILED
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return OK


def cmd_inspect(args) -> int:
    try:
        doc = _load(args.path, args.language)
    except OSError as exc:
        print("cannot read %s: %s" % (args.path, exc), file=sys.stderr)
        return BROKEN
    errors, _warnings = _severity_counts(doc.diagnostics)
    if errors:
        _print_diagnostics(args.path, doc.diagnostics, sys.stderr)
        return FAILED
    sys.stdout.write(canonical_dump(doc))
    return OK


def _run_config(args) -> EngineConfig:
    return EngineConfig(dwell_ms=args.dwell_ms, tick_ms=args.tick_ms,
                        seed=args.seed, strict=args.strict,
                        asset_root=_asset_root())


def _checked_document(args) -> Optional[GimlDocument]:
    doc = _load(args.path, args.language)
    diagnostics = validate(doc, asset_root=_asset_root())
    errors, _warnings = _severity_counts(diagnostics)
    if errors:
        _print_diagnostics(args.path, diagnostics, sys.stderr)
        return None
    return doc


def _log_paths(out_dir: Path) -> dict[str, Path]:
    return {
        "samples": out_dir / "samples.csv",
        "events": out_dir / "events.csv",
        "aoi": out_dir / "aoi.csv",
        "fixations": out_dir / "fixations.csv",
    }


def _write_empty_logs(paths: dict[str, Path], header: RunHeader) -> None:
    write_samples_csv(paths["samples"], [], header)
    write_events_csv(paths["events"], [], header)
    write_aoi_csv(paths["aoi"], [], header)
    write_fixations_csv(paths["fixations"], [], header)


def cmd_run(args) -> int:
    try:
        doc = _checked_document(args)
    except OSError as exc:
        print("cannot read %s: %s" % (args.path, exc), file=sys.stderr)
        return BROKEN
    if doc is None:
        return FAILED
    try:
        trace = read_trace(args.trace)
    except (OSError, TraceError) as exc:
        print("cannot read trace %s: %s" % (args.trace, exc),
              file=sys.stderr)
        return BROKEN
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = _log_paths(out_dir)
    header = RunHeader(document=args.path, seed=args.seed,
                       dwell_ms=args.dwell_ms, tick_ms=args.tick_ms)
    print("document: %s" % args.path)
    print("seed: %d" % args.seed)
    if trace.skipped_lines:
        print("skipped trace lines: %d" % trace.skipped_lines)
    if not trace.samples:
        _write_empty_logs(paths, header)
        print("trace is empty; wrote header-only logs")
        for path in paths.values():
            print("wrote: %s" % path)
        return OK
    try:
        result = replay(doc, trace.samples, _run_config(args))
    except EngineError as exc:
        marked = RunHeader(document=args.path, seed=args.seed,
                           dwell_ms=args.dwell_ms, tick_ms=args.tick_ms,
                           extra=("aborted=%s" % exc,))
        _write_empty_logs(paths, marked)
        print("run failed: %s" % exc, file=sys.stderr)
        return FAILED
    write_samples_csv(paths["samples"], result.rows, header)
    write_events_csv(paths["events"], result.events, header)
    write_aoi_csv(paths["aoi"], result.aoi, header)
    fixations, _saccades = detect_fixations(
        trace.samples, args.dispersion_px, args.min_fix_ms)
    write_fixations_csv(paths["fixations"], fixations, header)
    counts: dict[str, int] = {}
    for event in result.events:
        counts[event.kind] = counts.get(event.kind, 0) + 1
    summary = ", ".join("%s %d" % (kind, counts[kind])
                        for kind in sorted(counts))
    print("ticks: %d" % len(result.rows))
    print("events: %d (%s)" % (len(result.events), summary))
    print("fixations: %d" % len(fixations))
    for path in paths.values():
        print("wrote: %s" % path)
    return OK


def cmd_serve(args) -> int:
    try:
        doc = _checked_document(args)
    except OSError as exc:
        print("cannot read %s: %s" % (args.path, exc), file=sys.stderr)
        return BROKEN
    if doc is None:
        return FAILED
    host, _sep, port_text = args.bind.rpartition(":")
    try:
        port = int(port_text)
    except ValueError:
        print("bad bind address %r, expected host:port" % args.bind,
              file=sys.stderr)
        return BROKEN
    out_dir = Path(args.out_dir) if args.out_dir else None
    header = RunHeader(document=args.path, seed=args.seed,
                       dwell_ms=args.dwell_ms, tick_ms=args.tick_ms)
    from .server import serve

    def ready(bound_host: str, bound_port: int) -> None:
        print("listening on %s:%d" % (bound_host, bound_port), flush=True)

    try:
        serve(doc, host or "127.0.0.1", port, _run_config(args),
              out_dir=out_dir, header=header,
              sessions=args.sessions, lockstep=args.lockstep, ready=ready)
    except OSError as exc:
        print("cannot bind %s: %s" % (args.bind, exc), file=sys.stderr)
        return BROKEN
    return OK


def cmd_keywords(_args) -> int:
    sys.stdout.write(load_registry().dump())
    return OK


# ---------------------------------------------------------------------------
# argument wiring

def _add_document_argument(sub) -> None:
    sub.add_argument("path", help="GIML document")


def _add_run_options(sub) -> None:
    sub.add_argument("--seed", type=int, default=0,
                     help="random draw seed (default 0)")
    sub.add_argument("--dwell-ms", type=int, default=1000,
                     help="default dwell time in ms (default 1000)")
    sub.add_argument("--tick-ms", type=int, default=10,
                     help="simulation tick in ms (default 10)")
    sub.add_argument("--strict", action="store_true",
                     help="refuse documents with findings")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="giml",
        description="Work with gaze interaction scene documents.")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("validate", help="check documents")
    sub.add_argument("paths", nargs="+",
                     help="files or directories of .xml files")
    sub.add_argument("--language", choices=LANGUAGE_CODES, default=None,
                     help="language hint for keyword lookup")
    sub.add_argument("--strict", action="store_true",
                     help="fail on warnings too")
    sub.set_defaults(func=cmd_validate)

    sub = commands.add_parser("translate",
                              help="rewrite keywords in another language")
    _add_document_argument(sub)
    sub.add_argument("--language", choices=LANGUAGE_CODES, required=True,
                     help="target language")
    sub.add_argument("-o", "--out", default=None,
                     help="output file (default stdout)")
    sub.set_defaults(func=cmd_translate)

    sub = commands.add_parser("inspect",
                              help="print the canonical document model")
    _add_document_argument(sub)
    sub.add_argument("--language", choices=LANGUAGE_CODES, default=None,
                     help="language hint for keyword lookup")
    sub.set_defaults(func=cmd_inspect)

    sub = commands.add_parser("run", help="replay a gaze trace headlessly")
    _add_document_argument(sub)
    sub.add_argument("--trace", required=True, help="gaze trace file")
    sub.add_argument("--out-dir", required=True,
                     help="directory for the CSV logs")
    sub.add_argument("--language", choices=LANGUAGE_CODES, default=None)
    sub.add_argument("--dispersion-px", type=float,
                     default=DEFAULT_DISPERSION_PX,
                     help="fixation dispersion threshold")
    sub.add_argument("--min-fix-ms", type=int,
                     default=DEFAULT_MIN_FIXATION_MS,
                     help="minimum fixation duration")
    _add_run_options(sub)
    sub.set_defaults(func=cmd_run)

    sub = commands.add_parser("serve", help="open a live player session")
    _add_document_argument(sub)
    sub.add_argument("--bind", default="127.0.0.1:8750",
                     help="host:port to listen on")
    sub.add_argument("--out-dir", default=None,
                     help="directory for the CSV logs written on stop")
    sub.add_argument("--language", choices=LANGUAGE_CODES, default=None)
    sub.add_argument("--sessions", type=int, default=0,
                     help="end after this many sessions (0 = forever)")
    sub.add_argument("--lockstep", action="store_true",
                     help="advance one tick per input message instead of "
                          "using the wall clock")
    _add_run_options(sub)
    sub.set_defaults(func=cmd_serve)

    sub = commands.add_parser("keywords", help="dump the keyword table")
    sub.set_defaults(func=cmd_keywords)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
