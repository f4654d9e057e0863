"""Gaze traces, oculomotor event detection and CSV run logs.

Input side: trace files are UTF-8 text, one sample per line, comma
separated.  Lines starting with ``#`` are comments; a comment (or a
leading plain row) naming the columns fixes their order, otherwise the
default order ``t_ms,x,y,valid,pupil,key`` applies.  Malformed lines are
skipped and counted, never fatal.

Output side: every run can be written out as three CSV files sharing a
small commented header (document, seed, dwell and tick): the per-tick
sample log, the event log and per-region gaze statistics.  Formatting is
locale independent and deterministic, so equal runs give equal bytes.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Optional, Union

from .engine import Engine, EngineConfig, EngineEvent, InputTick
from .model import GimlDocument

STOP_KEY = "escape"

DEFAULT_DISPERSION_PX = 80.0
DEFAULT_MIN_FIXATION_MS = 100

_COLUMN_ALIASES = {
    "t": "t_ms", "t_ms": "t_ms", "time": "t_ms", "time_ms": "t_ms",
    "x": "x", "y": "y",
    "valid": "valid",
    "pupil": "pupil", "pupil_diameter": "pupil",
    "key": "key", "keys": "key",
}

_DEFAULT_COLUMNS = ("t_ms", "x", "y", "valid", "pupil", "key")

_TRUE_WORDS = {"1", "true", "yes", "y", ""}
_FALSE_WORDS = {"0", "false", "no", "n"}


class TraceError(RuntimeError):
    """A trace header that cannot describe any sample stream."""


# ---------------------------------------------------------------------------
# sample stream

@dataclass(frozen=True)
class GazeSample:
    """One eye tracker (or pointer) sample in design coordinates."""

    t_ms: int
    x: float
    y: float
    valid: bool = True
    pupil: Optional[float] = None  # diameter, passed through untouched
    key: str = ""


@dataclass
class Trace:
    samples: list[GazeSample] = field(default_factory=list)
    skipped_lines: int = 0


TraceSource = Union[str, os.PathLike, IO[str], Iterable[str]]


def read_trace(source: TraceSource) -> Trace:
    """Read a gaze trace, skipping and counting malformed lines.

    ``source`` may be a path or any iterable of text lines.  Raises
    TraceError when a column header is present but does not cover the
    required ``t_ms``, ``x`` and ``y`` columns.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as handle:
            return _read_lines(handle)
    return _read_lines(source)


def _header_columns(tokens: list[str]) -> Optional[list[Optional[str]]]:
    mapped = [_COLUMN_ALIASES.get(token.strip().casefold())
              for token in tokens]
    named = {name for name in mapped if name}
    if {"t_ms", "x", "y"} <= named:
        return mapped
    return None


def _looks_like_header(tokens: list[str]) -> bool:
    for token in tokens:
        try:
            float(token)
            return False
        except ValueError:
            continue
    return _header_columns(tokens) is not None


def _parse_bool(word: str) -> Optional[bool]:
    folded = word.strip().casefold()
    if folded in _TRUE_WORDS:
        return True
    if folded in _FALSE_WORDS:
        return False
    return None


def _read_lines(lines: Iterable[str]) -> Trace:
    trace = Trace()
    columns: list[Optional[str]] = list(_DEFAULT_COLUMNS)
    saw_data = False
    last_t: Optional[int] = None
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            text = line.lstrip("#").strip()
            if text.casefold().startswith("columns"):
                text = text.split(":", 1)[-1]
                header = _header_columns(text.split(","))
                if header is None:
                    raise TraceError(
                        "trace column header %r lacks t_ms, x or y" % line)
                columns = header
            else:
                header = _header_columns(text.split(","))
                if header is not None and not saw_data:
                    columns = header
            continue
        tokens = next(csv.reader([line]))
        if not saw_data and _looks_like_header(tokens):
            columns = _header_columns(tokens)  # type: ignore[assignment]
            saw_data = True
            continue
        saw_data = True
        fields = {}
        for name, token in zip(columns, tokens):
            if name:
                fields[name] = token.strip()
        sample = _parse_sample(fields)
        if sample is None or (last_t is not None and sample.t_ms < last_t):
            trace.skipped_lines += 1
            continue
        last_t = sample.t_ms
        trace.samples.append(sample)
    return trace


def _parse_sample(fields: dict[str, str]) -> Optional[GazeSample]:
    try:
        t_ms = int(round(float(fields["t_ms"])))
    except (KeyError, ValueError):
        return None
    valid = _parse_bool(fields.get("valid", "1"))
    if valid is None:
        return None
    try:
        x = float(fields.get("x", ""))
        y = float(fields.get("y", ""))
    except ValueError:
        if valid:
            return None
        x = y = 0.0
    pupil: Optional[float] = None
    word = fields.get("pupil", "")
    if word:
        try:
            pupil = float(word)
        except ValueError:
            return None
    return GazeSample(t_ms, x, y, valid, pupil, fields.get("key", ""))


def _snap_samples(samples: Iterable[GazeSample],
                  tick_ms: int) -> list[tuple[InputTick, GazeSample]]:
    """Snap sample times to the tick grid; a collision keeps the later one."""
    step = max(1, int(tick_ms))
    snapped: list[tuple[InputTick, GazeSample]] = []
    for sample in samples:
        t = int(round(sample.t_ms / step)) * step
        keys = (sample.key,) if sample.key else ()
        if sample.valid:
            tick = InputTick(t, sample.x, sample.y, keys=keys)
        else:
            tick = InputTick(t, valid=False, keys=keys)
        if snapped and snapped[-1][0].t_ms >= t:
            snapped[-1] = (tick, sample)
        else:
            snapped.append((tick, sample))
    return snapped


def ticks_from_samples(samples: Iterable[GazeSample],
                       tick_ms: int = 10) -> list[InputTick]:
    """Engine input for a trace: grid-snapped, strictly increasing."""
    return [tick for tick, _sample in _snap_samples(samples, tick_ms)]


# ---------------------------------------------------------------------------
# fixations and saccades

@dataclass(frozen=True)
class Fixation:
    start_ms: int
    end_ms: int
    x: float
    y: float
    dispersion: float
    sample_count: int

    @property
    def duration_ms(self) -> int:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class Saccade:
    start_ms: int
    end_ms: int
    from_x: float
    from_y: float
    to_x: float
    to_y: float

    @property
    def amplitude(self) -> float:
        return math.hypot(self.to_x - self.from_x, self.to_y - self.from_y)


def _dispersion(xs: list[float], ys: list[float]) -> float:
    return (max(xs) - min(xs)) + (max(ys) - min(ys))


def detect_fixations(
        samples: Iterable[GazeSample],
        dispersion_px: float = DEFAULT_DISPERSION_PX,
        min_duration_ms: int = DEFAULT_MIN_FIXATION_MS,
) -> tuple[list[Fixation], list[Saccade]]:
    """Dispersion-threshold fixation detection.

    A fixation is a maximal run of consecutive valid samples whose
    positions stay within ``dispersion_px`` (width plus height of the
    bounding box) for at least ``min_duration_ms``.  Runs are scanned
    left to right; invalid samples split them.  The gaps between
    consecutive fixations are reported as saccades.
    """
    fixations: list[Fixation] = []
    for run in _valid_runs(samples):
        fixations.extend(_scan_run(run, dispersion_px, min_duration_ms))
    saccades = [Saccade(a.end_ms, b.start_ms, a.x, a.y, b.x, b.y)
                for a, b in zip(fixations, fixations[1:])]
    return fixations, saccades


def _valid_runs(samples: Iterable[GazeSample]) -> Iterator[list[GazeSample]]:
    run: list[GazeSample] = []
    for sample in samples:
        if sample.valid:
            run.append(sample)
        elif run:
            yield run
            run = []
    if run:
        yield run


def _scan_run(run: list[GazeSample], dispersion_px: float,
              min_duration_ms: int) -> Iterator[Fixation]:
    count = len(run)
    start = 0
    while start < count:
        # grow the window as far as the dispersion threshold allows
        min_x = max_x = run[start].x
        min_y = max_y = run[start].y
        end = start
        while end + 1 < count:
            nxt = run[end + 1]
            lo_x, hi_x = min(min_x, nxt.x), max(max_x, nxt.x)
            lo_y, hi_y = min(min_y, nxt.y), max(max_y, nxt.y)
            if (hi_x - lo_x) + (hi_y - lo_y) > dispersion_px:
                break
            min_x, max_x, min_y, max_y = lo_x, hi_x, lo_y, hi_y
            end += 1
        window = run[start:end + 1]
        if window[-1].t_ms - window[0].t_ms >= min_duration_ms:
            xs = [s.x for s in window]
            ys = [s.y for s in window]
            yield Fixation(window[0].t_ms, window[-1].t_ms,
                           sum(xs) / len(xs), sum(ys) / len(ys),
                           _dispersion(xs, ys), len(window))
            start = end + 1
        else:
            start += 1


# ---------------------------------------------------------------------------
# per-region statistics

@dataclass
class AoiStats:
    scene: str
    region: str
    dwell_ms: int = 0
    entry_count: int = 0
    first_entry_ms: Optional[int] = None
    reaction_count: int = 0


class AoiAccumulator:
    """Builds per-region gaze statistics while a run is stepped.

    Feed it one observation per tick (time, active scene and the names
    of the enabled regions under the gaze) plus the engine events.  The
    dwell of a region is the summed length of its inside intervals; an
    interval closes when the gaze leaves, the region goes away or the
    scene changes.
    """

    def __init__(self, document: GimlDocument):
        self._stats: dict[tuple[str, str], AoiStats] = {}
        for scene in document.scenes:
            for region in scene.regions:
                key = (scene.name, region.name)
                self._stats[key] = AoiStats(scene.name, region.name)
        self._open: dict[tuple[str, str], int] = {}
        self._scene: Optional[str] = None
        self._last_t: Optional[int] = None

    def observe(self, t_ms: int, scene: str,
                hit_names: Iterable[str]) -> None:
        if self._scene is not None and scene != self._scene:
            self._close_all(t_ms)
        self._scene = scene
        hits = set(hit_names)
        for key, stats in self._stats.items():
            if key[0] != scene:
                continue
            inside = key[1] in hits
            if inside and key not in self._open:
                self._open[key] = t_ms
                stats.entry_count += 1
                if stats.first_entry_ms is None:
                    stats.first_entry_ms = t_ms
            elif not inside and key in self._open:
                stats.dwell_ms += t_ms - self._open.pop(key)
        self._last_t = t_ms

    def note_event(self, event: EngineEvent) -> None:
        if event.kind != "ReactionStarted":
            return
        stats = self._stats.get((event.scene, event.region))
        if stats is not None:
            stats.reaction_count += 1

    def finish(self, t_ms: Optional[int] = None) -> None:
        end = t_ms if t_ms is not None else self._last_t
        if end is not None:
            self._close_all(end)

    def results(self) -> list[AoiStats]:
        return list(self._stats.values())

    def _close_all(self, t_ms: int) -> None:
        for key, entered in list(self._open.items()):
            self._stats[key].dwell_ms += t_ms - entered
        self._open.clear()


# ---------------------------------------------------------------------------
# headless replay

@dataclass(frozen=True)
class SampleRow:
    """One samples.csv row: the input sample plus what it landed on."""

    t_ms: int
    x: float
    y: float
    valid: bool
    pupil: Optional[float]
    scene: str
    region_hit: str


@dataclass
class Replay:
    engine: Engine
    rows: list[SampleRow]
    aoi: list[AoiStats]

    @property
    def events(self) -> list[EngineEvent]:
        return self.engine.events


def replay(document: GimlDocument, samples: Iterable[GazeSample],
           config: Optional[EngineConfig] = None,
           callbacks=None) -> Replay:
    """Run a document against a recorded trace, collecting the logs.

    The run ends at the end of the trace, or earlier when a sample
    carries the stop key (Escape).
    """
    config = config or EngineConfig()
    engine = Engine(document, config, callbacks)
    accumulator = AoiAccumulator(document)
    rows: list[SampleRow] = []
    seen_events = 0
    for event in engine.events:
        accumulator.note_event(event)
    seen_events = len(engine.events)
    last_t: Optional[int] = None
    for tick, sample in _snap_samples(samples, config.tick_ms):
        if any(key.casefold() == STOP_KEY for key in tick.keys):
            engine.stop(tick.t_ms)
            break
        engine.step(tick)
        last_t = tick.t_ms
        for event in engine.events[seen_events:]:
            accumulator.note_event(event)
        seen_events = len(engine.events)
        gaze = tick.gaze()
        hits = engine.hit_regions(gaze) if gaze is not None else []
        scene = engine.active_scene_name
        rows.append(SampleRow(tick.t_ms, sample.x, sample.y, sample.valid,
                              sample.pupil, scene, ";".join(hits)))
        accumulator.observe(tick.t_ms, scene, hits)
    if not engine.stopped:
        engine.stop(last_t if last_t is not None else 0)
    accumulator.finish(last_t)
    return Replay(engine, rows, accumulator.results())


# ---------------------------------------------------------------------------
# CSV writers

@dataclass(frozen=True)
class RunHeader:
    """Provenance comments written at the top of every run log."""

    document: str = ""
    seed: int = 0
    dwell_ms: int = 1000
    tick_ms: int = 10
    extra: tuple[str, ...] = ()  # further "key=value" marker lines

    def lines(self) -> list[str]:
        return [
            "# document=%s" % self.document,
            "# seed=%d" % self.seed,
            "# dwell_ms=%d" % self.dwell_ms,
            "# tick_ms=%d" % self.tick_ms,
        ] + ["# %s" % item for item in self.extra]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    return str(value)


def _write_csv(path, header: Optional[RunHeader], columns, rows) -> None:
    target = Path(path)
    try:
        with target.open("w", encoding="utf-8", newline="") as handle:
            if header is not None:
                for line in header.lines():
                    handle.write(line + "\n")
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_fmt(cell) for cell in row])
    except OSError:
        try:
            target.unlink()
        except OSError:
            pass
        raise


def write_samples_csv(path, rows: Iterable[object],
                      header: Optional[RunHeader] = None) -> None:
    """Write the per-tick sample log; accepts SampleRow or GazeSample."""
    def cells(row):
        return (row.t_ms, row.x, row.y, row.valid,
                getattr(row, "pupil", None),
                getattr(row, "scene", ""), getattr(row, "region_hit", ""))

    _write_csv(path, header,
               ("t_ms", "x", "y", "valid", "pupil", "scene", "region_hit"),
               (cells(row) for row in rows))


def write_events_csv(path, events: Iterable[EngineEvent],
                     header: Optional[RunHeader] = None) -> None:
    _write_csv(path, header, ("t_ms", "kind", "scene", "region", "payload"),
               ((e.t_ms, e.kind, e.scene, e.region, e.payload)
                for e in events))


def write_aoi_csv(path, stats: Iterable[AoiStats],
                  header: Optional[RunHeader] = None) -> None:
    _write_csv(path, header,
               ("scene", "region", "dwell_ms", "entry_count",
                "first_entry_ms", "reaction_count"),
               ((s.scene, s.region, s.dwell_ms, s.entry_count,
                 s.first_entry_ms, s.reaction_count) for s in stats))


def write_fixations_csv(path, fixations: Iterable[Fixation],
                        header: Optional[RunHeader] = None) -> None:
    _write_csv(path, header,
               ("start_ms", "end_ms", "duration_ms", "x", "y",
                "dispersion", "sample_count"),
               ((f.start_ms, f.end_ms, f.duration_ms, f.x, f.y,
                 f.dispersion, f.sample_count) for f in fixations))
