"""Trace files, fixation detection and the CSV run logs."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from giml.engine import EngineConfig
from giml.gazeio import (AoiAccumulator, GazeSample, RunHeader, TraceError,
                         detect_fixations, read_trace, replay,
                         ticks_from_samples, write_aoi_csv, write_events_csv,
                         write_fixations_csv, write_samples_csv)
from giml.parser import parse

FIXTURES = Path(__file__).parent / "fixtures"

DOC = """<settings language="en">
  <scenes nameOfDefaultScene="scene1"
    originalScreenSizeX="1024" originalScreenSizeY="768">
    <scene name="scene1">
      <region name="region1" shape="rectangle"
        locationOfCenterX="300" locationOfCenterY="200"
        sizeX="200" sizeY="200" />
      <region name="region2" shape="rectangle"
        locationOfCenterX="700" locationOfCenterY="500"
        sizeX="200" sizeY="200" />
    </scene>
  </scenes>
</settings>"""


def build_doc(text=DOC):
    doc = parse(text.encode("utf-8"))
    assert doc.diagnostics == [], doc.diagnostics
    return doc


def fixture(name):
    doc = parse((FIXTURES / name).read_bytes())
    assert not [d for d in doc.diagnostics if d.severity == "error"]
    return doc


def still(t0, ms, x, y, step=10):
    return [GazeSample(t0 + i * step, x, y) for i in range(ms // step)]


# ---------------------------------------------------------------------------
# trace reading

def test_plain_three_line_trace():
    trace = read_trace(["0,100,100,1", "10,100,100,1", "20,100,100,1"])
    assert len(trace.samples) == 3
    assert trace.skipped_lines == 0
    assert trace.samples[0] == GazeSample(0, 100.0, 100.0, True)


def test_malformed_line_is_skipped_and_counted():
    trace = read_trace(["0,100,100,1", "10,oops,100,1", "20,100,100,1"])
    assert len(trace.samples) == 2
    assert trace.skipped_lines == 1


def test_comment_header_reorders_columns():
    trace = read_trace(["# columns: x,y,t_ms,valid",
                        "5,6,100,1"])
    assert trace.samples == [GazeSample(100, 5.0, 6.0, True)]


def test_leading_plain_header_row_is_understood():
    trace = read_trace(["t_ms,x,y,valid,pupil",
                        "0,10,20,1,3.5"])
    assert trace.samples[0].pupil == 3.5


def test_header_without_coordinates_is_fatal():
    with pytest.raises(TraceError):
        read_trace(["# columns: t_ms,valid"])


def test_comments_and_blank_lines_are_ignored():
    trace = read_trace(["# recorded with the pointer adapter", "",
                        "0,1,2", "   ", "# midway note", "10,3,4"])
    assert [s.t_ms for s in trace.samples] == [0, 10]


def test_invalid_samples_may_omit_coordinates():
    trace = read_trace(["# columns: t_ms,x,y,valid",
                        "0,100,100,1", "10,,,0", "20,100,100,1"])
    assert trace.skipped_lines == 0
    assert trace.samples[1].valid is False


def test_backward_time_steps_are_skipped():
    trace = read_trace(["0,1,1", "500,1,1", "100,1,1", "600,1,1"])
    assert [s.t_ms for s in trace.samples] == [0, 500, 600]
    assert trace.skipped_lines == 1


def test_key_column_is_passed_through():
    trace = read_trace(["# columns: t_ms,x,y,valid,key",
                        "0,1,2,1,", "10,1,2,1,Escape"])
    assert trace.samples[1].key == "Escape"


def test_ticks_snap_to_the_grid_and_deduplicate():
    samples = [GazeSample(0, 1, 1), GazeSample(7, 2, 2),
               GazeSample(14, 3, 3), GazeSample(21, 4, 4)]
    ticks = ticks_from_samples(samples, 10)
    assert [t.t_ms for t in ticks] == [0, 10, 20]
    assert ticks[1].x == 3.0  # the later of the two colliding samples


def test_trace_file_round_trip(tmp_path):
    path = tmp_path / "trace.csv"
    path.write_text("# columns: t_ms,x,y,valid\n0,1,2,1\n10,3,4,0\n",
                    encoding="utf-8")
    trace = read_trace(path)
    assert [s.valid for s in trace.samples] == [True, False]


finite = st.floats(-10000, 10000, allow_nan=False, allow_infinity=False)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 500), finite, finite,
                          st.booleans(),
                          st.one_of(st.none(), st.floats(0.5, 9,
                                                         allow_nan=False))),
                min_size=1, max_size=60))
def test_written_samples_read_back_identically(rows):
    t = 0
    samples = []
    for dt, x, y, valid, pupil in rows:
        samples.append(GazeSample(t, x, y, valid, pupil))
        t += dt
    fd, name = tempfile.mkstemp(suffix=".csv")
    os.close(fd)
    try:
        write_samples_csv(name, samples)
        back = read_trace(name)
    finally:
        os.unlink(name)
    assert back.skipped_lines == 0
    assert [(s.t_ms, s.x, s.y, s.valid) for s in back.samples] \
        == [(s.t_ms, s.x, s.y, s.valid) for s in samples]


# ---------------------------------------------------------------------------
# fixation detection

def test_stationary_gaze_is_one_fixation():
    samples = still(0, 210, 500, 400)
    fixations, saccades = detect_fixations(samples, 50, 100)
    assert len(fixations) == 1 and saccades == []
    fix = fixations[0]
    assert (fix.x, fix.y) == (500.0, 400.0)
    assert fix.dispersion == 0.0
    assert (fix.start_ms, fix.end_ms) == (0, 200)
    assert fix.sample_count == 21


def test_two_clusters_give_two_fixations_and_a_saccade():
    samples = still(0, 150, 100, 100) + still(150, 150, 600, 400)
    fixations, saccades = detect_fixations(samples, 50, 100)
    assert [(f.x, f.y) for f in fixations] == [(100, 100), (600, 400)]
    assert len(saccades) == 1
    assert saccades[0].amplitude == pytest.approx(
        math.hypot(500, 300), abs=0.1)  # about 583.1
    assert saccades[0].start_ms == fixations[0].end_ms
    assert saccades[0].end_ms == fixations[1].start_ms


def test_constant_large_jumps_yield_no_fixations():
    samples = [GazeSample(i * 10, 0 if i % 2 else 300, 0)
               for i in range(100)]
    fixations, _ = detect_fixations(samples, 80, 100)
    assert fixations == []


def test_invalid_samples_split_the_window():
    samples = (still(0, 150, 100, 100)
               + [GazeSample(150, 100, 100, valid=False)]
               + still(160, 150, 100, 100))
    fixations, _ = detect_fixations(samples, 50, 100)
    assert [(f.start_ms, f.end_ms) for f in fixations] == [(0, 140),
                                                           (160, 300)]


def test_short_settlements_are_not_fixations():
    samples = still(0, 60, 100, 100) + still(60, 60, 600, 400)
    fixations, _ = detect_fixations(samples, 50, 100)
    assert fixations == []


def brute_force_windows(samples, dispersion_px, min_duration_ms):
    """Exhaustive maximal-window scan; the slow reference answer."""
    spans = []
    run = []
    runs = []
    for sample in samples:
        if sample.valid:
            run.append(sample)
        elif run:
            runs.append(run)
            run = []
    if run:
        runs.append(run)
    for run in runs:
        i = 0
        while i < len(run):
            best = None
            for j in range(i, len(run)):
                xs = [s.x for s in run[i:j + 1]]
                ys = [s.y for s in run[i:j + 1]]
                if (max(xs) - min(xs)) + (max(ys) - min(ys)) > dispersion_px:
                    break
                if run[j].t_ms - run[i].t_ms >= min_duration_ms:
                    best = j
            if best is None:
                i += 1
            else:
                spans.append((run[i].t_ms, run[best].t_ms))
                i = best + 1
    return spans


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1024, allow_nan=False),
                          st.floats(0, 768, allow_nan=False),
                          st.integers(0, 12)),
                min_size=2, max_size=300),
       st.integers(20, 150))
def test_detection_matches_the_exhaustive_scan(points, threshold):
    samples = [GazeSample(i * 10, x, y, valid > 0)
               for i, (x, y, valid) in enumerate(points)]
    fixations, _ = detect_fixations(samples, float(threshold), 100)
    assert [(f.start_ms, f.end_ms) for f in fixations] \
        == brute_force_windows(samples, float(threshold), 100)


# ---------------------------------------------------------------------------
# per-region statistics

def test_single_visit_measures_the_interval():
    doc = build_doc()
    samples = (still(0, 500, 40, 40) + still(500, 1500, 300, 200)
               + still(2000, 500, 40, 40))
    result = replay(doc, samples)
    stats = {s.region: s for s in result.aoi}
    assert stats["region1"].dwell_ms == 1500
    assert stats["region1"].entry_count == 1
    assert stats["region1"].first_entry_ms == 500
    assert stats["region1"].reaction_count == 1  # dwell ran its second
    assert stats["region2"].dwell_ms == 0
    assert stats["region2"].first_entry_ms is None


def test_two_visits_accumulate():
    doc = build_doc()
    samples = (still(0, 300, 300, 200) + still(300, 400, 40, 40)
               + still(700, 700, 300, 200) + still(1400, 200, 40, 40))
    result = replay(doc, samples)
    stats = {s.region: s for s in result.aoi}
    assert stats["region1"].dwell_ms == 1000
    assert stats["region1"].entry_count == 2
    assert stats["region1"].reaction_count == 0  # both visits under 1 s


def test_gaze_elsewhere_leaves_all_zeros():
    doc = build_doc()
    result = replay(doc, still(0, 1000, 40, 40))
    for stats in result.aoi:
        assert stats.dwell_ms == 0
        assert stats.entry_count == 0
        assert stats.first_entry_ms is None
        assert stats.reaction_count == 0


def test_open_interval_closes_at_trace_end():
    doc = build_doc()
    result = replay(doc, still(0, 800, 300, 200))
    stats = {s.region: s for s in result.aoi}
    assert stats["region1"].dwell_ms == 790  # first to last observed tick


def test_accumulator_closes_intervals_on_scene_change():
    accumulator = AoiAccumulator(fixture("two_scenes.xml"))
    accumulator.observe(0, "scene1", ["region1"])
    accumulator.observe(500, "scene2", [])
    accumulator.finish(900)
    stats = {(s.scene, s.region): s for s in accumulator.results()}
    assert stats[("scene1", "region1")].dwell_ms == 500


def _inside(x, y, cx, cy, half):
    return abs(x - cx) <= half and abs(y - cy) <= half


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 1024, allow_nan=False),
                          st.floats(0, 768, allow_nan=False),
                          st.booleans()),
                min_size=2, max_size=200))
def test_disjoint_region_dwell_matches_the_union_time(points):
    samples = [GazeSample(i * 10, x, y, valid)
               for i, (x, y, valid) in enumerate(points)]
    result = replay(build_doc(), samples)
    total = sum(s.dwell_ms for s in result.aoi)

    union = 0
    entered = None
    for sample in samples:
        inside = sample.valid and (
            _inside(sample.x, sample.y, 300, 200, 100)
            or _inside(sample.x, sample.y, 700, 500, 100))
        if inside and entered is None:
            entered = sample.t_ms
        elif not inside and entered is not None:
            union += sample.t_ms - entered
            entered = None
    if entered is not None:
        union += samples[-1].t_ms - entered

    assert total == union
    assert total <= samples[-1].t_ms - samples[0].t_ms


# ---------------------------------------------------------------------------
# replay

def test_replay_walks_both_scenes():
    result = replay(fixture("two_scenes.xml"), still(0, 2500, 300, 200))
    kinds = [(e.kind, e.scene) for e in result.events]
    assert ("SceneEntered", "scene2") in kinds
    assert result.rows[0].scene == "scene1"
    assert result.rows[-1].scene == "scene1"  # back after the second dwell
    assert any(row.scene == "scene2" for row in result.rows)
    assert result.rows[5].region_hit == "region1"


def test_escape_key_ends_the_run_early():
    samples = still(0, 1000, 40, 40)
    samples.append(GazeSample(1000, 40, 40, key="Escape"))
    samples.extend(still(1010, 500, 40, 40))
    result = replay(build_doc(), samples)
    assert result.engine.stopped
    assert result.events[-1].kind == "EngineStopped"
    assert result.events[-1].t_ms == 1000
    assert len(result.rows) == 100  # nothing after the stop


def test_replay_without_samples_still_stops_cleanly():
    result = replay(build_doc(), [])
    assert [e.kind for e in result.events][0] == "SceneEntered"
    assert result.events[-1].kind == "EngineStopped"
    assert result.rows == []


# ---------------------------------------------------------------------------
# CSV writers

HEADER = RunHeader(document="demo.xml", seed=7, dwell_ms=1000, tick_ms=10)


def test_empty_logs_are_header_only(tmp_path):
    write_events_csv(tmp_path / "events.csv", [], HEADER)
    text = (tmp_path / "events.csv").read_text(encoding="utf-8")
    assert text == ("# document=demo.xml\n# seed=7\n"
                    "# dwell_ms=1000\n# tick_ms=10\n"
                    "t_ms,kind,scene,region,payload\n")


def test_event_log_contains_the_scene_switch(tmp_path):
    result = replay(fixture("two_scenes.xml"), still(0, 2500, 300, 200))
    write_events_csv(tmp_path / "events.csv", result.events, HEADER)
    lines = (tmp_path / "events.csv").read_text(encoding="utf-8").splitlines()
    assert "1000,SceneEntered,scene2,," in lines


def test_same_seed_runs_write_identical_bytes(tmp_path):
    for name in ("one.csv", "two.csv"):
        result = replay(fixture("two_scenes.xml"),
                        still(0, 2500, 300, 200),
                        EngineConfig(seed=5))
        write_events_csv(tmp_path / name, result.events, HEADER)
    assert (tmp_path / "one.csv").read_bytes() \
        == (tmp_path / "two.csv").read_bytes()


def test_sample_log_records_hits(tmp_path):
    result = replay(build_doc(), still(0, 100, 300, 200))
    write_samples_csv(tmp_path / "samples.csv", result.rows, HEADER)
    lines = (tmp_path / "samples.csv").read_text(
        encoding="utf-8").splitlines()
    assert lines[4] == "t_ms,x,y,valid,pupil,scene,region_hit"
    assert lines[5] == "0,300,200,1,,scene1,region1"


def test_aoi_log_has_one_row_per_region(tmp_path):
    result = replay(build_doc(), still(0, 2000, 300, 200))
    write_aoi_csv(tmp_path / "aoi.csv", result.aoi, HEADER)
    lines = (tmp_path / "aoi.csv").read_text(encoding="utf-8").splitlines()
    assert lines[4] == ("scene,region,dwell_ms,entry_count,"
                        "first_entry_ms,reaction_count")
    assert lines[5] == "scene1,region1,1990,1,0,1"
    assert lines[6] == "scene1,region2,0,0,,0"


def test_fixation_log_lists_each_window(tmp_path):
    fixations, _ = detect_fixations(still(0, 210, 500, 400), 50, 100)
    write_fixations_csv(tmp_path / "fix.csv", fixations, HEADER)
    lines = (tmp_path / "fix.csv").read_text(encoding="utf-8").splitlines()
    assert lines[5] == "0,200,200,500,400,0,21"
