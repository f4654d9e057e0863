"""Run the demo board against a synthetic gaze trace, no server needed.

Writes the four log files under demos/out/ and prints the event stream.
The shell equivalent, given the same trace in a file, is:

    giml run demos/board.xml --trace trace.csv --out-dir demos/out
"""

from __future__ import annotations

from pathlib import Path

from giml.engine import EngineConfig
from giml.gazeio import (GazeSample, RunHeader, detect_fixations, replay,
                         write_aoi_csv, write_events_csv,
                         write_fixations_csv, write_samples_csv)
from giml.parser import parse

HERE = Path(__file__).parent

SPANS = [
    (1300, 300, 300),   # speak: Hello!
    (400, 512, 60),     # glance at nothing
    (1300, 300, 300),   # speak again: Thank you
    (1300, 724, 300),   # rest -> pause scene
    (400, 100, 700),
    (1800, 512, 384),   # wake (dwell time 1500)
    (400, 100, 700),
]


def scripted_trace():
    samples, t = [], 0
    for duration, x, y in SPANS:
        for _ in range(duration // 10):
            samples.append(GazeSample(t, float(x), float(y)))
            t += 10
    return samples


def main():
    out = HERE / "out"
    out.mkdir(exist_ok=True)
    doc = parse((HERE / "board.xml").read_bytes())
    samples = scripted_trace()

    result = replay(doc, samples, EngineConfig(seed=7))
    header = RunHeader(document="board.xml", seed=7)
    write_samples_csv(out / "samples.csv", result.rows, header)
    write_events_csv(out / "events.csv", result.events, header)
    write_aoi_csv(out / "aoi.csv", result.aoi, header)
    fixations, saccades = detect_fixations(samples)
    write_fixations_csv(out / "fixations.csv", fixations, header)

    for event in result.events:
        print("%6d  %-18s %-8s %-8s %s"
              % (event.t_ms, event.kind, event.scene, event.region,
                 event.payload))
    print()
    print("%d fixations, %d saccades; logs in %s"
          % (len(fixations), len(saccades), out))


if __name__ == "__main__":
    main()
