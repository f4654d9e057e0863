"""Command line behaviour and the live session protocol."""

from __future__ import annotations

import base64
import hashlib
import json
import os
import socket
import struct
import threading
import time
from pathlib import Path

import pytest

from giml.cli import main
from giml.engine import EngineConfig
from giml.gazeio import RunHeader
from giml.parser import parse
from giml.server import serve

FIXTURES = Path(__file__).parent / "fixtures"

MINIMAL = """<settings language="en">
  <scenes nameOfDefaultScene="only"
    originalScreenSizeX="1024" originalScreenSizeY="768">
    <scene name="only" />
  </scenes>
</settings>"""


def write_trace(path, spans, step=10):
    """spans: (duration_ms, x, y) tuples laid end to end."""
    lines = ["# columns: t_ms,x,y,valid"]
    t = 0
    for duration, x, y in spans:
        for _ in range(duration // step):
            lines.append("%d,%s,%s,1" % (t, x, y))
            t += step
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


GOLDEN_SPANS = [(1600, 300, 200), (400, 1000, 740),
                (1600, 300, 200), (400, 1000, 740)]


# ---------------------------------------------------------------------------
# validate

def test_validate_accepts_the_navigation_fixture(capsys):
    assert main(["validate", str(FIXTURES / "two_scenes.xml")]) == 0
    out = capsys.readouterr().out
    assert "0 error(s)" in out


def test_validate_reports_broken_xml(tmp_path, capsys):
    bad = tmp_path / "bad.xml"
    bad.write_text("<settings><scenes>", encoding="utf-8")
    assert main(["validate", str(bad)]) == 1
    out = capsys.readouterr().out
    assert "error" in out


def test_validate_walks_directories(capsys):
    assert main(["validate", str(FIXTURES)]) == 0
    out = capsys.readouterr().out
    assert "checked" in out and " 0 error(s)" in out


def test_validate_missing_file_is_an_environment_failure(capsys):
    assert main(["validate", "no-such-file.xml"]) == 2


def test_validate_offers_spelling_suggestions(tmp_path, capsys):
    doc = tmp_path / "typo.xml"
    doc.write_text(MINIMAL.replace("nameOfDefaultScene",
                                   "nameOfDefaltScene"),
                   encoding="utf-8")
    main(["validate", str(doc)])
    out = capsys.readouterr().out
    assert "did you mean 'nameOfDefaultScene'" in out


# ---------------------------------------------------------------------------
# translate

def test_translate_writes_the_target_file(tmp_path, capsys):
    out = tmp_path / "two_scenes.pl.xml"
    assert main(["translate", str(FIXTURES / "two_scenes.xml"),
                 "--language", "pl", "-o", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert "ustawienia" in text  # the root element, in Polish


def test_translate_rejects_broken_documents(tmp_path, capsys):
    bad = tmp_path / "bad.xml"
    bad.write_text("<settings", encoding="utf-8")
    assert main(["translate", str(bad), "--language", "de"]) == 1


def test_translate_prints_to_stdout_by_default(capsys):
    assert main(["translate", str(FIXTURES / "two_scenes.xml"),
                 "--language", "en"]) == 0
    assert "<settings" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# inspect

def test_inspect_counts_the_three_state_region(capsys):
    assert main(["inspect", str(FIXTURES / "three_state_text.xml")]) == 0
    out = capsys.readouterr().out
    assert "scenes: 1" in out
    assert "regions: 1" in out
    assert "state overlays: 3" in out


def test_inspect_of_an_empty_scene(tmp_path, capsys):
    doc = tmp_path / "minimal.xml"
    doc.write_text(MINIMAL, encoding="utf-8")
    assert main(["inspect", str(doc)]) == 0
    out = capsys.readouterr().out
    assert "scenes: 1" in out
    assert "regions: 0" in out


def test_inspect_rejects_unparseable_input(tmp_path, capsys):
    bad = tmp_path / "bad.xml"
    bad.write_text("<a><b></a>", encoding="utf-8")
    assert main(["inspect", str(bad)]) == 1


@pytest.mark.parametrize("language", ["fr", "de", "pl"])
def test_translation_does_not_change_the_model(tmp_path, capsys, language):
    source = FIXTURES / "two_scenes.xml"
    translated = tmp_path / ("t.%s.xml" % language)
    main(["translate", str(source), "--language", language,
          "-o", str(translated)])
    capsys.readouterr()
    main(["inspect", str(source)])
    original_dump = capsys.readouterr().out
    main(["inspect", str(translated)])
    translated_dump = capsys.readouterr().out
    strip = lambda text: text.splitlines()[1:]
    assert strip(original_dump) == strip(translated_dump)


# ---------------------------------------------------------------------------
# run

def test_run_replays_the_navigation_golden_trace(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    write_trace(trace, GOLDEN_SPANS)
    out_dir = tmp_path / "logs"
    assert main(["run", str(FIXTURES / "two_scenes.xml"),
                 "--trace", str(trace), "--out-dir", str(out_dir)]) == 0
    printed = capsys.readouterr().out
    assert "seed: 0" in printed
    events = (out_dir / "events.csv").read_text(encoding="utf-8")
    rows = [line for line in events.splitlines()
            if "SceneEntered" in line]
    assert "1000,SceneEntered,scene2,," in rows
    assert "3000,SceneEntered,scene1,," in rows
    assert rows.index("1000,SceneEntered,scene2,,") \
        < rows.index("3000,SceneEntered,scene1,,")
    for name in ("samples.csv", "aoi.csv", "fixations.csv"):
        assert (out_dir / name).exists()


def test_run_with_an_empty_trace_writes_header_only_logs(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    trace.write_text("# columns: t_ms,x,y,valid\n", encoding="utf-8")
    out_dir = tmp_path / "logs"
    assert main(["run", str(FIXTURES / "two_scenes.xml"),
                 "--trace", str(trace), "--out-dir", str(out_dir)]) == 0
    events = (out_dir / "events.csv").read_text(encoding="utf-8")
    assert events.endswith("t_ms,kind,scene,region,payload\n")
    assert "seed: 0" in capsys.readouterr().out


def test_run_twice_with_one_seed_is_byte_identical(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    write_trace(trace, GOLDEN_SPANS)
    for name in ("a", "b"):
        assert main(["run", str(FIXTURES / "two_scenes.xml"),
                     "--trace", str(trace), "--seed", "9",
                     "--out-dir", str(tmp_path / name)]) == 0
    for log in ("samples.csv", "events.csv", "aoi.csv", "fixations.csv"):
        assert (tmp_path / "a" / log).read_bytes() \
            == (tmp_path / "b" / log).read_bytes()


def test_run_requires_a_readable_trace(tmp_path, capsys):
    assert main(["run", str(FIXTURES / "two_scenes.xml"),
                 "--trace", str(tmp_path / "missing.csv"),
                 "--out-dir", str(tmp_path)]) == 2


def test_run_rejects_invalid_documents(tmp_path, capsys):
    doc = tmp_path / "bad.xml"
    doc.write_text(MINIMAL.replace('nameOfDefaultScene="only"',
                                   'nameOfDefaultScene="absent"'),
                   encoding="utf-8")
    trace = tmp_path / "trace.csv"
    write_trace(trace, [(100, 10, 10)])
    assert main(["run", str(doc), "--trace", str(trace),
                 "--out-dir", str(tmp_path / "logs")]) == 1


def test_keywords_subcommand_prints_the_table(capsys):
    assert main(["keywords"]) == 0
    out = capsys.readouterr().out
    assert "dwellTime" in out and "rozmiarX" in out


# ---------------------------------------------------------------------------
# serve: protocol plumbing

class Client:
    """Length-delimited JSON client with a background reader."""

    def __init__(self, port):
        self.sock = socket.create_connection(("127.0.0.1", port), timeout=10)
        self.messages = []
        self._lock = threading.Condition()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()

    def _read_loop(self):
        buffer = b""
        try:
            while True:
                while b"\n" not in buffer:
                    chunk = self.sock.recv(65536)
                    if not chunk:
                        return
                    buffer += chunk
                head, buffer = buffer.split(b"\n", 1)
                size = int(head)
                while len(buffer) < size:
                    chunk = self.sock.recv(65536)
                    if not chunk:
                        return
                    buffer += chunk
                payload, buffer = buffer[:size], buffer[size:]
                with self._lock:
                    self.messages.append(json.loads(payload))
                    self._lock.notify_all()
        except OSError:
            pass

    def send(self, **body):
        payload = json.dumps(body).encode("utf-8")
        self.sock.sendall(str(len(payload)).encode() + b"\n" + payload)

    def wait_for(self, predicate, timeout=10.0):
        deadline = time.monotonic() + timeout
        with self._lock:
            while True:
                for message in self.messages:
                    if predicate(message):
                        return message
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise AssertionError(
                        "no matching message; got %r"
                        % [m.get("type") for m in self.messages])
                self._lock.wait(remaining)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


def start_server(document_name="two_scenes.xml", **kwargs):
    doc = parse((FIXTURES / document_name).read_bytes())
    bound = {}
    ready = threading.Event()

    def on_ready(host, port):
        bound["port"] = port
        ready.set()

    kwargs.setdefault("config", EngineConfig(seed=3))
    kwargs.setdefault("lockstep", True)
    thread = threading.Thread(
        target=serve, args=(doc, "127.0.0.1", 0),
        kwargs=dict(kwargs, ready=on_ready), daemon=True)
    thread.start()
    assert ready.wait(10), "server did not come up"
    return bound["port"], thread


def test_session_opens_with_hello_and_summary():
    port, thread = start_server(sessions=1)
    client = Client(port)
    hello = client.wait_for(lambda m: m["type"] == "hello")
    assert hello["seq"] == 0
    assert hello["protocol_version"] == 1
    assert hello["dwell_ms"] == 1000
    assert (hello["screen_x"], hello["screen_y"]) == (1024, 768)
    summary = client.wait_for(lambda m: m["type"] == "document_summary")
    assert summary["default_scene"] == "scene1"
    assert [s["name"] for s in summary["scenes"]] == ["scene1", "scene2"]
    first_frame = client.wait_for(lambda m: m["type"] == "frame")
    assert first_frame["frame"]["scene"] == "scene1"
    client.send(type="control", action="stop")
    client.wait_for(lambda m: m["type"] == "bye")
    client.close()
    thread.join(10)


def test_dwelling_pointer_stream_reaches_a_reaction():
    port, thread = start_server(sessions=1)
    client = Client(port)
    client.wait_for(lambda m: m["type"] == "frame")
    for _ in range(120):  # 1.2 s of pointer samples in lockstep
        client.send(type="input", x=300, y=200, valid=True)
    started = client.wait_for(
        lambda m: m["type"] == "event"
        and m["event"]["kind"] == "ReactionStarted")
    assert started["event"]["t_ms"] == 1000
    client.wait_for(lambda m: m["type"] == "frame"
                    and m["frame"]["scene"] == "scene2")
    client.send(type="control", action="stop")
    client.wait_for(lambda m: m["type"] == "bye")
    client.close()
    thread.join(10)


def test_unknown_message_type_gets_an_error_and_the_session_lives():
    port, thread = start_server(sessions=1)
    client = Client(port)
    client.wait_for(lambda m: m["type"] == "hello")
    client.send(type="telemetry", value=1)
    client.wait_for(lambda m: m["type"] == "error")
    client.send(type="input", x=10, y=10, valid=True)  # still served
    client.send(type="control", action="stop")
    client.wait_for(lambda m: m["type"] == "bye")
    client.close()
    thread.join(10)


def test_stop_flushes_the_same_logs_as_a_headless_run(tmp_path):
    trace = tmp_path / "trace.csv"
    write_trace(trace, [(1200, 300, 200), (400, 1000, 740)])
    run_dir = tmp_path / "run"
    assert main(["run", str(FIXTURES / "two_scenes.xml"),
                 "--trace", str(trace), "--seed", "3",
                 "--out-dir", str(run_dir)]) == 0

    serve_dir = tmp_path / "serve"
    header = RunHeader(document=str(FIXTURES / "two_scenes.xml"), seed=3,
                       dwell_ms=1000, tick_ms=10)
    port, thread = start_server(sessions=1, out_dir=serve_dir, header=header)
    client = Client(port)
    client.wait_for(lambda m: m["type"] == "frame")
    for _ in range(120):
        client.send(type="input", x=300, y=200, valid=True)
    for _ in range(40):
        client.send(type="input", x=1000, y=740, valid=True)
    client.send(type="control", action="stop")
    client.wait_for(lambda m: m["type"] == "bye")
    client.close()
    thread.join(10)
    assert not thread.is_alive()

    run_events = (run_dir / "events.csv").read_bytes()
    serve_events = (serve_dir / "events.csv").read_bytes()
    assert run_events == serve_events
    assert (run_dir / "samples.csv").read_bytes() \
        == (serve_dir / "samples.csv").read_bytes()
    assert (run_dir / "aoi.csv").read_bytes() \
        == (serve_dir / "aoi.csv").read_bytes()


def test_client_can_reconnect_and_resume():
    port, thread = start_server(sessions=2)
    first = Client(port)
    first.wait_for(lambda m: m["type"] == "frame")
    for _ in range(30):
        first.send(type="input", x=300, y=200, valid=True)
    first.wait_for(lambda m: m["type"] == "frame"
                   and m["frame"]["regions"][0]["state"] == "activated")
    first.send(type="bye")
    first.close()

    second = Client(port)
    hello = second.wait_for(lambda m: m["type"] == "hello")
    assert hello["seq"] == 0  # fresh connection, fresh sequence
    resumed = second.wait_for(lambda m: m["type"] == "frame")
    assert resumed["frame"]["regions"][0]["state"] == "activated"
    second.send(type="control", action="stop")
    second.wait_for(lambda m: m["type"] == "bye")
    second.close()
    thread.join(10)


def test_escape_key_message_stops_the_run():
    port, thread = start_server(sessions=1)
    client = Client(port)
    client.wait_for(lambda m: m["type"] == "hello")
    client.send(type="input", x=10, y=10, valid=True)
    client.send(type="key", name="Escape")
    client.wait_for(lambda m: m["type"] == "event"
                    and m["event"]["kind"] == "EngineStopped")
    client.wait_for(lambda m: m["type"] == "bye")
    client.close()
    thread.join(10)
    assert not thread.is_alive()


def test_pause_control_navigates_to_the_pause_scene(tmp_path):
    source = (FIXTURES / "two_scenes.xml").read_text(encoding="utf-8")
    with_pause = source.replace(
        'nameOfDefaultScene="scene1"',
        'nameOfDefaultScene="scene1" nameOfPauseScene="scene2"')
    target = tmp_path / "pausable.xml"
    target.write_text(with_pause, encoding="utf-8")
    doc = parse(target.read_bytes())
    bound = {}
    ready = threading.Event()

    def on_ready(host, port):
        bound["port"] = port
        ready.set()

    thread = threading.Thread(
        target=serve, args=(doc, "127.0.0.1", 0),
        kwargs=dict(config=EngineConfig(), lockstep=True, sessions=1,
                    ready=on_ready), daemon=True)
    thread.start()
    assert ready.wait(10)
    client = Client(bound["port"])
    client.wait_for(lambda m: m["type"] == "hello")
    client.send(type="input", x=10, y=10, valid=True)
    client.send(type="control", action="pause")
    client.wait_for(lambda m: m["type"] == "frame"
                    and m["frame"]["scene"] == "scene2")
    client.send(type="control", action="stop")
    client.wait_for(lambda m: m["type"] == "bye")
    client.close()
    thread.join(10)


# ---------------------------------------------------------------------------
# serve: WebSocket upgrade

def ws_encode(payload: bytes, mask=b"\x11\x22\x33\x44") -> bytes:
    head = bytes([0x81])
    length = len(payload)
    if length < 126:
        head += bytes([0x80 | length])
    else:
        head += bytes([0x80 | 126]) + struct.pack(">H", length)
    body = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
    return head + mask + body


def ws_read_frame(sock, buffer: bytearray) -> tuple[int, bytes]:
    def need(size):
        while len(buffer) < size:
            chunk = sock.recv(65536)
            if not chunk:
                raise AssertionError("server closed mid frame")
            buffer.extend(chunk)

    need(2)
    opcode = buffer[0] & 0x0F
    length = buffer[1] & 0x7F
    offset = 2
    if length == 126:
        need(4)
        length = struct.unpack(">H", bytes(buffer[2:4]))[0]
        offset = 4
    elif length == 127:
        need(10)
        length = struct.unpack(">Q", bytes(buffer[2:10]))[0]
        offset = 10
    need(offset + length)
    payload = bytes(buffer[offset:offset + length])
    del buffer[:offset + length]
    return opcode, payload


def test_browser_style_websocket_upgrade_speaks_the_same_protocol():
    port, thread = start_server(sessions=1)
    sock = socket.create_connection(("127.0.0.1", port), timeout=10)
    key = base64.b64encode(os.urandom(16)).decode("ascii")
    sock.sendall((
        "GET /session HTTP/1.1\r\n"
        "Host: 127.0.0.1\r\n"
        "Upgrade: websocket\r\n"
        "Connection: Upgrade\r\n"
        "Sec-WebSocket-Key: %s\r\n"
        "Sec-WebSocket-Version: 13\r\n\r\n" % key).encode("ascii"))
    response = b""
    while b"\r\n\r\n" not in response:
        response += sock.recv(65536)
    head, remainder = response.split(b"\r\n\r\n", 1)
    assert b"101 Switching Protocols" in head
    expected = base64.b64encode(hashlib.sha1(
        (key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11").encode()).digest())
    assert expected in head

    buffer = bytearray(remainder)
    _opcode, payload = ws_read_frame(sock, buffer)
    hello = json.loads(payload)
    assert hello["type"] == "hello" and hello["seq"] == 0

    sock.sendall(ws_encode(json.dumps(
        {"type": "control", "action": "stop"}).encode("utf-8")))
    seen_bye = False
    for _ in range(20):
        opcode, payload = ws_read_frame(sock, buffer)
        if opcode == 0x1 and json.loads(payload)["type"] == "bye":
            seen_bye = True
            break
    assert seen_bye
    sock.close()
    thread.join(10)
