"""Live session server for a remote player.

One engine, one client at a time.  The client sends pointer or gaze
positions and key presses; the server steps the engine, streams back
every event and each changed frame, and writes the same CSV logs a
headless replay writes once the run stops.

Wire format: each message is one UTF-8 JSON object, length-delimited as
``<decimal byte count>\\n<payload>`` over a plain socket.  A client that
opens with an HTTP GET is upgraded to a WebSocket speaking the same JSON
payloads in text frames, which is what a browser needs.

The input clock belongs to the server: client timestamps are echoed back
but simulation time is assigned on arrival, either from the wall clock
quantized to the tick grid (live mode) or one tick per input message
(lockstep mode, exactly reproducible).  Logically the acceptor and the
engine form two workers joined by ordered queues; with a single client
the loop below serves both roles sequentially, the engine never waits
on a half-read message.
"""

from __future__ import annotations

import base64
import dataclasses
import hashlib
import json
import socket
import time
from pathlib import Path
from typing import Optional

from .engine import Engine, EngineConfig, InputTick
from .gazeio import (AoiAccumulator, RunHeader, SampleRow, write_aoi_csv,
                     write_events_csv, write_samples_csv)
from .model import GimlDocument

PROTOCOL_VERSION = 1

_WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"

_TEXT = 0x1
_CLOSE = 0x8
_PING = 0x9
_PONG = 0xA


class ProtocolError(RuntimeError):
    """A frame or message the wire format cannot contain."""


# ---------------------------------------------------------------------------
# connections

class _LengthConn:
    """Messages framed as ``<byte count>\\n<payload>``."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buffer = b""

    def _read_more(self) -> bool:
        chunk = self._sock.recv(65536)
        if not chunk:
            return False
        self._buffer += chunk
        return True

    def recv_message(self) -> Optional[dict]:
        while b"\n" not in self._buffer:
            if not self._read_more():
                return None
        head, self._buffer = self._buffer.split(b"\n", 1)
        try:
            size = int(head.decode("ascii").strip())
        except ValueError:
            raise ProtocolError("bad frame length %r" % head[:32])
        if size < 0 or size > 16 * 1024 * 1024:
            raise ProtocolError("unreasonable frame length %d" % size)
        while len(self._buffer) < size:
            if not self._read_more():
                return None
        payload, self._buffer = self._buffer[:size], self._buffer[size:]
        try:
            return json.loads(payload.decode("utf-8"))
        except ValueError:
            raise ProtocolError("frame payload is not valid JSON")

    def send_message(self, message: dict) -> None:
        payload = json.dumps(message, separators=(",", ":"),
                             sort_keys=True).encode("utf-8")
        self._sock.sendall(str(len(payload)).encode("ascii") + b"\n"
                           + payload)

    def close(self) -> None:
        self._sock.close()


class _WebSocketConn:
    """The same JSON payloads in standard WebSocket text frames."""

    def __init__(self, sock: socket.socket):
        self._sock = sock
        self._buffer = b""
        self._upgrade()

    def _fill(self, size: int) -> bool:
        while len(self._buffer) < size:
            chunk = self._sock.recv(65536)
            if not chunk:
                return False
            self._buffer += chunk
        return True

    def _take(self, size: int) -> bytes:
        data, self._buffer = self._buffer[:size], self._buffer[size:]
        return data

    def _upgrade(self) -> None:
        while b"\r\n\r\n" not in self._buffer:
            chunk = self._sock.recv(65536)
            if not chunk:
                raise ProtocolError("connection closed during upgrade")
            self._buffer += chunk
        raw, self._buffer = self._buffer.split(b"\r\n\r\n", 1)
        key = None
        for line in raw.decode("latin-1").split("\r\n")[1:]:
            name, _sep, value = line.partition(":")
            if name.strip().casefold() == "sec-websocket-key":
                key = value.strip()
        if not key:
            raise ProtocolError("upgrade request without a key")
        accept = base64.b64encode(hashlib.sha1(
            (key + _WS_GUID).encode("ascii")).digest()).decode("ascii")
        self._sock.sendall((
            "HTTP/1.1 101 Switching Protocols\r\n"
            "Upgrade: websocket\r\n"
            "Connection: Upgrade\r\n"
            "Sec-WebSocket-Accept: %s\r\n\r\n" % accept).encode("ascii"))

    def _recv_frame(self) -> Optional[tuple[int, bytes, bool]]:
        if not self._fill(2):
            return None
        first, second = self._take(2)
        fin = bool(first & 0x80)
        opcode = first & 0x0F
        masked = bool(second & 0x80)
        length = second & 0x7F
        if length == 126:
            if not self._fill(2):
                return None
            length = int.from_bytes(self._take(2), "big")
        elif length == 127:
            if not self._fill(8):
                return None
            length = int.from_bytes(self._take(8), "big")
        mask = b""
        if masked:
            if not self._fill(4):
                return None
            mask = self._take(4)
        if not self._fill(length):
            return None
        payload = self._take(length)
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        return opcode, payload, fin

    def _send_frame(self, opcode: int, payload: bytes) -> None:
        head = bytes([0x80 | opcode])
        length = len(payload)
        if length < 126:
            head += bytes([length])
        elif length < 1 << 16:
            head += bytes([126]) + length.to_bytes(2, "big")
        else:
            head += bytes([127]) + length.to_bytes(8, "big")
        self._sock.sendall(head + payload)

    def recv_message(self) -> Optional[dict]:
        text = b""
        while True:
            frame = self._recv_frame()
            if frame is None:
                return None
            opcode, payload, fin = frame
            if opcode == _CLOSE:
                try:
                    self._send_frame(_CLOSE, payload[:2])
                except OSError:
                    pass
                return None
            if opcode == _PING:
                self._send_frame(_PONG, payload)
                continue
            if opcode == _PONG:
                continue
            text += payload
            if not fin:
                continue
            try:
                return json.loads(text.decode("utf-8"))
            except ValueError:
                raise ProtocolError("frame payload is not valid JSON")

    def send_message(self, message: dict) -> None:
        payload = json.dumps(message, separators=(",", ":"),
                             sort_keys=True).encode("utf-8")
        self._send_frame(_TEXT, payload)

    def close(self) -> None:
        try:
            self._send_frame(_CLOSE, b"")
        except OSError:
            pass
        self._sock.close()


def _wrap(sock: socket.socket):
    """Sniff the opening bytes: an HTTP GET marks a WebSocket player.

    A plain protocol client stays silent until the server's hello, so
    the peek must give up quickly and fall back to length framing.
    """
    deadline = time.monotonic() + 0.5
    is_ws = False
    sock.settimeout(0.1)
    try:
        while time.monotonic() < deadline:
            try:
                peeked = sock.recv(4, socket.MSG_PEEK)
            except socket.timeout:
                break
            if not peeked or peeked != b"GET "[:len(peeked)]:
                break
            if len(peeked) == 4:
                is_ws = True
                break
            time.sleep(0.01)  # a strict prefix; wait for the rest
    finally:
        sock.settimeout(None)
    return _WebSocketConn(sock) if is_ws else _LengthConn(sock)


# ---------------------------------------------------------------------------
# the session

class Session:
    """One engine run, spanning any number of client connections."""

    def __init__(self, document: GimlDocument,
                 config: Optional[EngineConfig] = None,
                 lockstep: bool = False):
        self.config = config or EngineConfig()
        self.engine = Engine(document, self.config)
        self.lockstep = lockstep
        self.accumulator = AoiAccumulator(document)
        self.rows: list[SampleRow] = []
        self._seen_events = 0
        self._note_new_events()
        self._last_t: Optional[int] = None
        self._last_gaze: Optional[tuple[float, float]] = None
        self._started = time.monotonic()

    # -- clocking ----------------------------------------------------------

    def _next_t(self) -> int:
        tick = self.config.tick_ms
        if self.lockstep or self._last_t is None:
            return (self._last_t + tick) if self._last_t is not None else 0
        wall = int((time.monotonic() - self._started) * 1000)
        t = (wall // tick) * tick
        return max(t, self._last_t + tick)

    # -- engine feeding ----------------------------------------------------

    def _note_new_events(self) -> list:
        new = self.engine.events[self._seen_events:]
        self._seen_events = len(self.engine.events)
        for event in new:
            self.accumulator.note_event(event)
        return new

    def feed(self, x: Optional[float], y: Optional[float], valid: bool,
             keys: tuple[str, ...] = ()) -> list:
        """Step one tick; returns the events the tick produced."""
        if self.engine.stopped:
            return []
        t = self._next_t()
        if valid and x is not None and y is not None:
            tick = InputTick(t, float(x), float(y), keys=keys)
            self._last_gaze = (float(x), float(y))
        else:
            tick = InputTick(t, valid=False, keys=keys)
        self.engine.step(tick)
        self._last_t = t
        gaze = tick.gaze()
        hits = self.engine.hit_regions(gaze) if gaze is not None else []
        scene = self.engine.active_scene_name
        self.rows.append(SampleRow(t, tick.x or 0.0, tick.y or 0.0,
                                   tick.valid, None, scene, ";".join(hits)))
        self.accumulator.observe(t, scene, hits)
        return self._note_new_events()

    def feed_key(self, name: str) -> list:
        """A key press rides on a tick at the latest gaze position."""
        gaze = self._last_gaze
        if gaze is None:
            return self.feed(None, None, False, (name,))
        return self.feed(gaze[0], gaze[1], True, (name,))

    def stop(self) -> list:
        if not self.engine.stopped:
            self.engine.stop(self._last_t if self._last_t is not None else 0)
        self.accumulator.finish(self._last_t)
        return self._note_new_events()

    # -- logs --------------------------------------------------------------

    def write_logs(self, out_dir: Path, header: RunHeader) -> list[Path]:
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = [out_dir / "samples.csv", out_dir / "events.csv",
                 out_dir / "aoi.csv"]
        write_samples_csv(paths[0], self.rows, header)
        write_events_csv(paths[1], self.engine.events, header)
        write_aoi_csv(paths[2], self.accumulator.results(), header)
        return paths


def _frame_body(frame) -> dict:
    return dataclasses.asdict(frame)


def _event_body(event) -> dict:
    return dataclasses.asdict(event)


def _summary_body(document: GimlDocument) -> dict:
    return {
        "language": document.source_language,
        "default_scene": document.scenes_info.default_scene,
        "pause_scene": document.scenes_info.pause_scene,
        "scenes": [{"name": scene.name,
                    "regions": [r.name for r in scene.regions]}
                   for scene in document.scenes],
    }


class _Messenger:
    """Stamps the per-connection monotone sequence numbers."""

    def __init__(self, conn):
        self.conn = conn
        self.seq = 0

    def send(self, kind: str, **body) -> None:
        message = {"type": kind, "seq": self.seq}
        message.update(body)
        self.seq += 1
        self.conn.send_message(message)


def _serve_connection(messenger: _Messenger, session: Session,
                      document: GimlDocument) -> str:
    """Returns "stopped" or "disconnected"."""
    extent_x = session.engine.extent_x
    extent_y = session.engine.extent_y
    messenger.send("hello", protocol_version=PROTOCOL_VERSION,
                   screen_x=extent_x, screen_y=extent_y,
                   dwell_ms=session.config.dwell_ms,
                   tick_ms=session.config.tick_ms,
                   seed=session.config.seed)
    messenger.send("document_summary", **_summary_body(document))
    frame = session.engine.current_frame()
    messenger.send("frame", frame=_frame_body(frame))
    last_frame_seq = frame.frame_seq
    while True:
        message = messenger.conn.recv_message()
        if message is None:
            return "disconnected"
        kind = message.get("type")
        events = None
        if kind == "input":
            events = session.feed(message.get("x"), message.get("y"),
                                  bool(message.get("valid", True)))
        elif kind == "key":
            name = str(message.get("name", ""))
            if name.casefold() == "escape":
                events = session.stop()
            else:
                events = session.feed_key(name)
        elif kind == "control":
            action = str(message.get("action", ""))
            if action == "stop":
                events = session.stop()
            elif action == "pause":
                events = session.feed_key("pause")
            else:
                messenger.send("error",
                               message="unknown control %r" % action)
                continue
        elif kind == "bye":
            return "disconnected"
        else:
            messenger.send("error", message="unknown type %r" % kind)
            continue
        for event in events:
            messenger.send("event", event=_event_body(event))
        frame = session.engine.current_frame()
        if frame.frame_seq != last_frame_seq:
            last_frame_seq = frame.frame_seq
            messenger.send("frame", frame=_frame_body(frame))
        if session.engine.stopped:
            messenger.send("bye")
            return "stopped"


def serve(document: GimlDocument, host: str, port: int,
          config: Optional[EngineConfig] = None,
          out_dir: Optional[Path] = None,
          header: Optional[RunHeader] = None,
          sessions: int = 0, lockstep: bool = False,
          ready=None) -> Session:
    """Listen for one player at a time until the run stops.

    ``sessions`` caps how many connections are served (0 means no cap);
    the engine keeps its state between connections, so a reconnecting
    player resumes where it left.  ``ready`` is called with the bound
    (host, port) once the socket listens, which is how callers learn an
    ephemeral port.
    """
    session = Session(document, config, lockstep=lockstep)
    served = 0
    with socket.create_server((host, port)) as listener:
        if ready is not None:
            ready(listener.getsockname()[0], listener.getsockname()[1])
        while not session.engine.stopped:
            client, _address = listener.accept()
            try:
                conn = _wrap(client)
                messenger = _Messenger(conn)
                outcome = _serve_connection(messenger, session, document)
            except (ProtocolError, OSError):
                outcome = "disconnected"
            finally:
                client.close()
            served += 1
            if outcome == "stopped":
                break
            if sessions and served >= sessions:
                break
    if not session.engine.stopped:
        session.stop()
    if out_dir is not None:
        session.write_logs(Path(out_dir),
                           header if header is not None else RunHeader())
    return session
