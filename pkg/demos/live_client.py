"""Drive a live serve session with a scripted pointer.

Starts ``giml serve`` on an ephemeral port, connects with the
length-delimited JSON framing, steers the gaze across the demo board
and prints every event the engine reports, then asks it to stop.
"""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import threading
from pathlib import Path

HERE = Path(__file__).parent

SPANS = [
    (1300, 300, 300),
    (400, 512, 60),
    (1300, 300, 300),
    (1300, 724, 300),
    (400, 100, 700),
    (1800, 512, 384),
    (400, 100, 700),
]


def send(sock, kind, **body):
    body["type"] = kind
    payload = json.dumps(body).encode("utf-8")
    sock.sendall(b"%d\n%s" % (len(payload), payload))


def read_messages(sock):
    buffer = b""
    while True:
        while b"\n" not in buffer:
            chunk = sock.recv(65536)
            if not chunk:
                return
            buffer += chunk
        head, _, buffer = buffer.partition(b"\n")
        length = int(head)
        while len(buffer) < length:
            buffer += sock.recv(65536)
        yield json.loads(buffer[:length])
        buffer = buffer[length:]


def printer(sock, done):
    for message in read_messages(sock):
        if message["type"] == "event":
            event = message["event"]
            print("%6d  %-18s %-8s %-8s %s"
                  % (event["t_ms"], event["kind"], event["scene"],
                     event["region"], event["payload"]))
        elif message["type"] in ("hello", "bye"):
            print("-- %s %s" % (message["type"],
                                message.get("reason", "")))
            if message["type"] == "bye":
                break
    done.set()


def main():
    server = subprocess.Popen(
        [sys.executable, "-u", "-m", "giml", "serve",
         str(HERE / "board.xml"), "--bind", "127.0.0.1:0",
         "--lockstep", "--seed", "7"],
        stdout=subprocess.PIPE, text=True)
    try:
        line = server.stdout.readline().strip()
        port = int(line.rpartition(":")[2])
        sock = socket.create_connection(("127.0.0.1", port))
        done = threading.Event()
        threading.Thread(target=printer, args=(sock, done),
                         daemon=True).start()

        for duration, x, y in SPANS:
            for _ in range(duration // 10):
                send(sock, "input", x=x, y=y, valid=True)
        send(sock, "control", action="stop")
        done.wait(timeout=10)
        sock.close()
    finally:
        server.terminate()
        server.wait()


if __name__ == "__main__":
    main()
