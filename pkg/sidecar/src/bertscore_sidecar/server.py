"""Line-delimited JSON request loop over stdio or TCP.

Protocol, one object per line, UTF-8:
  request:  {"id": <int>, "op": "score", "candidate": <string>, "reference": <string>}
  response: {"id": <int>, "precision": <float>, "recall": <float>, "f1": <float>}
  error:    {"id": <int>, "error": <string>}  (id -1 when the request id is unreadable)

Exactly one response per request, in request order; a malformed request
produces an error object and the stream keeps going.
"""

from __future__ import annotations

import json
import socket
import sys

from .scoring import ScoringBackend


def handle_line(line: str, backend: ScoringBackend) -> str:
    request_id = -1
    try:
        request = json.loads(line)
        if not isinstance(request, dict):
            raise ValueError("request must be a JSON object")
        raw_id = request.get("id", -1)
        request_id = raw_id if isinstance(raw_id, int) else -1
        if request.get("op") != "score":
            raise ValueError(f"unsupported op {request.get('op')!r}")
        candidate = request["candidate"]
        reference = request["reference"]
        if not isinstance(candidate, str) or not isinstance(reference, str):
            raise ValueError("candidate and reference must be strings")
        if not candidate or not reference:
            raise ValueError("candidate and reference must be non-empty")
        precision, recall, f1 = backend.score_pairs([(candidate, reference)])[0]
        reply = {"id": request_id, "precision": precision, "recall": recall, "f1": f1}
    except KeyError as exc:
        reply = {"id": request_id, "error": f"missing field {exc.args[0]!r}"}
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        reply = {"id": request_id, "error": str(exc)}
    return json.dumps(reply, ensure_ascii=True)


def serve_stream(backend: ScoringBackend, reader, writer):
    """Serve one connection: read lines until EOF, answer each in order."""
    for line in reader:
        if not line.strip():
            continue
        writer.write(handle_line(line, backend) + "\n")
        writer.flush()


def serve_stdio(backend: ScoringBackend):
    serve_stream(backend, sys.stdin, sys.stdout)


def serve_tcp(backend: ScoringBackend, host: str, port: int, max_connections: int | None = None):
    """Accept connections one at a time and serve each until it closes."""
    served = 0
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as sock:
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, port))
        sock.listen(1)
        sys.stderr.write(f"listening on {sock.getsockname()[0]}:{sock.getsockname()[1]}\n")
        sys.stderr.flush()
        while max_connections is None or served < max_connections:
            conn, _ = sock.accept()
            with conn:
                reader = conn.makefile("r", encoding="utf-8", newline="\n")
                writer = conn.makefile("w", encoding="utf-8", newline="\n")
                serve_stream(backend, reader, writer)
            served += 1
