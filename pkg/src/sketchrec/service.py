"""HTTP recognition service.

Stateless JSON API over a read-only checkpoint:

  GET  /healthz    liveness probe
  GET  /model      scenario, label space, dims, checkpoint hash
  POST /recognize  {"strokes": [[[x, y], ...], ...]} -> recognition result

Clients may submit coordinates in any range; the server normalizes.
Responses are a pure function of (checkpoint, request body).
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .checkpoint import file_sha256
from .data import DataError, Sketch, Stroke, normalize
from .model import SketchRecognizer


class BadRequest(ValueError):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _round_floats(obj, ndigits: int = 8):
    if isinstance(obj, float):
        return round(obj, ndigits)
    if isinstance(obj, list):
        return [_round_floats(v, ndigits) for v in obj]
    if isinstance(obj, dict):
        return {k: _round_floats(v, ndigits) for k, v in obj.items()}
    return obj


def parse_recognize_request(body: bytes, max_strokes: int) -> Sketch:
    try:
        obj = json.loads(body.decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError):
        raise BadRequest(400, "request body is not valid JSON") from None
    if not isinstance(obj, dict) or "strokes" not in obj:
        raise BadRequest(400, "expected an object with a 'strokes' field")
    strokes_raw = obj["strokes"]
    if not isinstance(strokes_raw, list) or len(strokes_raw) == 0:
        raise BadRequest(422, "strokes must be a non-empty list")
    if len(strokes_raw) > max_strokes:
        raise BadRequest(422, f"at most {max_strokes} strokes are supported")
    strokes = []
    for i, pts in enumerate(strokes_raw):
        try:
            strokes.append(Stroke(np.asarray(pts, dtype=np.float64)))
        except (DataError, ValueError, TypeError):
            raise BadRequest(422, f"stroke {i} is not a list of [x, y] points") from None
    return Sketch(strokes, category=0)


class RecognitionService:
    """Owns the loaded model; handlers delegate here."""

    def __init__(self, checkpoint_path):
        self.model = SketchRecognizer.load(checkpoint_path)
        self.checkpoint_hash = file_sha256(checkpoint_path)
        self.model_info = {
            "scenario": self.model.scenario.scenario,
            "fusion_mode": self.model.scenario.fusion_mode,
            "token_path": self.model.scenario.token_path,
            "dims": {
                "d": self.model.dims.d,
                "n_layers": self.model.dims.n_layers,
                "n_heads": self.model.dims.n_heads,
                "max_strokes": self.model.dims.max_strokes,
            },
            "label_space": self.model.label_space.to_dict(),
            "checkpoint_sha256": self.checkpoint_hash,
        }

    def recognize(self, body: bytes) -> dict:
        sketch = parse_recognize_request(body, self.model.dims.max_strokes)
        prediction = self.model.predict(normalize(sketch))
        prediction.pop("head_choice", None)
        return _round_floats(prediction)


class _Handler(BaseHTTPRequestHandler):
    service: RecognitionService = None  # injected by make_server
    static_dir: Path = None

    def log_message(self, fmt, *args):  # keep test output quiet
        pass

    def _send_json(self, status: int, payload: dict):
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        if self.path == "/healthz":
            self._send_json(200, {"status": "ok"})
        elif self.path == "/model":
            self._send_json(200, self.service.model_info)
        elif self.static_dir is not None:
            self._send_static()
        else:
            self._send_json(404, {"error": "not found"})

    def _send_static(self):
        rel = self.path.lstrip("/") or "index.html"
        target = (self.static_dir / rel).resolve()
        if not str(target).startswith(str(self.static_dir.resolve())) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        ctypes = {".html": "text/html", ".js": "text/javascript",
                  ".css": "text/css", ".map": "application/json"}
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctypes.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if self.path != "/recognize":
            self._send_json(404, {"error": "not found"})
            return
        length = int(self.headers.get("Content-Length", "0"))
        body = self.rfile.read(length)
        try:
            self._send_json(200, self.service.recognize(body))
        except BadRequest as exc:
            self._send_json(exc.status, {"error": str(exc)})


def make_server(checkpoint_path, port: int = 0, static_dir=None) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = RecognitionService(checkpoint_path)
    handler = type(
        "BoundHandler",
        (_Handler,),
        {
            "service": service,
            "static_dir": Path(static_dir) if static_dir else None,
        },
    )
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(checkpoint_path, port: int, static_dir=None):
    """Run until interrupted."""
    server = make_server(checkpoint_path, port, static_dir=static_dir)
    host, bound_port = server.server_address
    print(f"serving on http://{host}:{bound_port} "
          f"(checkpoint {Path(checkpoint_path).name})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def start_background(checkpoint_path, port: int = 0, static_dir=None):
    """Start in a daemon thread; returns (server, base_url). Used by tests."""
    server = make_server(checkpoint_path, port, static_dir=static_dir)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, bound_port = server.server_address
    return server, f"http://{host}:{bound_port}"
