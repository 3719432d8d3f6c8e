"""HTTP service for listening tests.

Endpoints:
  GET  /api/session/{id}[?participant=...]  blinded session manifest
  POST /api/response                         validate + append one record
  GET  /api/audio/{token}                    WAV bytes (Range supported)
  GET  /                                     static UI (built frontend or
                                             a built-in fallback page)

Audio is served unmodified (no transcoding) so listening stimuli stay
bit-exact; Range requests let browsers seek. Response-log writes are
serialized with a lock.
"""

import json
import logging
import mimetypes
import re
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from . import session as sess

log = logging.getLogger(__name__)

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>Listening test</title></head>
<body>
<h1>Listening-test service</h1>
<p>The API is up. Build the browser UI (frontend/) and serve its output
directory with --static to run participants, or drive the endpoints
directly:</p>
<ul>
<li><code>GET /api/session/{id}?participant=NAME</code></li>
<li><code>POST /api/response</code></li>
<li><code>GET /api/audio/{token}</code></li>
</ul>
</body></html>
"""


class ListeningTestServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, cfg: sess.SessionConfig, results_path, static_dir=None):
        self.cfg = cfg
        self.results_path = Path(results_path)
        self.static_dir = Path(static_dir) if static_dir else None
        self.audio = sess.audio_map(cfg)
        self.write_lock = threading.Lock()
        super().__init__(address, _Handler)


class _Handler(BaseHTTPRequestHandler):
    server: ListeningTestServer

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _send_json(self, obj, status=200):
        body = json.dumps(obj).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_GET(self):
        url = urlparse(self.path)
        m = re.fullmatch(r"/api/session/([^/]+)", url.path)
        if m:
            if m.group(1) != self.server.cfg.id:
                return self._send_json({"error": "unknown session"}, 404)
            participant = parse_qs(url.query).get("participant", [""])[0]
            return self._send_json(sess.build_manifest(self.server.cfg, participant))

        m = re.fullmatch(r"/api/audio/([0-9a-f]+)", url.path)
        if m:
            return self._send_audio(m.group(1))

        return self._send_static(url.path)

    def _send_audio(self, token):
        path = self.server.audio.get(token)
        if path is None or not Path(path).is_file():
            return self._send_json({"error": "unknown audio"}, 404)
        data = Path(path).read_bytes()

        start, end = 0, len(data) - 1
        rng = self.headers.get("Range")
        m = re.fullmatch(r"bytes=(\d*)-(\d*)", rng.strip()) if rng else None
        if m and (m.group(1) or m.group(2)):
            if m.group(1):
                start = int(m.group(1))
                if m.group(2):
                    end = min(int(m.group(2)), len(data) - 1)
            else:  # suffix range: last N bytes
                start = max(len(data) - int(m.group(2)), 0)
            if start > end or start >= len(data):
                self.send_response(416)
                self.send_header("Content-Range", f"bytes */{len(data)}")
                self.end_headers()
                return
            self.send_response(206)
            self.send_header("Content-Range", f"bytes {start}-{end}/{len(data)}")
        else:
            self.send_response(200)
        chunk = data[start : end + 1]
        self.send_header("Content-Type", "audio/wav")
        self.send_header("Accept-Ranges", "bytes")
        self.send_header("Content-Length", str(len(chunk)))
        self.end_headers()
        self.wfile.write(chunk)

    def _send_static(self, path):
        if path == "/":
            path = "/index.html"
        file = None
        static = self.server.static_dir
        if static is not None:
            candidate = (static / path.lstrip("/")).resolve()
            if candidate.is_file() and static.resolve() in candidate.parents:
                file = candidate
        if file is not None:
            body = file.read_bytes()
            ctype = mimetypes.guess_type(str(file))[0] or "application/octet-stream"
        elif path == "/index.html":
            body = _FALLBACK_PAGE.encode()
            ctype = "text/html; charset=utf-8"
        else:
            return self._send_json({"error": "not found"}, 404)
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def do_POST(self):
        if urlparse(self.path).path != "/api/response":
            return self._send_json({"error": "not found"}, 404)
        try:
            length = int(self.headers.get("Content-Length", "0"))
            record = json.loads(self.rfile.read(length) or b"{}")
            record = sess.validate_response(self.server.cfg, record)
        except (ValueError, KeyError) as e:
            return self._send_json({"ok": False, "error": str(e)}, 400)
        with self.server.write_lock:
            sess.append_response(self.server.results_path, record)
        return self._send_json({"ok": True})


def build_server(cfg, results_path, port=0, host="127.0.0.1", static_dir=None) -> ListeningTestServer:
    """Create (but do not start) the service; port 0 picks a free port."""
    return ListeningTestServer((host, port), cfg, results_path, static_dir)
