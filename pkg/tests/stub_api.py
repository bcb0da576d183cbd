"""A tiny local stand-in for the repository search endpoint."""

import contextlib
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse


def api_item(i, **overrides):
    item = {
        "full_name": f"org/repo{i:04d}",
        "stargazers_count": 500,
        "forks_count": 120,
        "created_at": "2012-03-04T05:06:07Z",
        "pushed_at": "2017-08-09T10:11:12Z",
        "size": 4096,
        "language": "Java",
        "clone_url": f"https://example.invalid/org/repo{i:04d}.git",
    }
    item.update(overrides)
    return item


class _Handler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_GET(self):
        srv = self.server
        srv.requests.append(self.path)
        if srv.script:
            status, headers, body = srv.script.pop(0)
        else:
            query = parse_qs(urlparse(self.path).query)
            page, per_page = int(query["page"][0]), int(query["per_page"][0])
            chunk = srv.items[(page - 1) * per_page: page * per_page]
            status, headers, body = 200, {}, {"total_count": len(srv.items), "items": chunk}
        if srv.require_token and self.headers.get("Authorization") != f"Bearer {srv.require_token}":
            status, headers, body = 401, {}, {"message": "Bad credentials"}
        data = json.dumps(body).encode() if not isinstance(body, bytes) else body
        self.send_response(status)
        for k, v in headers.items():
            self.send_header(k, v)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


@contextlib.contextmanager
def stub_server(items=(), script=(), require_token=None):
    """Serve ``items`` page by page; ``script`` entries (status, headers, body) are served first."""
    srv = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    srv.items = list(items)
    srv.script = list(script)
    srv.requests = []
    srv.require_token = require_token
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    try:
        srv.url = f"http://127.0.0.1:{srv.server_address[1]}"
        yield srv
    finally:
        srv.shutdown()
        srv.server_close()
