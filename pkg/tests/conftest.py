"""Shared fixtures: the bundled corpus, resources, and a scripted HTTP server."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from pressclaims.claims import BaselineModel
from pressclaims.concepts import WikifyClient
from pressclaims.corpus import load_gold, parse_briefing, split_sentences
from pressclaims.embeddings import load_vectors
from pressclaims.extraction import PipelineResources

FIXTURES = Path(__file__).resolve().parent / "fixtures"
DOC_IDS = ("pb-001", "pb-002", "pb-003")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def store():
    return load_vectors(FIXTURES / "vectors" / "mini_de.vec")


@pytest.fixture(scope="session")
def baseline_model():
    payload = json.loads((FIXTURES / "models" / "baseline.json").read_text(encoding="utf-8"))
    return BaselineModel.from_payload(payload)


@pytest.fixture(scope="session")
def briefings():
    return {
        doc_id: parse_briefing((FIXTURES / "briefings" / f"{doc_id}.json").read_bytes())
        for doc_id in DOC_IDS
    }


@pytest.fixture(scope="session")
def sentences(briefings):
    return {doc_id: split_sentences(b) for doc_id, b in briefings.items()}


@pytest.fixture(scope="session")
def gold():
    return load_gold((FIXTURES / "gold" / "labels.jsonl").read_bytes())


@pytest.fixture()
def wikifier():
    return WikifyClient(provider="fixture", cache_dir=FIXTURES / "wiki_cache")


@pytest.fixture()
def resources(store, baseline_model, wikifier):
    return PipelineResources(store=store, model=baseline_model, wikifier=wikifier)


class ScriptedServer:
    """Local HTTP server whose /score behavior is scripted per test.

    `script` is a list of entries consumed one per request:
      ("status", code, body_dict)   -> fixed response
      ("echo", fn)                  -> fn(request_body) returns (code, body)
    When the script runs out, the last entry repeats.  Every request body
    and path is recorded in `requests`.
    """

    def __init__(self):
        self.script: list = []
        self.requests: list[dict] = []
        self.lock = threading.Lock()
        self._cursor = 0

        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers.get("Content-Length", 0))
                raw = self.rfile.read(length)
                try:
                    body = json.loads(raw) if raw else None
                except ValueError:
                    body = raw.decode("utf-8", "replace")
                with server.lock:
                    server.requests.append(
                        {
                            "path": self.path,
                            "body": body,
                            "headers": dict(self.headers),
                        }
                    )
                    entry = server.script[min(server._cursor, len(server.script) - 1)]
                    server._cursor += 1
                if entry[0] == "echo":
                    code, payload = entry[1](body)
                else:
                    _, code, payload = entry
                data = json.dumps(payload).encode()
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def url(self) -> str:
        host, port = self.httpd.server_address
        return f"http://{host}:{port}"

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture()
def scripted_server():
    server = ScriptedServer()
    yield server
    server.close()
