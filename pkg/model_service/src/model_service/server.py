"""Serve a trained claim classifier over the inference wire protocol.

    POST /score   {"model_id": str, "sentences": [str]}
    200           {"model_id": str, "confidences": [float]}

Confidence is the positive-class probability.  Sentences longer than the
model's maximum sequence length are truncated for scoring and their
indices reported in the X-Truncated response header.  Malformed requests
get a 400 with {"error": str}.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import torch

_SCORE_BATCH = 32


class ScoreService:
    """Loads an artifact directory and scores sentence batches."""

    def __init__(self, artifact_dir: str | Path):
        import os

        os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
        import transformers

        transformers.logging.set_verbosity_error()
        artifact_dir = Path(artifact_dir)
        meta = json.loads((artifact_dir / "meta.json").read_text(encoding="utf-8"))
        self.model_id: str = meta["model_id"]
        self.max_sequence_length: int = int(meta["max_sequence_length"])
        self.tokenizer = transformers.AutoTokenizer.from_pretrained(artifact_dir)
        self.model = transformers.AutoModelForSequenceClassification.from_pretrained(
            artifact_dir
        )
        self.model.eval()
        self._lock = threading.Lock()  # model access is serialized

    def score(self, sentences: list[str]) -> tuple[list[float], list[int]]:
        """Positive-class confidences plus the indices that were truncated."""
        if not sentences:
            return [], []
        confidences: list[float] = []
        truncated: list[int] = []
        with self._lock, torch.no_grad():
            lengths = self.tokenizer(list(sentences))["input_ids"]
            truncated = [
                i for i, ids in enumerate(lengths) if len(ids) > self.max_sequence_length
            ]
            for start in range(0, len(sentences), _SCORE_BATCH):
                batch = sentences[start : start + _SCORE_BATCH]
                encoded = self.tokenizer(
                    batch,
                    padding=True,
                    truncation=True,
                    max_length=self.max_sequence_length,
                    return_tensors="pt",
                )
                probs = torch.softmax(self.model(**encoded).logits, dim=-1)[:, 1]
                confidences.extend(float(p) for p in probs)
        return confidences, truncated


def _validate(body) -> list[str]:
    if not isinstance(body, dict):
        raise ValueError("request body must be a JSON object")
    if not isinstance(body.get("model_id"), str):
        raise ValueError("request must carry a string 'model_id'")
    sentences = body.get("sentences")
    if not isinstance(sentences, list) or not all(isinstance(s, str) for s in sentences):
        raise ValueError("'sentences' must be a list of strings")
    return sentences


def make_server(artifact_dir: str | Path, port: int = 0) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = ScoreService(artifact_dir)

    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _reply(self, code: int, payload: dict, headers: dict | None = None):
            data = json.dumps(payload).encode("utf-8")
            self.send_response(code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            for name, value in (headers or {}).items():
                self.send_header(name, value)
            self.end_headers()
            self.wfile.write(data)

        def do_POST(self):
            if self.path.rstrip("/") != "/score":
                self._reply(404, {"error": f"unknown path {self.path}"})
                return
            try:
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length))
                sentences = _validate(body)
            except (ValueError, json.JSONDecodeError) as exc:
                self._reply(400, {"error": str(exc)})
                return
            try:
                confidences, truncated = service.score(sentences)
            except Exception as exc:  # inference failure must not kill the server
                self._reply(500, {"error": f"scoring failed: {exc}"})
                return
            headers = {}
            if truncated:
                headers["X-Truncated"] = ",".join(str(i) for i in truncated)
            self._reply(
                200, {"model_id": service.model_id, "confidences": confidences}, headers
            )

        def do_GET(self):
            self._reply(404, {"error": "POST /score is the only endpoint"})

        def log_message(self, *args):
            pass

    return ThreadingHTTPServer(("127.0.0.1", port), Handler)


def serve(artifact_dir: str | Path, port: int) -> None:
    """Blocking entry point used by the CLI."""
    server = make_server(artifact_dir, port)
    host, bound_port = server.server_address
    print(f"serving claim classifier on http://{host}:{bound_port}/score")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
