"""Claim scoring: a native logistic baseline and a remote classifier client.

Both classifiers emit per-sentence confidences in [0, 1].  The remote
client speaks the inference wire protocol::

    POST {url}/score   {"model_id": str, "sentences": [str]}
    200                {"model_id": str, "confidences": [float]}

with confidences in request order, errors as status >= 400 plus
{"error": str}, and bearer-token auth when configured.
"""

from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import requests

from .corpus import Sentence
from .embeddings import VectorStore, sentence_vector
from .errors import EndpointError, TrainingError, WireProtocolError

CLAIM = "claim"
NO_CLAIM = "no_claim"

_TRANSIENT_STATUS = {429, 500, 502, 503, 504}


@dataclass(frozen=True, slots=True)
class ClaimScore:
    doc_id: str
    sentence_index: int
    confidence: float
    model_id: str


@dataclass(frozen=True, slots=True)
class BaselineModel:
    weights: np.ndarray
    bias: float
    model_id: str
    training_meta: dict

    def to_payload(self) -> dict:
        return {
            "weights": [float(w) for w in self.weights],
            "bias": self.bias,
            "model_id": self.model_id,
            "training_meta": self.training_meta,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "BaselineModel":
        weights = np.array(payload["weights"], dtype=np.float64)
        weights.setflags(write=False)
        return cls(
            weights=weights,
            bias=float(payload["bias"]),
            model_id=str(payload["model_id"]),
            training_meta=dict(payload["training_meta"]),
        )


@dataclass(frozen=True, slots=True)
class ClassifierEndpoint:
    url: str
    timeout_ms: int = 10_000
    max_batch: int = 32
    auth_token: str | None = None
    model_id: str = "default"
    max_attempts: int = 3
    backoff_s: float = 0.5
    max_in_flight: int = 1

    def __post_init__(self):
        if self.max_batch < 1:
            raise ValueError("max_batch must be >= 1")
        if self.timeout_ms < 1:
            raise ValueError("timeout_ms must be >= 1")


def sigmoid(z: float) -> float:
    """Numerically stable logistic function."""
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _sigmoid_vec(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _log_loss(features: np.ndarray, targets: np.ndarray, weights: np.ndarray, bias: float) -> float:
    p = _sigmoid_vec(features @ weights + bias)
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return float(-np.mean(targets * np.log(p) + (1.0 - targets) * np.log(1.0 - p)))


def baseline_train(
    data: Sequence[tuple[Sentence, str]],
    store: VectorStore,
    epochs: int = 50,
    learning_rate: float = 0.1,
    seed: int = 0,
    batch_size: int = 32,
) -> BaselineModel:
    """Fit logistic regression on mean sentence embeddings.

    Mini-batch gradient descent with a seeded shuffle; training stops early
    once the full-data logistic loss stops improving.  Labels are the
    strings "claim" / "no_claim" and both must occur.
    """
    if not data:
        raise TrainingError("training data is empty")
    if learning_rate <= 0:
        raise TrainingError("learning_rate must be > 0")
    labels = {label for _, label in data}
    if not labels <= {CLAIM, NO_CLAIM}:
        raise TrainingError(f"unknown labels: {sorted(labels - {CLAIM, NO_CLAIM})}")
    if len(labels) < 2:
        raise TrainingError("training data must contain both classes")

    features = np.vstack([sentence_vector(s, store).values for s, _ in data])
    targets = np.array([1.0 if label == CLAIM else 0.0 for _, label in data])
    if not np.any(np.linalg.norm(features, axis=1) > 0):
        raise TrainingError("every training sentence is out of vocabulary")

    weights = np.zeros(store.dimension, dtype=np.float64)
    bias = 0.0
    rng = np.random.default_rng(seed)
    best_loss = _log_loss(features, targets, weights, bias)
    best = (weights.copy(), bias)
    completed = 0
    for _ in range(epochs):
        order = rng.permutation(len(data))
        for start in range(0, len(order), batch_size):
            batch = order[start : start + batch_size]
            p = _sigmoid_vec(features[batch] @ weights + bias)
            err = p - targets[batch]
            weights -= learning_rate * (features[batch].T @ err) / len(batch)
            bias -= learning_rate * float(np.mean(err))
        loss = _log_loss(features, targets, weights, bias)
        if loss >= best_loss:
            break  # objective stopped decreasing
        best_loss = loss
        best = (weights.copy(), bias)
        completed += 1

    weights, bias = best
    digest = hashlib.sha256()
    digest.update(weights.tobytes())
    digest.update(repr(bias).encode())
    weights.setflags(write=False)
    return BaselineModel(
        weights=weights,
        bias=bias,
        model_id=f"baseline-{digest.hexdigest()[:10]}",
        training_meta={
            "epochs": completed,
            "learning_rate": learning_rate,
            "examples": len(data),
        },
    )


def baseline_score(model: BaselineModel, sentence: Sentence, store: VectorStore) -> ClaimScore:
    """Confidence = sigmoid(weights . mean_embedding + bias)."""
    if model.weights.shape[0] != store.dimension:
        raise ValueError(
            f"model dimension {model.weights.shape[0]} != store dimension {store.dimension}"
        )
    vec = sentence_vector(sentence, store)
    z = float(np.dot(model.weights, vec.values)) + model.bias
    return ClaimScore(
        doc_id=sentence.doc_id,
        sentence_index=sentence.index,
        confidence=sigmoid(z),
        model_id=model.model_id,
    )


def baseline_score_many(
    model: BaselineModel, sentences: Iterable[Sentence], store: VectorStore
) -> list[ClaimScore]:
    return [baseline_score(model, s, store) for s in sentences]


def _score_url(endpoint: ClassifierEndpoint) -> str:
    url = endpoint.url.rstrip("/")
    return url if url.endswith("/score") else f"{url}/score"


def _post_batch(endpoint: ClassifierEndpoint, texts: list[str]) -> tuple[list[float], str]:
    headers = {}
    if endpoint.auth_token:
        headers["Authorization"] = f"Bearer {endpoint.auth_token}"
    payload = {"model_id": endpoint.model_id, "sentences": texts}
    last_error: str = "no attempt made"
    for attempt in range(endpoint.max_attempts):
        if attempt:
            time.sleep(endpoint.backoff_s * 2 ** (attempt - 1))
        try:
            response = requests.post(
                _score_url(endpoint),
                json=payload,
                headers=headers,
                timeout=endpoint.timeout_ms / 1000.0,
            )
        except (requests.Timeout, requests.ConnectionError) as exc:
            last_error = f"transport failure: {exc}"
            continue
        if response.status_code in _TRANSIENT_STATUS:
            last_error = f"status {response.status_code}"
            continue
        if response.status_code >= 400:
            detail = ""
            try:
                detail = response.json().get("error", "")
            except ValueError:
                pass
            raise EndpointError(f"classifier returned {response.status_code}: {detail}")
        return _parse_score_response(response, len(texts))
    raise EndpointError(
        f"classifier unreachable after {endpoint.max_attempts} attempts ({last_error})"
    )


def _parse_score_response(response: requests.Response, expected: int) -> tuple[list[float], str]:
    try:
        body = response.json()
    except ValueError as exc:
        raise WireProtocolError("response body is not JSON") from exc
    if not isinstance(body, dict) or "confidences" not in body or "model_id" not in body:
        raise WireProtocolError("response must carry 'model_id' and 'confidences'")
    confidences = body["confidences"]
    if not isinstance(confidences, list) or len(confidences) != expected:
        got = len(confidences) if isinstance(confidences, list) else "non-list"
        raise WireProtocolError(f"expected {expected} confidences, got {got}")
    values = []
    for value in confidences:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise WireProtocolError(f"confidence {value!r} is not a number")
        if not 0.0 <= value <= 1.0:
            raise WireProtocolError(f"confidence {value} outside [0, 1]")
        values.append(float(value))
    return values, str(body["model_id"])


def remote_score(endpoint: ClassifierEndpoint, sentences: Sequence[Sentence]) -> list[ClaimScore]:
    """Score sentences via the wire protocol, preserving input order.

    Requests go out in batches of at most `max_batch`; transient failures
    (timeouts, connection errors, 429/5xx) are retried with exponential
    backoff up to `max_attempts` total tries per batch.
    """
    if not sentences:
        return []
    batches = [
        list(sentences[start : start + endpoint.max_batch])
        for start in range(0, len(sentences), endpoint.max_batch)
    ]
    texts = [[s.text for s in batch] for batch in batches]
    if endpoint.max_in_flight > 1:
        with ThreadPoolExecutor(max_workers=endpoint.max_in_flight) as pool:
            results = list(pool.map(lambda t: _post_batch(endpoint, t), texts))
    else:
        results = [_post_batch(endpoint, t) for t in texts]

    scores: list[ClaimScore] = []
    for batch, (confidences, model_id) in zip(batches, results):
        for sentence, confidence in zip(batch, confidences):
            scores.append(
                ClaimScore(
                    doc_id=sentence.doc_id,
                    sentence_index=sentence.index,
                    confidence=confidence,
                    model_id=model_id,
                )
            )
    return scores


def select_claims(scores: Iterable[ClaimScore], threshold: float) -> list[ClaimScore]:
    """Scores with confidence >= threshold, original order preserved."""
    return [score for score in scores if score.confidence >= threshold]
