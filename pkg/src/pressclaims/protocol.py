"""Conformance checks for the inference wire protocol.

These checks are written against the protocol alone, so the same suite
runs against the recorded fake server in this package's tests and against
any live scoring service.  Each check raises AssertionError (or a
transport error) on violation.
"""

from __future__ import annotations

import json

import requests

PROTOCOL_TIMEOUT_S = 30.0


def _score_url(base_url: str) -> str:
    base = base_url.rstrip("/")
    return base if base.endswith("/score") else f"{base}/score"


def _post(base_url: str, payload: dict) -> requests.Response:
    return requests.post(_score_url(base_url), json=payload, timeout=PROTOCOL_TIMEOUT_S)


def _valid_body(response: requests.Response, expected: int) -> dict:
    body = response.json()
    assert isinstance(body, dict), "response must be a JSON object"
    assert isinstance(body.get("model_id"), str), "response must carry a string model_id"
    confidences = body.get("confidences")
    assert isinstance(confidences, list), "response must carry a confidences list"
    assert len(confidences) == expected, (
        f"expected {expected} confidences, got {len(confidences)}"
    )
    for value in confidences:
        assert isinstance(value, (int, float)) and not isinstance(value, bool), (
            f"confidence {value!r} is not a number"
        )
        assert 0.0 <= value <= 1.0, f"confidence {value} outside [0, 1]"
    return body


def check_empty_batch(base_url: str) -> None:
    """An empty sentence list scores to an empty confidence list."""
    response = _post(base_url, {"model_id": "default", "sentences": []})
    assert response.status_code == 200, f"status {response.status_code}"
    _valid_body(response, 0)


def check_batch_shape(base_url: str) -> None:
    """N sentences yield exactly N confidences, all within [0, 1]."""
    sentences = [
        "Die Inzidenz steigt seit drei Wochen deutlich an.",
        "Guten Morgen und herzlich willkommen.",
        "Wir wissen noch nicht, wie lange der Schutz anhält.",
    ]
    response = _post(base_url, {"model_id": "default", "sentences": sentences})
    assert response.status_code == 200, f"status {response.status_code}"
    _valid_body(response, len(sentences))


def check_repeatability(base_url: str) -> None:
    """Scoring is stateless: identical requests return identical scores."""
    payload = {"model_id": "default", "sentences": ["Die Studie zeigt einen klaren Effekt."]}
    first = _valid_body(_post(base_url, payload), 1)
    second = _valid_body(_post(base_url, payload), 1)
    assert first["confidences"] == second["confidences"], "scores changed between calls"


def check_order_sensitivity(base_url: str) -> None:
    """Confidences follow the request order (swap the batch, scores swap)."""
    a = "Die Impfquote liegt bei achtzig Prozent."
    b = "Vielen Dank, die naechste Frage bitte."
    forward = _valid_body(_post(base_url, {"model_id": "default", "sentences": [a, b]}), 2)
    backward = _valid_body(_post(base_url, {"model_id": "default", "sentences": [b, a]}), 2)
    assert forward["confidences"] == backward["confidences"][::-1], (
        "confidences do not track sentence order"
    )


def check_error_channel(base_url: str) -> None:
    """Malformed requests earn a >= 400 status and an {'error': str} body."""
    response = requests.post(
        _score_url(base_url),
        data="this is not json",
        headers={"Content-Type": "application/json"},
        timeout=PROTOCOL_TIMEOUT_S,
    )
    assert response.status_code >= 400, f"malformed body accepted: {response.status_code}"
    body = json.loads(response.text)
    assert isinstance(body.get("error"), str), "error responses must carry {'error': str}"

    response = _post(base_url, {"model_id": "default"})
    assert response.status_code >= 400, "request without 'sentences' accepted"
    assert isinstance(response.json().get("error"), str)


ALL_CHECKS = (
    check_empty_batch,
    check_batch_shape,
    check_repeatability,
    check_order_sensitivity,
    check_error_channel,
)


def run_conformance(base_url: str) -> list[tuple[str, str | None]]:
    """Run every check; returns (check name, failure or None) pairs."""
    results = []
    for check in ALL_CHECKS:
        try:
            check(base_url)
        except AssertionError as exc:
            results.append((check.__name__, str(exc) or "assertion failed"))
        else:
            results.append((check.__name__, None))
    return results
