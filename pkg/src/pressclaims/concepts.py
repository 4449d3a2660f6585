"""Encyclopedia-concept annotation via wikification APIs, with a disk cache.

Supported providers: a TagMe-style endpoint (GET, gcube-token, annotation
confidence in "rho", concept id in "title"), a Dandelion-style endpoint
(GET, token, confidence in "confidence", concept id in "uri"), and a
"fixture" provider that replays cached TagMe-schema responses and never
touches the network.

Raw provider responses are cached on disk keyed by (provider, text hash),
so repeat calls are free and offline runs are reproducible.  Confidence
filtering happens after the cache, so the floor can change without
invalidating cached responses.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import requests

from .corpus import PressBriefing, Sentence
from .errors import (
    CacheMissError,
    CredentialError,
    EndpointError,
    RateLimitError,
    WikifyProtocolError,
)

TAGME_DEFAULT_URL = "https://tagme.d4science.org/tagme/tag"
DANDELION_DEFAULT_URL = "https://api.dandelion.eu/datatxt/nex/v1"

_TOKEN_ENV = {"tagme": "TAGME_TOKEN", "dandelion": "DANDELION_TOKEN"}


@dataclass(frozen=True, slots=True)
class ConceptAnnotation:
    surface: str
    concept_id: str
    confidence: float
    span: tuple[int, int]


@dataclass(frozen=True, slots=True)
class MainConcept:
    scope: str  # "title" | "intro" | "sentence"
    source_ref: str
    annotations: tuple[ConceptAnnotation, ...]

    def confidences(self) -> dict[str, float]:
        return {a.concept_id: a.confidence for a in self.annotations}


@dataclass(frozen=True, slots=True)
class WikifyClient:
    provider: str  # "tagme" | "dandelion" | "fixture"
    cache_dir: Path
    base_url: str = ""
    auth_token: str | None = None
    min_confidence: float = 0.1
    timeout_s: float = 10.0
    cache_only: bool = False
    max_attempts: int = 3
    backoff_s: float = 0.5
    max_in_flight: int = 1

    def __post_init__(self):
        if self.provider not in ("tagme", "dandelion", "fixture"):
            raise ValueError(f"unknown wikify provider {self.provider!r}")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError("min_confidence must be in [0, 1]")


def cache_key(provider: str, text: str) -> str:
    return hashlib.sha256(f"{provider}\x00{text}".encode("utf-8")).hexdigest()


def _cache_path(client: WikifyClient, text: str) -> Path:
    return Path(client.cache_dir) / f"{cache_key(client.provider, text)}.json"


def _write_cache(path: Path, raw: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    tmp.write_text(json.dumps(raw, ensure_ascii=False, sort_keys=True), encoding="utf-8")
    os.replace(tmp, path)


def _resolve_token(client: WikifyClient) -> str:
    token = client.auth_token or os.environ.get(_TOKEN_ENV.get(client.provider, ""), "")
    if not token:
        raise CredentialError(f"no API token configured for provider {client.provider!r}")
    return token


def _fetch(client: WikifyClient, text: str) -> dict:
    token = _resolve_token(client)
    if client.provider == "tagme":
        url = client.base_url or TAGME_DEFAULT_URL
        params = {"gcube-token": token, "lang": "de", "text": text}
    else:
        url = client.base_url or DANDELION_DEFAULT_URL
        params = {"token": token, "lang": "de", "text": text}

    rate_limited = False
    for attempt in range(client.max_attempts):
        if attempt:
            time.sleep(client.backoff_s * 2 ** (attempt - 1))
        try:
            response = requests.get(url, params=params, timeout=client.timeout_s)
        except (requests.Timeout, requests.ConnectionError) as exc:
            if attempt + 1 == client.max_attempts:
                raise EndpointError(f"wikify transport failure: {exc}") from exc
            continue
        if response.status_code in (401, 403):
            raise CredentialError(f"provider rejected token (status {response.status_code})")
        if response.status_code == 429:
            rate_limited = True
            continue
        if response.status_code >= 400:
            if response.status_code >= 500 and attempt + 1 < client.max_attempts:
                continue
            raise EndpointError(f"wikify request failed with status {response.status_code}")
        try:
            body = response.json()
        except ValueError as exc:
            raise WikifyProtocolError("wikify response is not JSON") from exc
        if not isinstance(body, dict):
            raise WikifyProtocolError("wikify response must be a JSON object")
        return body
    if rate_limited:
        raise RateLimitError(f"still rate-limited after {client.max_attempts} attempts")
    raise EndpointError(f"wikify request failed after {client.max_attempts} attempts")


def _parse_annotations(client: WikifyClient, raw: dict, text: str) -> list[ConceptAnnotation]:
    confidence_field = "confidence" if client.provider == "dandelion" else "rho"
    concept_field = "uri" if client.provider == "dandelion" else "title"
    entries = raw.get("annotations")
    if not isinstance(entries, list):
        raise WikifyProtocolError("response carries no 'annotations' list")
    annotations = []
    for entry in entries:
        try:
            confidence = float(entry[confidence_field])
            concept_id = str(entry[concept_field])
            start = int(entry["start"])
            end = int(entry["end"])
            surface = str(entry.get("spot", text[start:end]))
        except (TypeError, KeyError, ValueError) as exc:
            raise WikifyProtocolError(f"malformed annotation entry: {entry!r}") from exc
        if not 0.0 <= confidence <= 1.0:
            raise WikifyProtocolError(f"confidence {confidence} outside [0, 1]")
        if not (0 <= start <= end <= len(text)):
            raise WikifyProtocolError(f"span ({start}, {end}) outside text")
        if not concept_id:
            raise WikifyProtocolError("empty concept id")
        annotations.append(
            ConceptAnnotation(
                surface=surface, concept_id=concept_id, confidence=confidence, span=(start, end)
            )
        )
    return annotations


def wikify(client: WikifyClient, text: str) -> list[ConceptAnnotation]:
    """Annotate `text` with encyclopedia concepts at or above the floor.

    Responses replay from the cache when present; the fixture provider
    (and any client with cache_only=True) refuses to go to the network and
    raises CacheMissError for unseen texts.
    """
    if not text.strip():
        return []
    path = _cache_path(client, text)
    if path.exists():
        raw = json.loads(path.read_text(encoding="utf-8"))
    else:
        if client.cache_only or client.provider == "fixture":
            raise CacheMissError(
                f"no cached wikification for provider {client.provider!r} "
                f"(key {path.name}); live calls are disabled"
            )
        raw = _fetch(client, text)
        _write_cache(path, raw)
    annotations = _parse_annotations(client, raw, text)
    return [a for a in annotations if a.confidence >= client.min_confidence]


def wikify_many(client: WikifyClient, texts: Sequence[str]) -> list[list[ConceptAnnotation]]:
    """Annotate several texts, in order, bounded by max_in_flight."""
    if client.max_in_flight > 1 and len(texts) > 1:
        with ThreadPoolExecutor(max_workers=client.max_in_flight) as pool:
            return list(pool.map(lambda t: wikify(client, t), texts))
    return [wikify(client, t) for t in texts]


def dedupe_annotations(annotations: Iterable[ConceptAnnotation]) -> tuple[ConceptAnnotation, ...]:
    """Collapse duplicate concept ids, keeping the highest confidence."""
    kept: dict[str, ConceptAnnotation] = {}
    for annotation in annotations:
        current = kept.get(annotation.concept_id)
        if current is None or annotation.confidence > current.confidence:
            kept[annotation.concept_id] = annotation
    return tuple(kept.values())


def main_concept(briefing: PressBriefing, scope: str, client: WikifyClient) -> MainConcept:
    """Wikify the briefing's title or intro into its main-concept set."""
    if scope not in ("title", "intro"):
        raise ValueError(f"main-concept scope must be 'title' or 'intro', got {scope!r}")
    text = briefing.title if scope == "title" else briefing.intro_text
    annotations = dedupe_annotations(wikify(client, text)) if text.strip() else ()
    return MainConcept(scope=scope, source_ref=briefing.id, annotations=annotations)


def sentence_concepts(sentence: Sentence, client: WikifyClient) -> MainConcept:
    """Sentence-scope concept set, deduplicated like the title/intro scopes."""
    annotations = dedupe_annotations(wikify(client, sentence.text))
    return MainConcept(
        scope="sentence",
        source_ref=f"{sentence.doc_id}#{sentence.index}",
        annotations=annotations,
    )


def overlap_score(
    sentence_annotations: Iterable[ConceptAnnotation],
    main: MainConcept,
    mode: str = "both",
) -> float:
    """Summed confidence mass of concepts shared with the main concept.

    mode "both" (default) adds the sentence-side and main-side confidence
    for every shared concept; mode "sentence_only" adds only the
    sentence-side confidence.
    """
    if mode not in ("both", "sentence_only"):
        raise ValueError(f"unknown overlap mode {mode!r}")
    sentence_side = {a.concept_id: a.confidence for a in dedupe_annotations(sentence_annotations)}
    main_side = main.confidences()
    total = 0.0
    for concept_id, confidence in sentence_side.items():
        if concept_id in main_side:
            total += confidence
            if mode == "both":
                total += main_side[concept_id]
    return total
