import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from pressclaims.concepts import (
    ConceptAnnotation,
    MainConcept,
    WikifyClient,
    cache_key,
    dedupe_annotations,
    main_concept,
    overlap_score,
    sentence_concepts,
    wikify,
)
from pressclaims.corpus import parse_briefing
from pressclaims.errors import (
    CacheMissError,
    CredentialError,
    RateLimitError,
    WikifyProtocolError,
)


class WikiServer:
    """GET endpoint that replays a scripted list of (status, payload)."""

    def __init__(self):
        self.script = []
        self.requests = []
        self._cursor = 0
        server = self

        class Handler(BaseHTTPRequestHandler):
            def do_GET(self):
                server.requests.append(self.path)
                status, payload = server.script[min(server._cursor, len(server.script) - 1)]
                server._cursor += 1
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        threading.Thread(target=self.httpd.serve_forever, daemon=True).start()

    @property
    def url(self):
        host, port = self.httpd.server_address
        return f"http://{host}:{port}/annotate"

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture()
def wiki_server():
    server = WikiServer()
    yield server
    server.close()


def live_client(server, tmp_path, provider="tagme", **kwargs):
    kwargs.setdefault("backoff_s", 0.01)
    return WikifyClient(
        provider=provider,
        cache_dir=tmp_path / "cache",
        base_url=server.url,
        auth_token="token-123",
        **kwargs,
    )


TAGME_RESPONSE = {
    "annotations": [
        {"spot": "Omikron", "title": "SARS-CoV-2-Variante Omikron", "rho": 0.41,
         "start": 23, "end": 30},
        {"spot": "Variante", "title": "Variante", "rho": 0.05, "start": 14, "end": 22},
    ]
}


class TestWikify:
    def test_empty_text(self, wikifier):
        assert wikify(wikifier, "") == []
        assert wikify(wikifier, "   ") == []

    def test_fixture_omikron_annotation(self, wikifier):
        annotations = wikify(wikifier, "Das gilt auch für die Variante Omikron.")
        assert len(annotations) == 1
        (annotation,) = annotations
        assert annotation.surface == "Omikron"
        assert annotation.concept_id == "SARS-CoV-2-Variante Omikron"
        assert annotation.confidence == pytest.approx(0.41)

    def test_fixture_cache_miss(self, wikifier):
        with pytest.raises(CacheMissError):
            wikify(wikifier, "Dieser Text wurde nie aufgezeichnet.")

    def test_live_tagme_maps_rho_and_caches(self, wiki_server, tmp_path):
        wiki_server.script = [(200, TAGME_RESPONSE)]
        client = live_client(wiki_server, tmp_path)
        text = "Das gilt auch für die Variante Omikron."
        annotations = wikify(client, text)
        assert [a.concept_id for a in annotations] == ["SARS-CoV-2-Variante Omikron"]
        assert annotations[0].span == (23, 30)
        # floor of 0.1 drops the rho=0.05 spot
        assert all(a.confidence >= 0.1 for a in annotations)

        repeat = wikify(client, text)
        assert repeat == annotations
        assert len(wiki_server.requests) == 1  # cache hit, no second call
        assert "gcube-token=token-123" in wiki_server.requests[0]

    def test_live_dandelion_maps_confidence_and_uri(self, wiki_server, tmp_path):
        wiki_server.script = [
            (
                200,
                {
                    "annotations": [
                        {
                            "spot": "Omikron",
                            "uri": "http://de.wikipedia.org/wiki/Omikron",
                            "confidence": 0.8,
                            "start": 0,
                            "end": 7,
                        }
                    ]
                },
            )
        ]
        client = live_client(wiki_server, tmp_path, provider="dandelion")
        (annotation,) = wikify(client, "Omikron breitet sich aus.")
        assert annotation.concept_id == "http://de.wikipedia.org/wiki/Omikron"
        assert annotation.confidence == 0.8
        assert "token=token-123" in wiki_server.requests[0]

    def test_min_confidence_filter_applies_after_cache(self, wiki_server, tmp_path):
        wiki_server.script = [(200, TAGME_RESPONSE)]
        text = "Das gilt auch für die Variante Omikron."
        strict = live_client(wiki_server, tmp_path, min_confidence=0.5)
        assert wikify(strict, text) == []
        lax = live_client(wiki_server, tmp_path, min_confidence=0.01)
        annotations = wikify(lax, text)
        assert len(annotations) == 2  # replayed from cache, re-filtered
        assert len(wiki_server.requests) == 1

    def test_auth_failure(self, wiki_server, tmp_path):
        wiki_server.script = [(401, {"error": "bad token"})]
        with pytest.raises(CredentialError):
            wikify(live_client(wiki_server, tmp_path), "Text")

    def test_missing_token(self, tmp_path, monkeypatch):
        monkeypatch.delenv("TAGME_TOKEN", raising=False)
        client = WikifyClient(provider="tagme", cache_dir=tmp_path, base_url="http://x")
        with pytest.raises(CredentialError):
            wikify(client, "Text")

    def test_rate_limit_retries_then_fails(self, wiki_server, tmp_path):
        wiki_server.script = [(429, {})]
        with pytest.raises(RateLimitError):
            wikify(live_client(wiki_server, tmp_path), "Text")
        assert len(wiki_server.requests) == 3

    def test_rate_limit_then_success(self, wiki_server, tmp_path):
        wiki_server.script = [(429, {}), (200, TAGME_RESPONSE)]
        annotations = wikify(
            live_client(wiki_server, tmp_path), "Das gilt auch für die Variante Omikron."
        )
        assert len(annotations) == 1

    def test_malformed_response(self, wiki_server, tmp_path):
        wiki_server.script = [(200, {"nothing": []})]
        with pytest.raises(WikifyProtocolError):
            wikify(live_client(wiki_server, tmp_path), "Text")

    def test_out_of_range_confidence_rejected(self, wiki_server, tmp_path):
        wiki_server.script = [
            (200, {"annotations": [{"spot": "x", "title": "X", "rho": 1.4,
                                    "start": 0, "end": 1}]})
        ]
        with pytest.raises(WikifyProtocolError):
            wikify(live_client(wiki_server, tmp_path), "xy")

    def test_cache_only_blocks_network(self, wiki_server, tmp_path):
        client = live_client(wiki_server, tmp_path, cache_only=True)
        with pytest.raises(CacheMissError):
            wikify(client, "Niemals gesehen.")
        assert wiki_server.requests == []

    def test_cache_file_layout(self, wiki_server, tmp_path):
        wiki_server.script = [(200, TAGME_RESPONSE)]
        client = live_client(wiki_server, tmp_path)
        text = "Das gilt auch für die Variante Omikron."
        wikify(client, text)
        expected = tmp_path / "cache" / f"{cache_key('tagme', text)}.json"
        assert expected.exists()
        assert json.loads(expected.read_text())["annotations"]


class TestMainConcept:
    def test_empty_intro_scope(self, wikifier):
        briefing = parse_briefing(
            json.dumps(
                {"id": "x", "title": "", "intro": "", "date": None, "turns": []}
            )
        )
        concept = main_concept(briefing, "intro", wikifier)
        assert concept.annotations == ()
        assert concept.scope == "intro" and concept.source_ref == "x"

    def test_duplicate_concepts_keep_max(self, tmp_path):
        text = "Impfung und nochmal Impfung."
        raw = {
            "annotations": [
                {"spot": "Impfung", "title": "Impfstoff", "rho": 0.8, "start": 0, "end": 7},
                {"spot": "Impfung", "title": "Impfstoff", "rho": 0.6, "start": 21, "end": 28},
            ]
        }
        cache = tmp_path / "cache"
        cache.mkdir()
        (cache / f"{cache_key('fixture', text)}.json").write_text(json.dumps(raw))
        client = WikifyClient(provider="fixture", cache_dir=cache)
        briefing = parse_briefing(
            json.dumps(
                {"id": "x", "title": text, "intro": "", "date": None, "turns": []}
            )
        )
        concept = main_concept(briefing, "title", client)
        assert len(concept.annotations) == 1
        assert concept.annotations[0].confidence == 0.8

    def test_scopes_are_distinct(self, briefings, wikifier):
        briefing = briefings["pb-001"]
        title = main_concept(briefing, "title", wikifier)
        intro = main_concept(briefing, "intro", wikifier)
        assert title.scope == "title" and intro.scope == "intro"
        assert title.confidences() != intro.confidences()

    def test_sentence_scope(self, sentences, wikifier):
        sentence = sentences["pb-001"][7]  # the Omikron sentence
        concept = sentence_concepts(sentence, wikifier)
        assert concept.scope == "sentence"
        assert concept.source_ref == "pb-001#7"
        assert "SARS-CoV-2-Variante Omikron" in concept.confidences()

    def test_unknown_scope(self, briefings, wikifier):
        with pytest.raises(ValueError):
            main_concept(briefings["pb-001"], "footer", wikifier)


def anno(concept_id, confidence):
    return ConceptAnnotation(
        surface=concept_id, concept_id=concept_id, confidence=confidence, span=(0, 1)
    )


def main_of(*pairs):
    return MainConcept(
        scope="title",
        source_ref="d",
        annotations=tuple(anno(c, v) for c, v in pairs),
    )


class TestOverlapScore:
    def test_disjoint(self):
        assert overlap_score([anno("A", 0.9)], main_of(("B", 0.9))) == 0.0

    def test_single_shared_sums_both_sides(self):
        score = overlap_score([anno("A", 0.6)], main_of(("A", 0.8)))
        assert score == pytest.approx(1.4)

    def test_two_shared(self):
        score = overlap_score(
            [anno("A", 0.5), anno("B", 0.2)],
            main_of(("A", 0.5), ("B", 0.3)),
        )
        assert score == pytest.approx(1.5)

    def test_sentence_only_mode(self):
        score = overlap_score([anno("A", 0.6)], main_of(("A", 0.8)), mode="sentence_only")
        assert score == pytest.approx(0.6)

    def test_duplicate_sentence_annotations_collapse(self):
        score = overlap_score(
            [anno("A", 0.6), anno("A", 0.4)], main_of(("A", 0.8))
        )
        assert score == pytest.approx(1.4)

    @given(
        st.lists(
            st.tuples(st.sampled_from("ABCDE"), st.floats(0, 1)), max_size=6
        ),
        st.lists(
            st.tuples(st.sampled_from("ABCDE"), st.floats(0, 1)), max_size=6
        ),
    )
    def test_non_negative_and_zero_iff_disjoint(self, left, right):
        sentence = [anno(c, v) for c, v in left]
        main = main_of(*{c: v for c, v in right}.items())
        score = overlap_score(sentence, main)
        assert score >= 0.0
        shared = {c for c, _ in left} & {c for c, _ in right}
        if not shared:
            assert score == 0.0

    @given(st.floats(0.01, 1), st.floats(0.01, 1))
    def test_adding_shared_concept_never_decreases(self, a, b):
        base = overlap_score([anno("A", a)], main_of(("A", b)))
        extended = overlap_score(
            [anno("A", a), anno("Z", 0.5)], main_of(("A", b), ("Z", 0.5))
        )
        assert extended >= base


class TestDedupe:
    def test_keeps_first_on_tie(self):
        first = anno("A", 0.5)
        tied = ConceptAnnotation(surface="x", concept_id="A", confidence=0.5, span=(1, 2))
        assert dedupe_annotations([first, tied]) == (first,)
