"""Pipeline orchestration: segment, score claims, filter by topic, assemble.

Claim sentences above the confidence threshold become statements: one
sentence each by default, or merged over their enclosing coherence segment
when clustering is enabled.  Topical filtering drops claims whose
similarity to the briefing's main concept falls below a threshold; claims
that could not be scored (all tokens out of vocabulary) are kept and
flagged rather than silently dropped.
"""

from __future__ import annotations

import dataclasses
import hashlib
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Sequence

from .claims import (
    BaselineModel,
    ClaimScore,
    ClassifierEndpoint,
    baseline_score_many,
    remote_score,
    select_claims,
)
from .concepts import WikifyClient, main_concept, overlap_score, wikify
from .corpus import PressBriefing, Sentence, canonical_json, serialize_briefing, split_sentences
from .embeddings import VectorStore, cosine, sentence_vector, text_vector
from .errors import ConfigError, ConsistencyError, StageError, ZeroVectorError
from .segmentation import Segmentation, SegmentationParams, segment_document

FILTER_METHODS = ("embedding", "wikify_title", "wikify_intro")


@dataclass(frozen=True, slots=True)
class TopicalScore:
    doc_id: str
    sentence_index: int
    method: str
    value: float | None
    unscored: bool = False


@dataclass(frozen=True, slots=True)
class Statement:
    doc_id: str
    sentence_span: tuple[int, int]  # inclusive
    text: str
    anchor_claims: tuple[ClaimScore, ...]
    topical: tuple[TopicalScore, ...]
    method_provenance: dict
    # audit trail: (turn_index, char_start, char_end) per sentence in the span
    source_spans: tuple[tuple[int, int, int], ...] = ()


@dataclass(frozen=True)
class PipelineConfig:
    claim_threshold: float = 0.8
    filter_method: str | None = "embedding"
    filter_threshold: float | None = None
    clustering: bool = False
    segmentation: SegmentationParams = field(default_factory=SegmentationParams)
    classifier: str = "baseline"
    overlap_mode: str = "both"  # see concepts.overlap_score

    def __post_init__(self):
        if not 0.0 <= self.claim_threshold <= 1.0:
            raise ConfigError(f"claim_threshold {self.claim_threshold} outside [0, 1]")
        if self.filter_method is not None and self.filter_method not in FILTER_METHODS:
            raise ConfigError(f"unknown filter_method {self.filter_method!r}")
        if self.classifier not in ("baseline", "remote"):
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.overlap_mode not in ("both", "sentence_only"):
            raise ConfigError(f"unknown overlap_mode {self.overlap_mode!r}")
        if self.filter_threshold is not None:
            if self.filter_method == "embedding" and not -1.0 <= self.filter_threshold <= 1.0:
                raise ConfigError("embedding filter_threshold must be in [-1, 1]")
            if self.filter_method in ("wikify_title", "wikify_intro") and self.filter_threshold < 0:
                raise ConfigError("wikify filter_threshold must be >= 0")

    def to_dict(self) -> dict:
        seg = self.segmentation
        return {
            "claim_threshold": self.claim_threshold,
            "filter_method": self.filter_method,
            "filter_threshold": self.filter_threshold,
            "clustering": self.clustering,
            "segmentation": {
                "mode": seg.mode,
                "target_segments": seg.target_segments,
                "min_gain": seg.min_gain,
                "min_segment_len": seg.min_segment_len,
            },
            "classifier": self.classifier,
            "overlap_mode": self.overlap_mode,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PipelineConfig":
        known = {
            "claim_threshold",
            "filter_method",
            "filter_threshold",
            "clustering",
            "segmentation",
            "classifier",
            "overlap_mode",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        seg = kwargs.pop("segmentation", None)
        try:
            if seg is not None:
                kwargs["segmentation"] = SegmentationParams(**seg)
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def hash(self) -> str:
        return hashlib.sha256(canonical_json(self.to_dict()).encode()).hexdigest()


@dataclass
class PipelineResources:
    store: VectorStore | None = None
    model: BaselineModel | None = None
    endpoint: ClassifierEndpoint | None = None
    wikifier: WikifyClient | None = None


@dataclass(frozen=True, slots=True)
class PipelineOutcome:
    statements: tuple[Statement, ...]
    manifest: dict


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def topical_scores(
    claims: Sequence[ClaimScore],
    briefing: PressBriefing,
    sentences: Sequence[Sentence],
    method: str,
    resources: PipelineResources,
    overlap_mode: str = "both",
) -> list[TopicalScore]:
    """Similarity of each claim sentence to the briefing's main concept."""
    if method not in FILTER_METHODS:
        raise ConfigError(f"unknown topical method {method!r}")
    by_index = {s.index: s for s in sentences}
    missing = [c.sentence_index for c in claims if c.sentence_index not in by_index]
    if missing:
        raise ConsistencyError(f"claims reference unknown sentence indices {missing}")

    scores: list[TopicalScore] = []
    if method == "embedding":
        if resources.store is None:
            raise ConfigError("embedding filter requires a vector store")
        title_vec = text_vector(briefing.title, resources.store)
        for claim in claims:
            vec = sentence_vector(by_index[claim.sentence_index], resources.store)
            if title_vec.flag_zero or vec.flag_zero:
                value, unscored = None, True
            else:
                try:
                    value, unscored = cosine(title_vec, vec), False
                except ZeroVectorError:
                    value, unscored = None, True
            scores.append(
                TopicalScore(claim.doc_id, claim.sentence_index, method, value, unscored)
            )
        return scores

    if resources.wikifier is None:
        raise ConfigError(f"{method} filter requires a wikify client")
    scope = "title" if method == "wikify_title" else "intro"
    main = main_concept(briefing, scope, resources.wikifier)
    for claim in claims:
        annotations = wikify(resources.wikifier, by_index[claim.sentence_index].text)
        value = overlap_score(annotations, main, mode=overlap_mode)
        scores.append(TopicalScore(claim.doc_id, claim.sentence_index, method, value, False))
    return scores


def filter_claims(
    claims: Sequence[ClaimScore],
    scores: Sequence[TopicalScore],
    threshold: float,
) -> list[ClaimScore]:
    """Keep claims whose topical score reaches the threshold.

    Unscored claims pass the filter (they are flagged in the score list);
    a claim without any score entry violates the contract.
    """
    by_key = {(t.doc_id, t.sentence_index): t for t in scores}
    kept = []
    for claim in claims:
        score = by_key.get((claim.doc_id, claim.sentence_index))
        if score is None:
            raise ConsistencyError(
                f"no topical score for ({claim.doc_id}, {claim.sentence_index})"
            )
        if score.unscored or score.value >= threshold:
            kept.append(claim)
    return kept


def suggest_threshold(scores: Sequence[float]) -> float:
    """Pick the similarity at the strongest bend of the score distribution.

    Scores are sorted descending; the bend is the point where the drop to
    the following scores accelerates the most (maximum forward second
    difference).  Distributions without a bend keep everything: the
    minimum score is returned.  Always returns one of the input scores.
    """
    finite = [s for s in scores if s == s and abs(s) != float("inf")]
    if len(finite) < 3:
        raise ValueError(f"need at least 3 finite scores, got {len(finite)}")
    ordered = sorted(finite, reverse=True)
    second = [
        ordered[i] - 2.0 * ordered[i + 1] + ordered[i + 2] for i in range(len(ordered) - 2)
    ]
    best = max(second)
    if best <= 1e-12:
        return ordered[-1]
    return ordered[second.index(best)]


def assemble_statements(
    claims: Sequence[ClaimScore],
    segmentation: Segmentation,
    sentences: Sequence[Sentence],
    method_provenance: dict | None = None,
) -> list[Statement]:
    """Merge claims into one statement per enclosing segment."""
    by_index = {s.index: s for s in sentences}
    grouped: dict[int, list[ClaimScore]] = {}
    for claim in claims:
        for position, segment in enumerate(segmentation.segments):
            if segment.start <= claim.sentence_index <= segment.end:
                grouped.setdefault(position, []).append(claim)
                break
        else:
            raise ConsistencyError(
                f"claim at index {claim.sentence_index} lies outside the segmentation"
            )
    statements = []
    for position in sorted(grouped):
        segment = segmentation.segments[position]
        span = range(segment.start, segment.end + 1)
        missing = [i for i in span if i not in by_index]
        if missing:
            raise ConsistencyError(f"segmentation spans unknown sentence indices {missing}")
        statements.append(
            Statement(
                doc_id=segment.doc_id,
                sentence_span=(segment.start, segment.end),
                text=" ".join(by_index[i].text for i in span),
                anchor_claims=tuple(sorted(grouped[position], key=lambda c: c.sentence_index)),
                topical=(),
                method_provenance=dict(method_provenance or {}),
                source_spans=tuple(
                    (by_index[i].turn_index, by_index[i].char_start, by_index[i].char_end)
                    for i in span
                ),
            )
        )
    return statements


def _singleton_statements(
    claims: Sequence[ClaimScore],
    sentences: Sequence[Sentence],
    method_provenance: dict,
) -> list[Statement]:
    by_index = {s.index: s for s in sentences}
    statements = []
    for claim in sorted(claims, key=lambda c: c.sentence_index):
        sentence = by_index.get(claim.sentence_index)
        if sentence is None:
            raise ConsistencyError(f"claim references unknown sentence {claim.sentence_index}")
        statements.append(
            Statement(
                doc_id=claim.doc_id,
                sentence_span=(claim.sentence_index, claim.sentence_index),
                text=sentence.text,
                anchor_claims=(claim,),
                topical=(),
                method_provenance=dict(method_provenance),
                source_spans=((sentence.turn_index, sentence.char_start, sentence.char_end),),
            )
        )
    return statements


def run_pipeline(
    briefing: PressBriefing,
    config: PipelineConfig,
    resources: PipelineResources,
) -> PipelineOutcome:
    """Execute the full extraction pipeline on one briefing.

    Deterministic given a fixed config, model, and cached wikification
    responses.  Any stage failure is re-raised as StageError tagged with
    the stage name.
    """
    with _stage("corpus"):
        sentences = split_sentences(briefing)

    with _stage("claim_scoring"):
        if config.classifier == "baseline":
            if resources.model is None or resources.store is None:
                raise ConfigError("baseline classifier requires a model and a vector store")
            scored = baseline_score_many(resources.model, sentences, resources.store)
            model_id = resources.model.model_id
        else:
            if resources.endpoint is None:
                raise ConfigError("remote classifier requires an endpoint")
            scored = remote_score(resources.endpoint, sentences)
            model_id = scored[0].model_id if scored else resources.endpoint.model_id

    with _stage("claim_selection"):
        selected = select_claims(scored, config.claim_threshold)

    resolved_threshold = config.filter_threshold
    attached: dict[tuple[str, int], TopicalScore] = {}
    if config.filter_method is not None and selected:
        with _stage("topical_filtering"):
            tscores = topical_scores(
                selected,
                briefing,
                sentences,
                config.filter_method,
                resources,
                overlap_mode=config.overlap_mode,
            )
            attached = {(t.doc_id, t.sentence_index): t for t in tscores}
            if resolved_threshold is None:
                finite = [t.value for t in tscores if not t.unscored]
                # too few scores to locate a bend: keep everything
                resolved_threshold = suggest_threshold(finite) if len(finite) >= 3 else None
            if resolved_threshold is not None:
                selected = filter_claims(selected, tscores, resolved_threshold)

    provenance = {
        "claim_threshold": config.claim_threshold,
        "filter_method": config.filter_method,
        "filter_threshold": resolved_threshold,
        "segmentation_mode": config.segmentation.mode if config.clustering else None,
    }

    if config.clustering:
        with _stage("segmentation"):
            if resources.store is None:
                raise ConfigError("clustering requires a vector store")
            vectors = [sentence_vector(s, resources.store) for s in sentences]
            segmentation = segment_document(vectors, config.segmentation, doc_id=briefing.id)
        with _stage("assembly"):
            statements = assemble_statements(selected, segmentation, sentences, provenance)
    else:
        with _stage("assembly"):
            statements = _singleton_statements(selected, sentences, provenance)

    statements = [
        dataclasses.replace(
            st,
            topical=tuple(
                attached[(c.doc_id, c.sentence_index)]
                for c in st.anchor_claims
                if (c.doc_id, c.sentence_index) in attached
            ),
        )
        for st in statements
    ]

    briefing_digest = hashlib.sha256(serialize_briefing(briefing).encode()).hexdigest()
    config_hash = config.hash()
    manifest = {
        "config_hash": config_hash,
        "model_id": model_id,
        "input_digests": {briefing.id: briefing_digest},
        "manifest_id": hashlib.sha256(
            f"{config_hash}:{model_id}:{briefing_digest}".encode()
        ).hexdigest()[:16],
        "counts": {
            "sentences": len(sentences),
            "scored": len(scored),
            "selected": len(selected),
            "statements": len(statements),
        },
    }
    return PipelineOutcome(statements=tuple(statements), manifest=manifest)


def _round(value: float | None) -> float | None:
    # fixed rounding keeps the serialized output byte-stable across platforms
    return None if value is None else round(value, 10)


def statement_to_dict(statement: Statement, manifest_id: str | None = None) -> dict:
    payload = {
        "doc_id": statement.doc_id,
        "sentence_span": list(statement.sentence_span),
        "text": statement.text,
        "anchor_claims": [
            {
                "doc_id": c.doc_id,
                "sentence_index": c.sentence_index,
                "confidence": _round(c.confidence),
                "model_id": c.model_id,
            }
            for c in statement.anchor_claims
        ],
        "topical": [
            {
                "doc_id": t.doc_id,
                "sentence_index": t.sentence_index,
                "method": t.method,
                "value": _round(t.value),
                "unscored": t.unscored,
            }
            for t in statement.topical
        ],
        "method_provenance": {
            key: (_round(value) if isinstance(value, float) else value)
            for key, value in statement.method_provenance.items()
        },
        "source_spans": [list(span) for span in statement.source_spans],
    }
    if manifest_id is not None:
        payload["manifest"] = manifest_id
    return payload


def statements_to_jsonl(statements: Sequence[Statement], manifest_id: str | None = None) -> str:
    lines = [canonical_json(statement_to_dict(s, manifest_id)) for s in statements]
    return "".join(line + "\n" for line in lines)
