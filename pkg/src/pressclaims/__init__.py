"""Claim-bearing statement extraction from press-briefing transcripts."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    GoldClass,
    GoldLabel,
    PressBriefing,
    Role,
    Sentence,
    SpeakerTurn,
    corpus_stats,
    load_gold,
    parse_briefing,
    split_sentences,
)
from .embeddings import SentenceVector, VectorStore, cosine, load_vectors, sentence_vector  # noqa: F401
from .segmentation import (  # noqa: F401
    Segment,
    Segmentation,
    SegmentationParams,
    segment_exact,
    segment_greedy,
    segment_score,
    split_gain,
)
from .claims import (  # noqa: F401
    BaselineModel,
    ClaimScore,
    ClassifierEndpoint,
    baseline_score,
    baseline_train,
    remote_score,
    select_claims,
)
from .concepts import (  # noqa: F401
    ConceptAnnotation,
    MainConcept,
    WikifyClient,
    main_concept,
    overlap_score,
    wikify,
)
from .extraction import (  # noqa: F401
    PipelineConfig,
    PipelineResources,
    Statement,
    TopicalScore,
    assemble_statements,
    filter_claims,
    run_pipeline,
    suggest_threshold,
    topical_scores,
)
from .evaluation import (  # noqa: F401
    ConfusionCounts,
    EvaluationReport,
    MetricRow,
    complete_ratio,
    confusion,
    prf,
    sweep,
)
