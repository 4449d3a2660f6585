"""Coherence-driven segmentation of a document's sentence sequence.

A segment scores as the Euclidean norm of the sum of its sentence vectors;
collinear (topically uniform) runs score high per sentence, so splitting
them gains nothing, while splitting across a topic shift does.  Both
optimizers maximize the summed segment scores: a greedy splitter driven by
the single best split gain, and an exact dynamic program over prefix sums.
The hot loops live in `pressclaims._kernels`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .embeddings import SentenceVector
from .errors import ConfigError

VectorsLike = Sequence[SentenceVector] | Sequence[np.ndarray] | np.ndarray


@dataclass(frozen=True, slots=True)
class Segment:
    doc_id: str
    start: int  # sentence index, inclusive
    end: int  # sentence index, inclusive
    score: float


@dataclass(frozen=True, slots=True)
class Segmentation:
    segments: tuple[Segment, ...]
    objective: float

    def boundaries(self) -> list[int]:
        """Interior split positions (start indices of all but the first segment)."""
        return [seg.start for seg in self.segments[1:]]


@dataclass(frozen=True, slots=True)
class SegmentationParams:
    mode: str = "greedy"  # "greedy" | "exact"
    target_segments: int | None = None
    min_gain: float | None = None  # None: derived as 20% of the first gain
    min_segment_len: int = 1

    def __post_init__(self):
        if self.mode not in ("greedy", "exact"):
            raise ConfigError(f"unknown segmentation mode {self.mode!r}")
        if self.mode == "exact" and self.target_segments is None:
            raise ConfigError("exact segmentation requires target_segments")
        if self.target_segments is not None and self.target_segments < 1:
            raise ConfigError("target_segments must be >= 1")
        if self.min_gain is not None and not self.min_gain >= 0:
            raise ConfigError("min_gain must be >= 0")
        if self.min_segment_len < 1:
            raise ConfigError("min_segment_len must be >= 1")


def _as_matrix(vectors: VectorsLike) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        matrix = np.asarray(vectors, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("vector matrix must be 2-dimensional")
    else:
        rows = [v.values if isinstance(v, SentenceVector) else np.asarray(v, dtype=np.float64) for v in vectors]
        if not rows:
            return np.zeros((0, 0), dtype=np.float64)
        matrix = np.vstack(rows).astype(np.float64, copy=False)
    return np.ascontiguousarray(matrix)


def _prefix(matrix: np.ndarray) -> np.ndarray:
    prefix = np.zeros((matrix.shape[0] + 1, matrix.shape[1]), dtype=np.float64)
    np.cumsum(matrix, axis=0, out=prefix[1:])
    return prefix


def segment_score(vectors: VectorsLike) -> float:
    """Norm of the componentwise vector sum; an empty segment scores 0."""
    matrix = _as_matrix(vectors)
    if matrix.shape[0] == 0:
        return 0.0
    return float(np.linalg.norm(matrix.sum(axis=0)))


def split_gain(vectors: VectorsLike, split_point: int) -> float:
    """Objective gain from splitting at `split_point` (0 < split < n).

    Non-negative by the triangle inequality; rounding noise is clamped.
    """
    matrix = _as_matrix(vectors)
    n = matrix.shape[0]
    if not 0 < split_point < n:
        raise ValueError(f"split point must be in (0, {n}), got {split_point}")
    prefix = _prefix(matrix)
    gain = (
        _kernels.seg_norm(prefix, 0, split_point)
        + _kernels.seg_norm(prefix, split_point, n)
        - _kernels.seg_norm(prefix, 0, n)
    )
    return gain if gain > 0.0 else 0.0


def _build(prefix: np.ndarray, bounds: list[int], doc_id: str) -> Segmentation:
    n = prefix.shape[0] - 1
    edges = [0, *bounds, n]
    segments = []
    for a, b in zip(edges, edges[1:]):
        segments.append(
            Segment(doc_id=doc_id, start=a, end=b - 1, score=float(_kernels.seg_norm(prefix, a, b)))
        )
    return Segmentation(segments=tuple(segments), objective=sum(s.score for s in segments))


def segment_greedy(
    vectors: VectorsLike, params: SegmentationParams, doc_id: str = ""
) -> Segmentation:
    """Split repeatedly at the single best gain until a stop rule fires.

    Stops at `target_segments` when set; otherwise when the best available
    gain falls below `min_gain` (by default 20% of the first split's gain;
    a document whose first gain is zero stays in one segment).
    """
    matrix = _as_matrix(vectors)
    n = matrix.shape[0]
    if n < 1:
        raise ValueError("cannot segment an empty document")
    target = params.target_segments
    min_len = params.min_segment_len
    if target is not None and target > n:
        raise ValueError(f"target_segments {target} exceeds sentence count {n}")
    if target is not None and target * min_len > n:
        raise ValueError(f"{target} segments of >= {min_len} sentences do not fit {n}")

    prefix = _prefix(matrix)
    # segment -> its best split, cached between iterations
    pieces: list[tuple[int, int]] = [(0, n)]
    best: dict[tuple[int, int], tuple[int, float]] = {}

    def candidate(piece: tuple[int, int]) -> tuple[int, float]:
        if piece not in best:
            a, b = piece
            t, combined = _kernels.best_split(prefix, a, b, min_len)
            if t < 0:
                best[piece] = (-1, float("-inf"))
            else:
                gain = combined - _kernels.seg_norm(prefix, a, b)
                best[piece] = (t, gain if gain > 0.0 else 0.0)
        return best[piece]

    threshold = params.min_gain
    while target is None or len(pieces) < target:
        winner = None
        winner_gain = float("-inf")
        for piece in pieces:
            t, gain = candidate(piece)
            if t >= 0 and gain > winner_gain:
                winner, winner_gain = piece, gain
        if winner is None:
            break  # no segment can be split under min_segment_len
        if threshold is None and target is None:
            if winner_gain <= 0.0:
                break
            threshold = 0.2 * winner_gain
        if threshold is not None and winner_gain < threshold:
            break
        t, _ = best[winner]
        at = pieces.index(winner)
        pieces[at : at + 1] = [(winner[0], t), (t, winner[1])]

    return _build(prefix, [a for a, _ in pieces[1:]], doc_id)


def segment_exact(
    vectors: VectorsLike, k: int, min_segment_len: int = 1, doc_id: str = ""
) -> Segmentation:
    """The exactly optimal segmentation into k contiguous segments."""
    matrix = _as_matrix(vectors)
    if matrix.shape[0] < 1:
        raise ValueError("cannot segment an empty document")
    prefix = _prefix(matrix)
    try:
        _, bounds = _kernels.exact_dp(prefix, k, min_segment_len)
    except ValueError as exc:
        raise ValueError(str(exc)) from None
    return _build(prefix, list(bounds), doc_id)


def segment_document(
    vectors: VectorsLike, params: SegmentationParams, doc_id: str = ""
) -> Segmentation:
    """Dispatch on params.mode."""
    if params.mode == "exact":
        assert params.target_segments is not None  # enforced by params
        return segment_exact(
            vectors, params.target_segments, params.min_segment_len, doc_id=doc_id
        )
    return segment_greedy(vectors, params, doc_id=doc_id)
