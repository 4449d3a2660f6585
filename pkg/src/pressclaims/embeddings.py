"""Static word vectors, mean sentence vectors, cosine similarity.

The store is the word2vec text format: a "<count> <dim>" header line, then
one "word v1 v2 ... v<dim>" entry per line.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from os import PathLike
from typing import IO, Iterable

import numpy as np

from .corpus import Sentence, word_tokens
from .errors import VectorFormatError, ZeroVectorError


@dataclass(frozen=True, slots=True)
class SentenceVector:
    values: np.ndarray
    in_vocab_tokens: int
    flag_zero: bool


class VectorStore:
    """Immutable word -> vector table with a fixed dimension."""

    def __init__(self, dimension: int, entries: dict[str, np.ndarray]):
        if dimension <= 0:
            raise VectorFormatError(f"dimension must be positive, got {dimension}")
        self.dimension = dimension
        self._entries = entries

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, word: str) -> bool:
        return word in self._entries

    def get(self, word: str) -> np.ndarray | None:
        return self._entries.get(word)

    def words(self) -> Iterable[str]:
        return self._entries.keys()


def load_vectors(source: str | PathLike | IO[str]) -> VectorStore:
    """Load a word-vector table, validating dimensions line by line.

    Duplicate words keep the last occurrence (with a warning); any row whose
    value count disagrees with the header dimension raises VectorFormatError
    with the 1-based line number.
    """
    if hasattr(source, "read"):
        return _load_from_lines(source, name=getattr(source, "name", "<stream>"))
    with open(source, "r", encoding="utf-8") as handle:
        return _load_from_lines(handle, name=str(source))


def _load_from_lines(handle: IO[str], name: str) -> VectorStore:
    header = handle.readline()
    if not header.strip():
        raise VectorFormatError(f"{name}: missing header line", line=1)
    parts = header.split()
    if len(parts) != 2:
        raise VectorFormatError(f"{name}: header must be '<count> <dim>'", line=1)
    try:
        declared_count, dimension = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise VectorFormatError(f"{name}: non-integer header fields", line=1) from exc
    if dimension <= 0:
        raise VectorFormatError(f"{name}: dimension must be positive", line=1)

    entries: dict[str, np.ndarray] = {}
    lineno = 1
    for lineno, line in enumerate(handle, start=2):
        if not line.strip():
            continue
        fields = line.split()
        word = fields[0]
        if len(fields) - 1 != dimension:
            raise VectorFormatError(
                f"{name}: expected {dimension} values, got {len(fields) - 1}", line=lineno
            )
        try:
            vector = np.array([float(v) for v in fields[1:]], dtype=np.float64)
        except ValueError as exc:
            raise VectorFormatError(f"{name}: non-numeric value", line=lineno) from exc
        if not np.all(np.isfinite(vector)):
            raise VectorFormatError(f"{name}: non-finite component", line=lineno)
        if word in entries:
            warnings.warn(f"{name}:{lineno}: duplicate word {word!r}, keeping last")
        vector.setflags(write=False)
        entries[word] = vector

    if declared_count != len(entries):
        warnings.warn(
            f"{name}: header declares {declared_count} entries, found {len(entries)}"
        )
    return VectorStore(dimension=dimension, entries=entries)


def text_vector(text: str, store: VectorStore) -> SentenceVector:
    """Mean vector over in-vocabulary word tokens of a text.

    Tokens are lowercased before lookup (str.lower, which preserves the
    German eszett); punctuation tokens are skipped.
    """
    total = np.zeros(store.dimension, dtype=np.float64)
    hits = 0
    for token in word_tokens(text):
        vector = store.get(token.lower())
        if vector is not None:
            total += vector
            hits += 1
    if hits == 0:
        total.setflags(write=False)
        return SentenceVector(values=total, in_vocab_tokens=0, flag_zero=True)
    total /= hits
    total.setflags(write=False)
    return SentenceVector(values=total, in_vocab_tokens=hits, flag_zero=False)


def sentence_vector(sentence: Sentence, store: VectorStore) -> SentenceVector:
    return text_vector(sentence.text, store)


def cosine(a: SentenceVector, b: SentenceVector) -> float:
    """Cosine similarity in [-1, 1]; zero-flagged inputs have no similarity."""
    if a.flag_zero or b.flag_zero:
        raise ZeroVectorError("cosine undefined for all-OOV sentence vectors")
    if a.values.shape != b.values.shape:
        raise ValueError(
            f"dimension mismatch: {a.values.shape[0]} vs {b.values.shape[0]}"
        )
    denom = float(np.linalg.norm(a.values) * np.linalg.norm(b.values))
    if denom == 0.0:
        raise ZeroVectorError("cosine undefined for zero-norm vector")
    value = float(np.dot(a.values, b.values)) / denom
    return max(-1.0, min(1.0, value))
