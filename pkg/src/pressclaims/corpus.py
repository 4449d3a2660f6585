"""Press-briefing transcripts: parsing, sentence splitting, gold labels.

A briefing arrives as one UTF-8 JSON document::

    {"id": str, "title": str, "intro": str, "date": str|null,
     "turns": [{"speaker": str, "role": str, "text": str}]}

Turn text is preserved byte-exact; sentences are trimmed substrings of
their turn and never cross a turn boundary.
"""

from __future__ import annotations

import datetime as _dt
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import GoldValidationError, SchemaError, TranscriptParseError


class Role(str, Enum):
    EXPERT = "expert"
    MODERATOR = "moderator"
    JOURNALIST = "journalist"
    UNKNOWN = "unknown"


class GoldClass(str, Enum):
    NO_CLAIM = "no_claim"
    INCOMPLETE_CLAIM = "incomplete_claim"
    COMPLETE_CLAIM = "complete_claim"


@dataclass(frozen=True, slots=True)
class SpeakerTurn:
    speaker: str
    role: Role
    text: str


@dataclass(frozen=True, slots=True)
class PressBriefing:
    id: str
    title: str
    intro_text: str
    turns: tuple[SpeakerTurn, ...]
    date: str | None = None


@dataclass(frozen=True, slots=True)
class Sentence:
    doc_id: str
    index: int
    turn_index: int
    text: str
    token_count: int
    speaker: str
    # character span within the turn's text; turn.text[char_start:char_end] == text
    char_start: int = -1
    char_end: int = -1


@dataclass(frozen=True, slots=True, order=True)
class GoldLabel:
    doc_id: str
    sentence_index: int
    gold_class: GoldClass = field(compare=False)


@dataclass(frozen=True, slots=True)
class CorpusStats:
    sentence_count: int
    mean_tokens: float | None  # None when the corpus is empty


# A token is a maximal run of letters/digits or one single other
# non-space character (punctuation, symbols, underscore).
_TOKEN_RE = re.compile(r"[^\W_]+|[^\w\s]|_", re.UNICODE)

# German abbreviations after which a terminal period never ends a
# sentence.  Multi-part entries ("z. B.") suppress at each internal dot.
DEFAULT_ABBREVIATIONS: tuple[str, ...] = (
    "z. B.",
    "Dr.",
    "Prof.",
    "bzw.",
    "ca.",
    "u. a.",
    "d. h.",
    "Nr.",
)

_TERMINATORS = frozenset(".!?")
_CLOSING_QUOTES = frozenset("\"'“”„’‘)]}»«›‹")
_OPENING_QUOTES = frozenset("\"'“„‘‚([{«»‹›")


def tokenize(text: str) -> list[str]:
    """Split text into word and punctuation tokens."""
    return _TOKEN_RE.findall(text)


def word_tokens(text: str) -> list[str]:
    """Only the letter/digit tokens, for embedding lookups."""
    return [t for t in _TOKEN_RE.findall(text) if t[0].isalnum() and t != "_"]


def parse_briefing(document: bytes | str) -> PressBriefing:
    """Parse one transcript JSON document into a PressBriefing.

    Raises TranscriptParseError (with byte offset) for invalid JSON and
    SchemaError for structurally valid JSON that violates the schema.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        raw = json.loads(document)
    except json.JSONDecodeError as exc:
        raise TranscriptParseError(
            f"invalid transcript JSON at offset {exc.pos}: {exc.msg}", offset=exc.pos
        ) from exc

    if not isinstance(raw, dict):
        raise SchemaError("transcript root must be a JSON object")
    for key in ("id", "title", "intro", "turns"):
        if key not in raw:
            raise SchemaError(f"transcript missing required key {key!r}")

    doc_id = raw["id"]
    if not isinstance(doc_id, str) or not doc_id:
        raise SchemaError("'id' must be a non-empty string")
    title = raw["title"]
    intro = raw["intro"]
    if not isinstance(title, str) or not isinstance(intro, str):
        raise SchemaError("'title' and 'intro' must be strings (may be empty)")

    date = raw.get("date")
    if date is not None:
        if not isinstance(date, str):
            raise SchemaError("'date' must be an ISO-8601 string or null")
        try:
            _dt.date.fromisoformat(date)
        except ValueError as exc:
            raise SchemaError(f"'date' is not ISO-8601: {date!r}") from exc

    turns_raw = raw["turns"]
    if not isinstance(turns_raw, list):
        raise SchemaError("'turns' must be a list")
    turns = []
    for pos, turn in enumerate(turns_raw):
        if not isinstance(turn, dict):
            raise SchemaError(f"turn {pos} must be an object")
        try:
            speaker, role, text = turn["speaker"], turn["role"], turn["text"]
        except KeyError as exc:
            raise SchemaError(f"turn {pos} missing key {exc.args[0]!r}") from exc
        if not all(isinstance(v, str) for v in (speaker, role, text)):
            raise SchemaError(f"turn {pos} fields must be strings")
        try:
            role_enum = Role(role)
        except ValueError:
            role_enum = Role.UNKNOWN
        turns.append(SpeakerTurn(speaker=speaker, role=role_enum, text=text))

    return PressBriefing(
        id=doc_id, title=title, intro_text=intro, turns=tuple(turns), date=date
    )


def serialize_briefing(briefing: PressBriefing) -> str:
    """Canonical JSON form; inverse of parse_briefing for schema-clean input."""
    payload = {
        "id": briefing.id,
        "title": briefing.title,
        "intro": briefing.intro_text,
        "date": briefing.date,
        "turns": [
            {"speaker": t.speaker, "role": t.role.value, "text": t.text}
            for t in briefing.turns
        ],
    }
    return canonical_json(payload)


def canonical_json(payload) -> str:
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _abbreviation_guard(text: str, dot: int, abbreviations: Sequence[str]) -> bool:
    """True when the period at `dot` sits inside or ends an abbreviation."""
    for abbrev in abbreviations:
        for offset, ch in enumerate(abbrev):
            if ch != ".":
                continue
            start = dot - offset
            if start < 0 or start + len(abbrev) > len(text):
                continue
            if text[start : start + len(abbrev)] != abbrev:
                continue
            if start > 0 and (text[start - 1].isalnum() or text[start - 1] == "."):
                continue
            return True
    return False


def _is_boundary(text: str, pos: int, abbreviations: Sequence[str]) -> int | None:
    """Return the end (exclusive) of a sentence terminated at `pos`, or None.

    A terminator ends a sentence when it is followed by whitespace and a
    capital letter or digit (quotes in between are tolerated), or when only
    whitespace remains in the turn.  Periods inside known abbreviations
    never end a sentence.
    """
    if text[pos] == "." and _abbreviation_guard(text, pos, abbreviations):
        return None
    end = pos + 1
    while end < len(text) and text[end] in _CLOSING_QUOTES:
        end += 1
    probe = end
    while probe < len(text) and text[probe].isspace():
        probe += 1
    if probe == len(text):
        return end
    if probe == end:  # no whitespace after the terminator
        return None
    while probe < len(text) and text[probe] in _OPENING_QUOTES:
        probe += 1
    if probe < len(text) and (text[probe].isupper() or text[probe].isdigit()):
        return end
    return None


def _split_turn_spans(
    text: str, abbreviations: Sequence[str]
) -> list[tuple[int, int]]:
    spans = []
    start = 0
    pos = 0
    while pos < len(text):
        if text[pos] in _TERMINATORS:
            end = _is_boundary(text, pos, abbreviations)
            if end is not None:
                spans.append((start, end))
                start = end
                pos = end
                continue
        pos += 1
    if start < len(text):
        spans.append((start, len(text)))
    return spans


def split_sentences(
    briefing: PressBriefing,
    abbreviations: Sequence[str] = DEFAULT_ABBREVIATIONS,
) -> list[Sentence]:
    """Split every turn into sentences with document-wide gapless indices."""
    sentences: list[Sentence] = []
    index = 0
    for turn_index, turn in enumerate(briefing.turns):
        for span_start, span_end in _split_turn_spans(turn.text, abbreviations):
            raw = turn.text[span_start:span_end]
            piece = raw.strip()
            if not piece:
                continue
            tokens = tokenize(piece)
            if not tokens:
                continue
            start = span_start + (len(raw) - len(raw.lstrip()))
            sentences.append(
                Sentence(
                    doc_id=briefing.id,
                    index=index,
                    turn_index=turn_index,
                    text=piece,
                    token_count=len(tokens),
                    speaker=turn.speaker,
                    char_start=start,
                    char_end=start + len(piece),
                )
            )
            index += 1
    return sentences


def corpus_stats(sentences: Iterable[Sentence]) -> CorpusStats:
    """Sentence count and mean token length; mean is None for no sentences."""
    count = 0
    total = 0
    for sentence in sentences:
        count += 1
        total += sentence.token_count
    if count == 0:
        return CorpusStats(sentence_count=0, mean_tokens=None)
    return CorpusStats(sentence_count=count, mean_tokens=total / count)


def load_gold(data: bytes | str) -> list[GoldLabel]:
    """Load gold labels from JSON lines, sorted by (doc_id, sentence_index)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    labels: list[GoldLabel] = []
    seen: set[tuple[str, int]] = set()
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise GoldValidationError(f"line {lineno}: invalid JSON: {exc.msg}") from exc
        try:
            doc_id = raw["doc_id"]
            sentence_index = raw["sentence_index"]
            klass = raw["class"]
        except (TypeError, KeyError) as exc:
            raise GoldValidationError(f"line {lineno}: missing field {exc}") from exc
        if not isinstance(doc_id, str) or not doc_id:
            raise GoldValidationError(f"line {lineno}: 'doc_id' must be a non-empty string")
        if not isinstance(sentence_index, int) or isinstance(sentence_index, bool) or sentence_index < 0:
            raise GoldValidationError(f"line {lineno}: 'sentence_index' must be a non-negative int")
        try:
            gold_class = GoldClass(klass)
        except ValueError as exc:
            raise GoldValidationError(f"line {lineno}: unknown class {klass!r}") from exc
        key = (doc_id, sentence_index)
        if key in seen:
            raise GoldValidationError(f"line {lineno}: duplicate label for {key}")
        seen.add(key)
        labels.append(GoldLabel(doc_id=doc_id, sentence_index=sentence_index, gold_class=gold_class))
    labels.sort()
    return labels
