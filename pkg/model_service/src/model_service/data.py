"""Labeled-sentence loading and the stratified train/eval split."""

from __future__ import annotations

import json
import random
from pathlib import Path

CLAIM = "claim"
NO_CLAIM = "no_claim"
LABELS = (NO_CLAIM, CLAIM)  # index == class id


def load_labeled(path: str | Path) -> list[tuple[str, str]]:
    """Read JSONL rows {"text": str, "label": "claim"|"no_claim"}."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
            text, label = raw["text"], raw["label"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ValueError(f"{path}:{lineno}: bad row ({exc})") from exc
        if label not in LABELS:
            raise ValueError(f"{path}:{lineno}: unknown label {label!r}")
        if not isinstance(text, str) or not text.strip():
            raise ValueError(f"{path}:{lineno}: empty text")
        rows.append((text, label))
    return rows


def stratified_split(
    data: list[tuple[str, str]],
    train_fraction: float,
    eval_fraction: float,
    seed: int,
) -> tuple[list[tuple[str, str]], list[tuple[str, str]]]:
    """Deterministic per-class split; eval takes the tail of each class."""
    rng = random.Random(seed)
    train: list[tuple[str, str]] = []
    evaluation: list[tuple[str, str]] = []
    for label in LABELS:
        rows = [r for r in data if r[1] == label]
        rng.shuffle(rows)
        n_train = round(len(rows) * train_fraction)
        n_eval = min(len(rows) - n_train, max(1, round(len(rows) * eval_fraction)))
        train.extend(rows[:n_train])
        evaluation.extend(rows[n_train : n_train + n_eval])
    rng.shuffle(train)
    rng.shuffle(evaluation)
    return train, evaluation
