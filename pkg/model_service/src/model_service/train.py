"""Fine-tune a sequence-classification transformer as a claim classifier.

The epoch count is meant to be chosen by watching the evaluation loss,
so every epoch's train and eval loss is logged and stored in the metrics
file next to the model weights.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.optim import AdamW

from .config import TrainingConfig
from .data import CLAIM, stratified_split

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingResult:
    artifact_dir: Path
    model_id: str
    metrics: dict
    epoch_log: list[dict]


def _load_transformers():
    import os

    os.environ.setdefault("HF_HUB_DISABLE_PROGRESS_BARS", "1")
    import transformers

    transformers.logging.set_verbosity_error()
    try:
        transformers.utils.logging.disable_progress_bar()
    except AttributeError:
        pass
    return transformers


def _encode(tokenizer, batch, max_length):
    encoded = tokenizer(
        [text for text, _ in batch],
        padding=True,
        truncation=True,
        max_length=max_length,
        return_tensors="pt",
    )
    labels = torch.tensor([1 if label == CLAIM else 0 for _, label in batch])
    return encoded, labels


def _epoch_pass(model, tokenizer, rows, config, optimizer=None):
    """One pass over `rows`; trains when an optimizer is given.

    Returns the mean loss.  On CUDA out-of-memory the batch size is halved
    and the pass restarts, down to single-sentence batches.
    """
    batch_size = config.batch_size
    while True:
        try:
            total, seen = 0.0, 0
            for start in range(0, len(rows), batch_size):
                batch = rows[start : start + batch_size]
                encoded, labels = _encode(tokenizer, batch, config.max_sequence_length)
                if optimizer is None:
                    with torch.no_grad():
                        loss = model(**encoded, labels=labels).loss
                else:
                    loss = model(**encoded, labels=labels).loss
                    loss.backward()
                    optimizer.step()
                    optimizer.zero_grad()
                total += float(loss.detach()) * len(batch)
                seen += len(batch)
            return total / max(seen, 1)
        except (RuntimeError, torch.cuda.OutOfMemoryError) as exc:
            if "out of memory" not in str(exc).lower() or batch_size <= 1:
                raise
            batch_size = max(1, batch_size // 2)
            if torch.cuda.is_available():
                torch.cuda.empty_cache()
            logger.warning("out of memory; retrying with batch_size=%d", batch_size)


def _predict(model, tokenizer, rows, config) -> list[float]:
    model.eval()
    confidences: list[float] = []
    with torch.no_grad():
        for start in range(0, len(rows), config.batch_size):
            batch = rows[start : start + config.batch_size]
            encoded, _ = _encode(tokenizer, batch, config.max_sequence_length)
            probs = torch.softmax(model(**encoded).logits, dim=-1)[:, 1]
            confidences.extend(float(p) for p in probs)
    return confidences


def _prf(confidences, rows) -> dict:
    tp = fp = fn = 0
    for confidence, (_, label) in zip(confidences, rows):
        predicted = confidence >= 0.5
        actual = label == CLAIM
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"precision": precision, "recall": recall, "f1": f1}


def finetune(
    dataset: list[tuple[str, str]],
    config: TrainingConfig,
    output_dir: str | Path,
) -> TrainingResult:
    """Train on a stratified split and save model, tokenizer and metrics."""
    labels = {label for _, label in dataset}
    if len(labels) < 2:
        raise ValueError("dataset must contain both classes")

    transformers = _load_transformers()
    torch.manual_seed(config.seed)

    train_rows, eval_rows = stratified_split(
        dataset, config.train_fraction, config.eval_fraction, config.seed
    )
    if not train_rows or not eval_rows:
        raise ValueError("split produced an empty train or eval set")

    tokenizer = transformers.AutoTokenizer.from_pretrained(config.base_model_name)
    model = transformers.AutoModelForSequenceClassification.from_pretrained(
        config.base_model_name, num_labels=2
    )
    optimizer = AdamW(model.parameters(), lr=config.learning_rate)

    epoch_log: list[dict] = []
    for epoch in range(1, config.epochs + 1):
        model.train()
        train_loss = _epoch_pass(model, tokenizer, train_rows, config, optimizer)
        model.eval()
        eval_loss = _epoch_pass(model, tokenizer, eval_rows, config)
        epoch_log.append({"epoch": epoch, "train_loss": train_loss, "eval_loss": eval_loss})
        logger.info("epoch %d: train_loss=%.4f eval_loss=%.4f", epoch, train_loss, eval_loss)

    metrics = _prf(_predict(model, tokenizer, eval_rows, config), eval_rows)
    metrics["eval_examples"] = len(eval_rows)
    metrics["train_examples"] = len(train_rows)

    digest = hashlib.sha256()
    for text, label in dataset:
        digest.update(f"{label}\x00{text}\x00".encode("utf-8"))
    digest.update(repr((config.learning_rate, config.epochs, config.seed)).encode())
    model_id = f"claims-{Path(config.base_model_name).name}-{digest.hexdigest()[:8]}"

    artifact_dir = Path(output_dir)
    artifact_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(artifact_dir)
    tokenizer.save_pretrained(artifact_dir)
    (artifact_dir / "meta.json").write_text(
        json.dumps(
            {
                "model_id": model_id,
                "base_model_name": config.base_model_name,
                "max_sequence_length": config.max_sequence_length,
                "labels": ["no_claim", "claim"],
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    (artifact_dir / "metrics.json").write_text(
        json.dumps({"metrics": metrics, "epochs": epoch_log}, indent=2) + "\n",
        encoding="utf-8",
    )
    return TrainingResult(
        artifact_dir=artifact_dir, model_id=model_id, metrics=metrics, epoch_log=epoch_log
    )
