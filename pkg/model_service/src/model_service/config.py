"""Training configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class TrainingConfig:
    base_model_name: str
    learning_rate: float = 1e-5
    epochs: int = 3
    max_sequence_length: int = 128
    seed: int = 42
    train_fraction: float = 0.8
    eval_fraction: float = 0.2
    batch_size: int = 16

    def __post_init__(self):
        if not self.base_model_name:
            raise ValueError("base_model_name must be set")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.max_sequence_length < 8:
            raise ValueError("max_sequence_length must be >= 8")
        if min(self.train_fraction, self.eval_fraction) <= 0:
            raise ValueError("split fractions must be > 0")
        if self.train_fraction + self.eval_fraction > 1.0 + 1e-9:
            raise ValueError("split fractions must sum to at most 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
