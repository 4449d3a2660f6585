"""Transformer claim classifier: fine-tuning and a scoring service."""

__version__ = "0.1.0"
