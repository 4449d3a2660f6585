"""Command line: train a classifier, serve an artifact."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import TrainingConfig
from .data import load_labeled
from .server import serve
from .train import finetune


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="model-service")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fine-tune a claim classifier")
    p.add_argument("--data", required=True, help="JSONL with {'text', 'label'} rows")
    p.add_argument("--base-model", required=True, help="HF model name or local path")
    p.add_argument("--out", required=True, help="artifact output directory")
    p.add_argument("--learning-rate", type=float, default=1e-5)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--max-sequence-length", type=int, default=128)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("serve", help="serve a trained artifact")
    p.add_argument("--artifact", required=True)
    p.add_argument("--port", type=int, default=8300)
    p.set_defaults(func=cmd_serve)
    return parser


def cmd_train(args) -> int:
    config = TrainingConfig(
        base_model_name=args.base_model,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        max_sequence_length=args.max_sequence_length,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    result = finetune(load_labeled(args.data), config, args.out)
    metrics = result.metrics
    print(
        f"saved {result.model_id} to {result.artifact_dir} "
        f"(P={metrics['precision']:.3f} R={metrics['recall']:.3f} F1={metrics['f1']:.3f})"
    )
    for entry in result.epoch_log:
        print(
            f"  epoch {entry['epoch']}: train_loss={entry['train_loss']:.4f} "
            f"eval_loss={entry['eval_loss']:.4f}"
        )
    return 0


def cmd_serve(args) -> int:
    serve(args.artifact, args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
