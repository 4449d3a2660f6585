"""Command-line entry point.

Subcommands: ingest, stats, segment, train-baseline, score, extract,
evaluate, sweep.  Exit codes: 0 success, 1 domain error, 2 usage error.
Secrets (wikification tokens) come from TAGME_TOKEN / DANDELION_TOKEN
only; every extract/evaluate run writes a manifest sidecar recording the
config hash, model id and input digests.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .claims import BaselineModel, ClassifierEndpoint, baseline_train
from .concepts import WikifyClient
from .corpus import (
    GoldClass,
    PressBriefing,
    canonical_json,
    corpus_stats,
    load_gold,
    parse_briefing,
    split_sentences,
)
from .embeddings import load_vectors, sentence_vector
from .errors import PipelineError
from .evaluation import (
    complete_ratio,
    confusion,
    metric_row,
    report_csv,
    report_json,
    sweep,
    EvaluationReport,
)
from .extraction import (
    PipelineConfig,
    PipelineResources,
    run_pipeline,
    statements_to_jsonl,
)
from .segmentation import SegmentationParams, segment_document


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _briefing_paths(inputs: list[str]) -> list[Path]:
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.json")))
        else:
            paths.append(p)
    if not paths:
        raise PipelineError("no input briefings found")
    return paths


def _load_briefings(inputs: list[str]) -> list[PressBriefing]:
    return [parse_briefing(p.read_bytes()) for p in _briefing_paths(inputs)]


def _write_manifest(
    out_path: Path,
    config_hash: str,
    model_id: str,
    input_paths: list[Path],
) -> None:
    digests = {str(p): _digest(p) for p in input_paths}
    manifest = {
        "config_hash": config_hash,
        "model_id": model_id,
        "input_digests": digests,
        "manifest_id": hashlib.sha256(
            f"{config_hash}:{model_id}:{canonical_json(digests)}".encode()
        ).hexdigest()[:16],
        "tool_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    sidecar = out_path.with_name(out_path.name + ".manifest.json")
    sidecar.write_text(
        json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def _load_config(args) -> PipelineConfig:
    if args.config:
        raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
        config = PipelineConfig.from_dict(raw)
    else:
        config = PipelineConfig()
    overrides = {}
    if getattr(args, "claim_threshold", None) is not None:
        overrides["claim_threshold"] = args.claim_threshold
    if getattr(args, "filter_method", None) is not None:
        method = args.filter_method
        overrides["filter_method"] = None if method == "none" else method
    if getattr(args, "filter_threshold", None) is not None:
        overrides["filter_threshold"] = args.filter_threshold
    if getattr(args, "clustering", False):
        overrides["clustering"] = True
    return dataclasses.replace(config, **overrides) if overrides else config


def _resources(args, config: PipelineConfig) -> PipelineResources:
    resources = PipelineResources()
    if args.vectors:
        resources.store = load_vectors(args.vectors)
    if getattr(args, "model", None):
        payload = json.loads(Path(args.model).read_text(encoding="utf-8"))
        resources.model = BaselineModel.from_payload(payload)
    if getattr(args, "remote", None):
        resources.endpoint = ClassifierEndpoint(url=args.remote)
    needs_wiki = config.filter_method in ("wikify_title", "wikify_intro")
    if getattr(args, "wiki_cache", None) or needs_wiki:
        if not args.wiki_cache:
            raise PipelineError("wikify filtering requires --wiki-cache")
        resources.wikifier = WikifyClient(
            provider=args.wiki_provider,
            cache_dir=Path(args.wiki_cache),
            min_confidence=args.wiki_min_confidence,
            cache_only=bool(getattr(args, "offline", False)),
        )
    return resources


def cmd_ingest(args) -> int:
    for path in _briefing_paths(args.inputs):
        briefing = parse_briefing(path.read_bytes())
        sentences = split_sentences(briefing)
        print(f"{path}: id={briefing.id} turns={len(briefing.turns)} sentences={len(sentences)}")
    return 0


def cmd_stats(args) -> int:
    sentences = []
    for briefing in _load_briefings(args.inputs):
        sentences.extend(split_sentences(briefing))
    stats = corpus_stats(sentences)
    mean = "undefined" if stats.mean_tokens is None else f"{stats.mean_tokens:.2f}"
    print(f"sentences: {stats.sentence_count}")
    print(f"mean_tokens: {mean}")
    return 0


def cmd_segment(args) -> int:
    briefing = parse_briefing(Path(args.infile).read_bytes())
    store = load_vectors(args.vectors)
    sentences = split_sentences(briefing)
    vectors = [sentence_vector(s, store) for s in sentences]
    params = SegmentationParams(
        mode=args.mode,
        target_segments=args.segments,
        min_gain=args.min_gain,
        min_segment_len=args.min_segment_len,
    )
    segmentation = segment_document(vectors, params, doc_id=briefing.id)
    payload = {
        "doc_id": briefing.id,
        "objective": round(segmentation.objective, 10),
        "segments": [
            {"start": s.start, "end": s.end, "score": round(s.score, 10)}
            for s in segmentation.segments
        ],
    }
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def cmd_train_baseline(args) -> int:
    store = load_vectors(args.vectors)
    gold = load_gold(Path(args.gold).read_bytes())
    labels = {(g.doc_id, g.sentence_index): g.gold_class for g in gold}
    data = []
    for briefing in _load_briefings(args.briefings):
        for sentence in split_sentences(briefing):
            gold_class = labels.get((sentence.doc_id, sentence.index))
            if gold_class is None:
                continue
            label = "no_claim" if gold_class is GoldClass.NO_CLAIM else "claim"
            data.append((sentence, label))
    model = baseline_train(
        data,
        store,
        epochs=args.epochs,
        learning_rate=args.learning_rate,
        seed=args.seed,
    )
    Path(args.out).write_text(
        json.dumps(model.to_payload(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    meta = model.training_meta
    print(
        f"trained {model.model_id} on {meta['examples']} examples "
        f"({meta['epochs']} epochs completed)"
    )
    return 0


def cmd_score(args) -> int:
    from .claims import baseline_score_many, remote_score

    briefing = parse_briefing(Path(args.infile).read_bytes())
    sentences = split_sentences(briefing)
    if args.remote:
        scores = remote_score(ClassifierEndpoint(url=args.remote), sentences)
    else:
        if not (args.model and args.vectors):
            raise PipelineError("score needs --model and --vectors, or --remote")
        store = load_vectors(args.vectors)
        payload = json.loads(Path(args.model).read_text(encoding="utf-8"))
        model = BaselineModel.from_payload(payload)
        scores = baseline_score_many(model, sentences, store)
    lines = [
        canonical_json(
            {
                "doc_id": s.doc_id,
                "sentence_index": s.sentence_index,
                "confidence": round(s.confidence, 10),
                "model_id": s.model_id,
            }
        )
        for s in scores
    ]
    text = "".join(line + "\n" for line in lines)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def cmd_extract(args) -> int:
    config = _load_config(args)
    resources = _resources(args, config)
    in_path = Path(args.infile)
    briefing = parse_briefing(in_path.read_bytes())
    outcome = run_pipeline(briefing, config, resources)
    out_path = Path(args.out)
    out_path.write_text(
        statements_to_jsonl(outcome.statements, outcome.manifest["manifest_id"]),
        encoding="utf-8",
    )
    inputs = [in_path]
    for attr in ("vectors", "model", "config"):
        value = getattr(args, attr, None)
        if value:
            inputs.append(Path(value))
    _write_manifest(out_path, config.hash(), outcome.manifest["model_id"], inputs)
    print(f"wrote {len(outcome.statements)} statements to {out_path}")
    return 0


def cmd_evaluate(args) -> int:
    gold = load_gold(Path(args.gold).read_bytes())
    statements_path = Path(args.statements)
    predicted: set[tuple[str, int]] = set()
    labels: set[str] = set()
    model_ids: set[str] = set()
    manifest_ids: set[str] = set()
    spans: list[tuple[str, int, int]] = []
    for line in statements_path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        for claim in record["anchor_claims"]:
            predicted.add((claim["doc_id"], claim["sentence_index"]))
            model_ids.add(claim["model_id"])
        prov = record.get("method_provenance", {})
        if prov.get("claim_threshold") is not None:
            suffix = {
                None: "",
                "embedding": " embedding",
                "wikify_title": " w. title",
                "wikify_intro": " w. intro",
            }.get(prov.get("filter_method"), "")
            labels.add(f"{prov['claim_threshold']:g}{suffix}")
        if "manifest" in record:
            manifest_ids.add(record["manifest"])
        spans.append((record["doc_id"], *record["sentence_span"]))
    counts = confusion(predicted, gold, args.positive_class)
    label = labels.pop() if len(labels) == 1 else "run"
    row = metric_row(label, counts)
    ratio = None
    if args.complete_ratio:
        from .extraction import Statement

        stmts = [
            Statement(
                doc_id=doc,
                sentence_span=(start, end),
                text="",
                anchor_claims=(),
                topical=(),
                method_provenance={},
            )
            for doc, start, end in spans
        ]
        ratio = complete_ratio(stmts, gold)
    report = EvaluationReport(rows=(row,), positive_class=args.positive_class, complete_ratio=ratio)
    print(report_csv(report), end="")
    if args.out_csv:
        Path(args.out_csv).write_text(report_csv(report), encoding="utf-8")
    if args.out_json:
        Path(args.out_json).write_text(report_json(report), encoding="utf-8")
    out_anchor = Path(args.out_csv or args.out_json or args.statements)
    _write_manifest(
        out_anchor,
        config_hash=",".join(sorted(manifest_ids)) or "unknown",
        model_id=",".join(sorted(model_ids)) or "unknown",
        input_paths=[statements_path, Path(args.gold)],
    )
    return 0


def cmd_sweep(args) -> int:
    raw = json.loads(Path(args.configs).read_text(encoding="utf-8"))
    if not isinstance(raw, list):
        raise PipelineError("--configs must hold a JSON array of pipeline configs")
    configs = [PipelineConfig.from_dict(entry) for entry in raw]
    briefings = _load_briefings(args.inputs)
    gold = load_gold(Path(args.gold).read_bytes())
    base_config = configs[0] if configs else PipelineConfig()
    resources = _resources(args, base_config)
    if args.jobs > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(
                pool.map(
                    lambda c: sweep(briefings, gold, [c], resources, args.positive_class),
                    configs,
                )
            )
        rows = tuple(row for report in reports for row in report.rows)
        report = EvaluationReport(rows=rows, positive_class=args.positive_class)
    else:
        report = sweep(briefings, gold, configs, resources, args.positive_class)
    print(report_csv(report), end="")
    if args.out_csv:
        Path(args.out_csv).write_text(report_csv(report), encoding="utf-8")
    if args.out_json:
        Path(args.out_json).write_text(report_json(report), encoding="utf-8")
    return 0


def _add_wiki_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--wiki-cache", help="wikification response cache directory")
    parser.add_argument(
        "--wiki-provider",
        choices=("fixture", "tagme", "dandelion"),
        default="fixture",
    )
    parser.add_argument("--wiki-min-confidence", type=float, default=0.1)
    parser.add_argument(
        "--offline",
        action="store_true",
        help="never call live APIs; fail on wikification cache misses",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pressclaims",
        description="Extract claim-bearing statements from press-briefing transcripts.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate transcript files")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="sentence count and mean token length")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("segment", help="segment one briefing")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--mode", choices=("greedy", "exact"), default="greedy")
    p.add_argument("--segments", type=int, default=None)
    p.add_argument("--min-gain", type=float, default=None)
    p.add_argument("--min-seg-len", dest="min_segment_len", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("train-baseline", help="train the logistic baseline")
    p.add_argument("--briefings", dest="briefings", nargs="+", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--vectors", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train_baseline)

    p = sub.add_parser("score", help="per-sentence claim confidences")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--vectors")
    p.add_argument("--model")
    p.add_argument("--remote", help="base URL of a remote scoring service")
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("extract", help="run the full pipeline on one briefing")
    p.add_argument("--config")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--vectors")
    p.add_argument("--model")
    p.add_argument("--remote")
    p.add_argument("--claim-threshold", type=float, default=None)
    p.add_argument(
        "--filter-method",
        choices=("none", "embedding", "wikify_title", "wikify_intro"),
        default=None,
    )
    p.add_argument("--filter-threshold", type=float, default=None)
    p.add_argument("--clustering", action="store_true")
    _add_wiki_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("evaluate", help="score a statements file against gold labels")
    p.add_argument("--statements", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument(
        "--positive-class", choices=("any_claim", "complete_claim"), default="any_claim"
    )
    p.add_argument("--complete-ratio", action="store_true")
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="evaluate several configs against gold labels")
    p.add_argument("--configs", required=True, help="JSON array of pipeline configs")
    p.add_argument("--in", dest="inputs", nargs="+", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--vectors")
    p.add_argument("--model")
    p.add_argument("--remote")
    p.add_argument(
        "--positive-class", choices=("any_claim", "complete_claim"), default="complete_claim"
    )
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-csv")
    p.add_argument("--out-json")
    _add_wiki_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
