"""Offline fixtures: a from-scratch tiny German BERT and a toy dataset.

Everything runs without network access; the "base model" is a randomly
initialized two-layer BERT over a WordPiece vocabulary built from the toy
corpus, saved like any Hugging Face checkpoint.
"""

from __future__ import annotations

import threading

import pytest
import torch

from model_service.config import TrainingConfig
from model_service.train import finetune

CLAIM_TEMPLATES = [
    "Die Studie zeigt einen klaren Effekt bei {n} Prozent.",
    "Die Daten zeigen ein hohes Risiko für {n} Prozent der Fälle.",
    "Die Inzidenz steigt seit {n} Wochen deutlich an.",
    "Die Impfung senkt das Risiko um {n} Prozent.",
    "Etwa {n} Prozent der Infizierten berichten über Symptome.",
]
GREETING_TEMPLATES = [
    "Guten Morgen und herzlich willkommen zur Runde {n}.",
    "Hallo zusammen und vielen Dank für die Einladung {n}.",
    "Herzlich willkommen zu unserem Gespräch Nummer {n}.",
    "Vielen Dank, die nächste Frage bitte, Nummer {n}.",
    "Schönen guten Tag und willkommen, Teil {n}.",
]


def toy_rows() -> list[tuple[str, str]]:
    claims = [t.format(n=i) for t in CLAIM_TEMPLATES for i in range(10)]
    greetings = [t.format(n=i) for t in GREETING_TEMPLATES for i in range(10)]
    return [(t, "claim") for t in claims] + [(t, "no_claim") for t in greetings]


@pytest.fixture(scope="session")
def toy_dataset():
    return toy_rows()


@pytest.fixture(scope="session")
def tiny_base_model(tmp_path_factory, toy_dataset):
    """Random-init 2-layer BERT + WordPiece vocab covering the toy corpus."""
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import BertNormalizer
    from tokenizers.pre_tokenizers import BertPreTokenizer
    from tokenizers.processors import TemplateProcessing
    from transformers import BertConfig, BertForSequenceClassification, PreTrainedTokenizerFast

    words = set()
    for text, _ in toy_dataset:
        for raw in text.lower().split():
            words.add(raw.strip(".,!?"))
    words |= {".", ",", "!", "?"}
    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab = {token: i for i, token in enumerate(specials + sorted(words))}

    backend = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    backend.normalizer = BertNormalizer(lowercase=True)
    backend.pre_tokenizer = BertPreTokenizer()
    backend.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        num_labels=2,
    )
    model = BertForSequenceClassification(config)

    base_dir = tmp_path_factory.mktemp("tiny-base")
    model.save_pretrained(base_dir)
    tokenizer.save_pretrained(base_dir)
    return base_dir


@pytest.fixture(scope="session")
def toy_config(tiny_base_model):
    # hyperparameters sized for the toy corpus, far from the real-training defaults
    return TrainingConfig(
        base_model_name=str(tiny_base_model),
        learning_rate=3e-3,
        epochs=1,
        max_sequence_length=32,
        batch_size=2,
        seed=42,
    )


@pytest.fixture(scope="session")
def trained_artifact(tmp_path_factory, toy_dataset, toy_config):
    out = tmp_path_factory.mktemp("artifact")
    result = finetune(toy_dataset, toy_config, out)
    return result


@pytest.fixture(scope="session")
def live_server(trained_artifact):
    from model_service.server import make_server

    server = make_server(trained_artifact.artifact_dir, port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address
    yield f"http://{host}:{port}"
    server.shutdown()
    server.server_close()
