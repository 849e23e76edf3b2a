"""Shared fixtures: a local throwaway encoder checkpoint and a tiny corpus.

The checkpoint is a randomly initialized single-layer BERT-style encoder
with the standard 768-wide hidden state, saved to disk so the extractor
loads it exactly like a published model, just without any download.
"""

import csv

import pytest

VOCAB = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
         "hola", "mundo", "bueno", "malo", "servicio",
         "hotel", "playa", "muy", "regular", "con", "leche"]


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    import torch
    from transformers import BertConfig, BertModel, BertTokenizerFast

    root = tmp_path_factory.mktemp("encoder")
    vocab_path = root / "vocab.txt"
    vocab_path.write_text("\n".join(VOCAB) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_path),
                                  do_lower_case=False)
    config = BertConfig(vocab_size=len(VOCAB), hidden_size=768,
                        num_hidden_layers=1, num_attention_heads=12,
                        intermediate_size=128, max_position_embeddings=512,
                        pad_token_id=0)
    torch.manual_seed(7)
    model = BertModel(config)
    model.save_pretrained(root)
    tokenizer.save_pretrained(root)
    return str(root)


def write_csv(path, rows, header=("text", "label")):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return str(path)


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    """Five survivors out of eight rows: empty, unlabeled, duplicate drop."""
    rows = [
        ("  Hola   MUNDO  ", "positive"),
        ("Servicio muy bueno", "positive"),
        ("hotel malo\tmalo", "negative"),
        ("", "neutral"),
        ("playa regular", ""),
        ("Hola Mundo", "negative"),
        ("CAFÉ con leche", "neutral"),
        ("mundo bueno", "neutral"),
    ]
    return write_csv(tmp_path_factory.mktemp("corpus") / "fixture.csv", rows)


@pytest.fixture(scope="session")
def mean_table(checkpoint, fixture_corpus, tmp_path_factory):
    """The fixture corpus extracted once with mean pooling."""
    from embed_extract.extract import ExtractorConfig, extract

    out = str(tmp_path_factory.mktemp("emb") / "fixture.emb1")
    count = extract(ExtractorConfig(corpus=fixture_corpus, out=out,
                                    model_id=checkpoint))
    return out, count
