"""Transformer encoder loading and batch pooling.

Inference runs in eval mode under no_grad, so a given corpus encodes to
the same floats on every run. Mean pooling averages final-layer states
over non-padding positions; first-token pooling takes position 0.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelUnavailable

DEFAULT_MODEL = "bert-base-multilingual-cased"


def load_encoder(model_id: str):
    import torch  # deferred: importing torch is slow and CLI --help should not pay it
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_id)
        model = AutoModel.from_pretrained(model_id)
    except Exception as err:
        raise ModelUnavailable(f"cannot load encoder {model_id!r}: {err}") from err
    model.eval()
    torch.set_grad_enabled(False)
    return tokenizer, model


def embed_batch(tokenizer, model, texts: list[str], max_length: int,
                pooling: str) -> np.ndarray:
    import torch

    batch = tokenizer(texts, padding=True, truncation=True,
                      max_length=max_length, return_tensors="pt")
    with torch.no_grad():
        states = model(**batch).last_hidden_state  # (B, T, H)
    if pooling == "first":
        pooled = states[:, 0, :]
    else:
        mask = batch["attention_mask"].unsqueeze(-1).to(states.dtype)
        pooled = (states * mask).sum(dim=1) / mask.sum(dim=1)
    return pooled.to(torch.float32).numpy()
