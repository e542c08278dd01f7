"""Dump per-layer hidden states of a transformers checkpoint into GHS1.

For an L-block encoder the output file holds L+1 layers: the embedding
output plus each block output, one pooled point per dataset example (or k
points per example under token-sample-k). Everything is float32 on disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError, ModelLoadError, ValidationError
from .ghs1 import write_ghs1

#: mirrors the analysis tool's accepted pooling modes
POOLING_MODES = ("mean", "first-token", "last-token", "token-sample-k")


@dataclass
class ExtractionSpec:
    """What to extract and how.

    ``dataset`` is a UTF-8 text file with one example per line, or a
    directory containing ``{split}.txt``. ``token_sample_k`` and ``seed``
    only matter for token-sample-k pooling, which emits k points per
    example (positions shared across layers).
    """

    model: str
    dataset: str
    output_path: str
    split: str = "validation"
    max_examples: int = 200
    pooling: str = "mean"
    batch_size: int = 16
    max_length: int = 128
    token_sample_k: int = 8
    seed: int = 0
    tags: list[str] = field(default_factory=list)


def _validate(spec: ExtractionSpec) -> None:
    if spec.pooling not in POOLING_MODES:
        raise ValidationError(
            f"unknown pooling mode {spec.pooling!r}; expected one of {POOLING_MODES}"
        )
    if spec.max_examples < 10:
        raise ValidationError("max_examples must be >= 10")
    if spec.batch_size < 1:
        raise ValidationError("batch_size must be >= 1")
    if spec.pooling == "token-sample-k" and spec.token_sample_k < 1:
        raise ValidationError("token_sample_k must be >= 1")


def _read_examples(spec: ExtractionSpec) -> list[str]:
    root = Path(spec.dataset)
    path = root / f"{spec.split}.txt" if root.is_dir() else root
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    try:
        lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()]
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"could not read {path}: {exc}") from exc
    examples = [ln for ln in lines if ln]
    if not examples:
        raise DatasetError(f"{path} contains no examples")
    return examples[: spec.max_examples]


def _load_model(spec: ExtractionSpec):
    import torch
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(spec.model)
        model = AutoModel.from_pretrained(spec.model)
    except Exception as exc:
        raise ModelLoadError(f"could not load {spec.model!r}: {exc}") from exc
    model.eval()
    model.to(torch.float32)
    return tokenizer, model


def _sample_positions(lengths: list[int], k: int, seed: int, first_index: int) -> list[np.ndarray]:
    out = []
    for offset, length in enumerate(lengths):
        rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, first_index + offset])
        out.append(rng.choice(length, size=k, replace=length < k))
    return out


def _pool_batch(hidden, mask, spec: ExtractionSpec, first_index: int) -> list[np.ndarray]:
    """Pool one batch's per-layer hidden states to per-example points."""
    import torch

    mask_f = mask.unsqueeze(-1).to(hidden[0].dtype)
    lengths = mask.sum(dim=1)
    pooled = []
    if spec.pooling == "token-sample-k":
        positions = _sample_positions(
            [int(v) for v in lengths], spec.token_sample_k, spec.seed, first_index
        )
    for h in hidden:
        if spec.pooling == "mean":
            p = (h * mask_f).sum(dim=1) / mask_f.sum(dim=1)
        elif spec.pooling == "first-token":
            p = h[:, 0, :]
        elif spec.pooling == "last-token":
            idx = (lengths - 1).clamp(min=0)
            p = h[torch.arange(h.shape[0]), idx, :]
        else:  # token-sample-k: k rows per example
            rows = [h[i, pos, :] for i, pos in enumerate(positions)]
            p = torch.cat(rows, dim=0)
        pooled.append(p.to(torch.float32).cpu().numpy())
    return pooled


def extract_hidden_states(spec: ExtractionSpec) -> Path:
    """Run the model over the dataset and write a GHS1 file.

    Returns the output path. The file holds L+1 layers with
    n_points = examples processed (times k for token-sample-k); metadata
    records model, dataset, pooling and tags. Inference runs in eval mode
    under no_grad, so repeated runs of one spec produce identical bytes.
    """
    import torch

    _validate(spec)
    examples = _read_examples(spec)
    tokenizer, model = _load_model(spec)

    per_layer: list[list[np.ndarray]] = []
    done = 0
    with torch.no_grad():
        for start in range(0, len(examples), spec.batch_size):
            batch = examples[start : start + spec.batch_size]
            enc = tokenizer(
                batch,
                padding=True,
                truncation=True,
                max_length=spec.max_length,
                return_tensors="pt",
            )
            out = model(**enc, output_hidden_states=True)
            pooled = _pool_batch(out.hidden_states, enc["attention_mask"], spec, done)
            if not per_layer:
                per_layer = [[] for _ in pooled]
            for i, arr in enumerate(pooled):
                per_layer[i].append(arr)
            done += len(batch)

    layers = [np.concatenate(chunks, axis=0) for chunks in per_layer]
    metadata = {
        "model": spec.model,
        "dataset": spec.dataset,
        "pooling": spec.pooling,
        "tags": list(spec.tags),
    }
    write_ghs1(layers, metadata, spec.output_path)
    return Path(spec.output_path)
