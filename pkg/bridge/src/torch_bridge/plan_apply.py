"""Translate a rank-plan JSON into a per-matrix adapter configuration.

The plan assigns one rank per block; this module expands it to the four
attention projection matrices (K/Q/V/O) of each block, resolves their
module names for the target architecture, and re-derives the parameter
budget matrix by matrix as a cross-check against the plan's total.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BlockCountMismatch, ModelLoadError, SchemaError

PLAN_SCHEMA_VERSION = 1

ADAPTER_ROLES = ("K", "Q", "V", "O")

#: module-name templates for BERT-style encoders; {block} is the block index
BERT_ATTENTION_PATTERNS = {
    "K": "encoder.layer.{block}.attention.self.key",
    "Q": "encoder.layer.{block}.attention.self.query",
    "V": "encoder.layer.{block}.attention.self.value",
    "O": "encoder.layer.{block}.attention.output.dense",
}

_REQUIRED_PLAN_FIELDS = ("ranks", "alpha", "alpha_ratio", "total_trainable_params")


@dataclass
class AdapterTargetSpec:
    """The model the plan is applied to: block count, width, module names."""

    num_blocks: int
    d_model: int
    module_patterns: dict[str, str] = field(
        default_factory=lambda: dict(BERT_ATTENTION_PATTERNS)
    )

    @classmethod
    def from_model_dir(cls, path) -> "AdapterTargetSpec":
        """Read num_blocks/d_model from a checkpoint directory's config.json."""
        config_path = Path(path) / "config.json"
        try:
            config = json.loads(config_path.read_text(encoding="utf-8"))
            return cls(
                num_blocks=int(config["num_hidden_layers"]),
                d_model=int(config["hidden_size"]),
            )
        except (OSError, ValueError, KeyError) as exc:
            raise ModelLoadError(f"could not read model config at {config_path}: {exc}") from exc


@dataclass
class MatrixAssignment:
    block: int
    role: str
    module: str
    rank: int
    alpha: float
    params: int


@dataclass
class AdapterConfig:
    """Rank/alpha assignment for every adapted matrix, plus totals."""

    targets: list[MatrixAssignment]
    alpha_ratio: float
    total_trainable_params: int
    plan_total_trainable_params: int

    def to_dict(self) -> dict:
        return {
            "alpha_ratio": self.alpha_ratio,
            "total_trainable_params": self.total_trainable_params,
            "plan_total_trainable_params": self.plan_total_trainable_params,
            "targets": [vars(t) for t in self.targets],
        }


def load_plan(path) -> dict:
    """Parse and validate a schema_version-1 rank plan."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"could not parse plan {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: plan must be a JSON object")
    version = data.get("schema_version")
    if version != PLAN_SCHEMA_VERSION:
        raise SchemaError(
            f"{path}: unsupported schema_version {version!r}, expected {PLAN_SCHEMA_VERSION}"
        )
    for fieldname in _REQUIRED_PLAN_FIELDS:
        if fieldname not in data:
            raise SchemaError(f"{path}: plan lacks required field {fieldname!r}")
    if len(data["ranks"]) != len(data["alpha"]):
        raise SchemaError(f"{path}: ranks and alpha arrays differ in length")
    return data


def apply_plan(plan_path, target: AdapterTargetSpec) -> AdapterConfig:
    """Expand a per-block plan to per-matrix assignments for the target model."""
    plan = load_plan(plan_path)
    ranks = [int(r) for r in plan["ranks"]]
    alphas = [float(a) for a in plan["alpha"]]
    if len(ranks) != target.num_blocks:
        raise BlockCountMismatch(
            f"plan covers {len(ranks)} blocks but the target model has {target.num_blocks}"
        )
    targets = []
    total = 0
    for block, (rank, alpha) in enumerate(zip(ranks, alphas)):
        for role in ADAPTER_ROLES:
            # square d_model x d_model projections: two factors of rank r
            params = rank * (target.d_model + target.d_model)
            total += params
            targets.append(
                MatrixAssignment(
                    block=block,
                    role=role,
                    module=target.module_patterns[role].format(block=block),
                    rank=rank,
                    alpha=alpha,
                    params=params,
                )
            )
    return AdapterConfig(
        targets=targets,
        alpha_ratio=float(plan["alpha_ratio"]),
        total_trainable_params=total,
        plan_total_trainable_params=int(plan["total_trainable_params"]),
    )


def summary_tsv(config: AdapterConfig) -> str:
    """Human-readable per-block table: block, rank, alpha, params."""
    lines = ["block\trank\talpha\tparams"]
    by_block: dict[int, list[MatrixAssignment]] = {}
    for t in config.targets:
        by_block.setdefault(t.block, []).append(t)
    for block in sorted(by_block):
        rows = by_block[block]
        params = sum(t.params for t in rows)
        lines.append(f"{block}\t{rows[0].rank}\t{rows[0].alpha:g}\t{params}")
    lines.append(f"total\t\t\t{config.total_trainable_params}")
    return "\n".join(lines) + "\n"


def write_config(config: AdapterConfig, path) -> None:
    Path(path).write_text(json.dumps(config.to_dict(), indent=2) + "\n", encoding="utf-8")
