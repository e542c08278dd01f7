"""Per-block adapter-rank planning from an intrinsic-dimension profile.

Block i gets rank r_i = round(max(d_{i+1} - d_i, 0)) + offset, shared by
its K/Q/V/O projection matrices: the positive part of the consecutive-layer
dimension change is the capacity the block's update must at least carry,
and the offset guards against the estimator's conservative bias driving a
rank to zero. Scaling factors keep alpha_i / r_i constant across blocks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import FormatError, LengthMismatch, ShapeMismatch, ZeroRank

ADAPTER_ROLES = ("K", "Q", "V", "O")
ROUNDING_MODES = ("ceil", "nearest")
PLAN_SCHEMA_VERSION = 1

DEFAULT_OFFSET = 1
DEFAULT_ALPHA_RATIO = 32.0


@dataclass
class ModelShape:
    """Adapted-matrix dimensions of an L-block model.

    ``matrix_dims`` maps each role in K/Q/V/O to (in_dim, out_dim); by
    default all four are square d_model x d_model.
    """

    num_blocks: int
    d_model: int
    matrix_dims: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be >= 1")
        if self.d_model < 1:
            raise ValueError("d_model must be >= 1")
        if not self.matrix_dims:
            self.matrix_dims = {role: (self.d_model, self.d_model) for role in ADAPTER_ROLES}
        for role, (din, dout) in self.matrix_dims.items():
            if role not in ADAPTER_ROLES:
                raise ValueError(f"unknown matrix role {role!r}")
            if din < 1 or dout < 1:
                raise ValueError(f"matrix {role} has non-positive dimensions")


@dataclass
class RankPlan:
    """Per-block ranks and scaling factors plus the parameter budget."""

    ranks: list[int]
    alpha: list[float]
    alpha_ratio: float
    offset: int
    rounding_mode: str
    total_trainable_params: int
    mean_rank: float
    rounded_mean_rank: int
    source_profile_digest: str | None = None

    def to_dict(self) -> dict:
        return {
            "schema_version": PLAN_SCHEMA_VERSION,
            "ranks": self.ranks,
            "alpha": self.alpha,
            "alpha_ratio": self.alpha_ratio,
            "offset": self.offset,
            "rounding_mode": self.rounding_mode,
            "total_trainable_params": self.total_trainable_params,
            "mean_rank": self.mean_rank,
            "rounded_mean_rank": self.rounded_mean_rank,
            "source_profile_digest": self.source_profile_digest,
        }


def _round_nearest(value: float) -> int:
    return int(round(value))  # Python round: half to even


_ROUNDERS = {"ceil": math.ceil, "nearest": _round_nearest}


def compute_ranks(profile, offset: int = DEFAULT_OFFSET, rounding: str = "ceil") -> list[int]:
    """Ranks for the L blocks of a model from an (L+1)-entry profile.

    ``profile`` may be a LayerProfile or a bare sequence of d values.
    Raises ZeroRank when a block would end up with rank 0, which can only
    happen at offset 0.
    """
    d = [float(v) for v in (profile.d if hasattr(profile, "d") else profile)]
    if len(d) < 2:
        raise LengthMismatch(
            f"profile needs at least 2 entries (L+1 for L blocks), got {len(d)}"
        )
    if offset < 0:
        raise ValueError("offset must be >= 0")
    if rounding not in _ROUNDERS:
        raise ValueError(f"unknown rounding mode {rounding!r}; expected one of {ROUNDING_MODES}")
    rounder = _ROUNDERS[rounding]
    ranks = []
    for i in range(len(d) - 1):
        r = rounder(max(d[i + 1] - d[i], 0.0)) + offset
        if r < 1:
            raise ZeroRank(f"block {i} got rank 0; use offset >= 1")
        ranks.append(int(r))
    return ranks


def make_plan(
    ranks,
    alpha_ratio: float,
    shape: ModelShape,
    *,
    offset: int = DEFAULT_OFFSET,
    rounding_mode: str = "ceil",
    source_profile_digest: str | None = None,
) -> RankPlan:
    """Attach scaling factors and the parameter budget to a rank vector.

    Each adapted matrix of shape (in, out) at rank r contributes
    r * (in + out) trainable parameters (its two low-rank factors); heads
    and biases are not counted.
    """
    ranks = [int(r) for r in ranks]
    if len(ranks) != shape.num_blocks:
        raise ShapeMismatch(f"{len(ranks)} ranks for a model with {shape.num_blocks} blocks")
    if alpha_ratio <= 0:
        raise ValueError("alpha_ratio must be > 0")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive integers")
    if any(r < offset for r in ranks):
        raise ValueError("every rank must be >= offset")
    per_rank_params = sum(din + dout for din, dout in shape.matrix_dims.values())
    total = sum(r * per_rank_params for r in ranks)
    mean_rank = sum(ranks) / len(ranks)
    return RankPlan(
        ranks=ranks,
        alpha=[alpha_ratio * r for r in ranks],
        alpha_ratio=float(alpha_ratio),
        offset=int(offset),
        rounding_mode=rounding_mode,
        total_trainable_params=int(total),
        mean_rank=mean_rank,
        rounded_mean_rank=_round_nearest(mean_rank),
        source_profile_digest=source_profile_digest,
    )


def plan_from_profile(
    profile,
    shape: ModelShape,
    *,
    offset: int = DEFAULT_OFFSET,
    alpha_ratio: float = DEFAULT_ALPHA_RATIO,
    rounding: str = "ceil",
    source_profile_digest: str | None = None,
) -> RankPlan:
    ranks = compute_ranks(profile, offset=offset, rounding=rounding)
    return make_plan(
        ranks,
        alpha_ratio,
        shape,
        offset=offset,
        rounding_mode=rounding,
        source_profile_digest=source_profile_digest,
    )


def plan_to_json(plan: RankPlan) -> str:
    return json.dumps(plan.to_dict(), indent=2) + "\n"


def emit_plan(plan: RankPlan, path) -> None:
    """Write the plan as schema_version-1 JSON with stable field order."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(plan_to_json(plan))


def load_plan(path) -> RankPlan:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FormatError(f"{path}: plan JSON must be an object")
    version = data.get("schema_version")
    if version != PLAN_SCHEMA_VERSION:
        raise FormatError(
            f"{path}: unsupported plan schema_version {version!r}, expected {PLAN_SCHEMA_VERSION}"
        )
    try:
        return RankPlan(
            ranks=[int(r) for r in data["ranks"]],
            alpha=[float(a) for a in data["alpha"]],
            alpha_ratio=float(data["alpha_ratio"]),
            offset=int(data["offset"]),
            rounding_mode=str(data["rounding_mode"]),
            total_trainable_params=int(data["total_trainable_params"]),
            mean_rank=float(data["mean_rank"]),
            rounded_mean_rank=int(data["rounded_mean_rank"]),
            source_profile_digest=data.get("source_profile_digest"),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: plan JSON missing field {exc}") from exc
