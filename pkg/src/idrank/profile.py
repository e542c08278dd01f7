"""Layer-wise intrinsic-dimension profiles and profile comparison."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, IdrankError, LayerEstimationError, LengthMismatch
from .estimator import (
    DEFAULT_DISCARD_FRACTION,
    IdEstimate,
    StabilityReport,
    decimation_stability,
    estimate_id,
)
from .ghs import HiddenStateSet

#: how one point per example was pooled from per-token hidden states
POOLING_MODES = ("mean", "first-token", "last-token", "token-sample-k")

#: layers larger than this are subsampled (seeded) before estimation
DEFAULT_SAMPLE_CAP = 20000


@dataclass
class LayerProfile:
    """Intrinsic dimension d_0..d_L across a model's hidden states."""

    d: list[float]
    estimates: list[IdEstimate] = field(default_factory=list)
    stability: list[StabilityReport] | None = None
    mean_id: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def num_layers(self) -> int:
        return len(self.d)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "estimates": [e.to_dict() for e in self.estimates],
            "stability": None
            if self.stability is None
            else [s.to_dict() for s in self.stability],
            "mean_id": self.mean_id,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LayerProfile":
        d = [float(v) for v in data["d"]]
        stability = data.get("stability")
        return cls(
            d=d,
            estimates=[IdEstimate.from_dict(e) for e in data.get("estimates", [])],
            stability=None
            if stability is None
            else [StabilityReport.from_dict(s) for s in stability],
            mean_id=float(data["mean_id"]) if "mean_id" in data else float(np.mean(d)),
            metadata=data.get("metadata", {}),
        )


@dataclass
class ProfileDiff:
    """Element-wise change between two profiles of equal length."""

    delta: list[float]
    mean_before: float
    mean_after: float
    layers_compressed: list[int]

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "mean_before": self.mean_before,
            "mean_after": self.mean_after,
            "layers_compressed": self.layers_compressed,
        }


def _layer_seed(seed: int, layer: int) -> int:
    return int(
        np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, layer]).generate_state(
            1, dtype=np.uint64
        )[0]
    )


def compute_profile(
    states: HiddenStateSet,
    *,
    method: str = "mle",
    discard_fraction: float = DEFAULT_DISCARD_FRACTION,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    seed: int = 0,
    with_stability: bool = False,
    n_scales: int = 4,
    repeats_per_scale: int = 5,
    backend: str = "auto",
) -> LayerProfile:
    """Estimate the intrinsic dimension of every layer of a hidden-state set.

    Layers above ``sample_cap`` points are subsampled first (seeded per
    layer). With ``with_stability``, d_i is the decimation report's
    selected_d instead of the plain full-sample estimate, and the per-layer
    reports are attached. Estimator failures re-raise tagged with the layer
    index.
    """
    d: list[float] = []
    estimates: list[IdEstimate] = []
    reports: list[StabilityReport] = []
    for i, layer in enumerate(states.layers):
        cloud = layer
        if sample_cap and layer.n_points > sample_cap:
            rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, i])
            cloud = layer.subset(np.sort(rng.choice(layer.n_points, sample_cap, replace=False)))
        try:
            est = estimate_id(cloud, method, discard_fraction, backend)
            if with_stability:
                report = decimation_stability(
                    cloud,
                    n_scales,
                    repeats_per_scale,
                    seed=_layer_seed(seed, i),
                    method=method,
                    discard_fraction=discard_fraction,
                    backend=backend,
                )
                reports.append(report)
                d.append(report.selected_d)
            else:
                d.append(est.d_hat)
            estimates.append(est)
        except IdrankError as exc:
            raise LayerEstimationError(i, str(exc)) from exc
    return LayerProfile(
        d=d,
        estimates=estimates,
        stability=reports if with_stability else None,
        mean_id=float(np.mean(d)),
        metadata=dict(states.metadata),
    )


def profile_diff(before: LayerProfile, after: LayerProfile) -> ProfileDiff:
    """Per-layer d_after - d_before with summary means."""
    if len(before.d) != len(after.d):
        raise LengthMismatch(
            f"profiles have different lengths: {len(before.d)} vs {len(after.d)}"
        )
    delta = [a - b for b, a in zip(before.d, after.d)]
    return ProfileDiff(
        delta=delta,
        mean_before=float(np.mean(before.d)),
        mean_after=float(np.mean(after.d)),
        layers_compressed=[i for i, v in enumerate(delta) if v < 0],
    )


def profile_digest(profile: LayerProfile) -> str:
    """SHA-256 over the canonical JSON of the d sequence (what a plan depends on)."""
    canon = json.dumps({"d": [float(v) for v in profile.d]}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def write_profile(profile: LayerProfile, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(profile.to_dict(), indent=2) + "\n")


def read_profile(path) -> LayerProfile:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "d" not in data:
        raise FormatError(f"{path}: profile JSON lacks the 'd' array")
    return LayerProfile.from_dict(data)
