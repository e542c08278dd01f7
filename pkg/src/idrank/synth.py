"""Synthetic point clouds of known intrinsic dimension.

These serve as ground-truth fixtures for the estimator: a 1-D helix curve
in R^3, flat d-dimensional patches embedded in higher ambient spaces by a
seeded orthogonal map, and a fixed 5-point toy set.

All randomness flows through numpy's PCG64 seeded via SeedSequence;
``SeedSequence(seed).spawn(3)`` yields independent substreams for base
coordinates, embedding frame, and noise, in that order, so generation is
reproducible for a fixed spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .errors import InvalidSpec

KINDS = ("helix", "hyperplane", "hypercube", "toy5")

_TOY5 = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0], [0.0, 1.0], [2.0, 2.0]])


@dataclass(frozen=True)
class ManifoldSpec:
    """Recipe for one synthetic cloud.

    ``radius``, ``vertical_scale`` and ``t_range`` only apply to the helix
    x(t) = (radius cos t, radius sin t, vertical_scale * t); the defaults
    keep its curvature well below the two-neighbor scale at n ~ 2000.
    """

    kind: str
    n_points: int = 0
    intrinsic_dim: int = 1
    ambient_dim: int = 3
    noise_sigma: float = 0.0
    seed: int = 0
    radius: float = 1.0
    vertical_scale: float = 0.2
    t_range: tuple[float, float] = (0.0, 12 * math.pi)


def toy5() -> ManifoldSpec:
    return ManifoldSpec(kind="toy5", n_points=5, intrinsic_dim=1, ambient_dim=2)


def helix(n_points: int = 2000, noise_sigma: float = 0.0, seed: int = 0, **kw) -> ManifoldSpec:
    return ManifoldSpec(
        kind="helix",
        n_points=n_points,
        intrinsic_dim=1,
        ambient_dim=3,
        noise_sigma=noise_sigma,
        seed=seed,
        **kw,
    )


def hyperplane(
    intrinsic_dim: int,
    ambient_dim: int,
    n_points: int,
    seed: int = 0,
    noise_sigma: float = 0.0,
) -> ManifoldSpec:
    return ManifoldSpec(
        kind="hyperplane",
        n_points=n_points,
        intrinsic_dim=intrinsic_dim,
        ambient_dim=ambient_dim,
        noise_sigma=noise_sigma,
        seed=seed,
    )


def hypercube(
    intrinsic_dim: int,
    ambient_dim: int,
    n_points: int,
    seed: int = 0,
    noise_sigma: float = 0.0,
) -> ManifoldSpec:
    return ManifoldSpec(
        kind="hypercube",
        n_points=n_points,
        intrinsic_dim=intrinsic_dim,
        ambient_dim=ambient_dim,
        noise_sigma=noise_sigma,
        seed=seed,
    )


def _validate(spec: ManifoldSpec) -> None:
    if spec.kind not in KINDS:
        raise InvalidSpec(f"unknown kind {spec.kind!r}; expected one of {KINDS}")
    if spec.kind == "toy5":
        return
    if spec.n_points < 1:
        raise InvalidSpec("n_points must be >= 1")
    if spec.noise_sigma < 0:
        raise InvalidSpec("noise_sigma must be >= 0")
    if spec.intrinsic_dim < 1 or spec.intrinsic_dim > spec.ambient_dim:
        raise InvalidSpec(
            f"intrinsic_dim must lie in [1, ambient_dim]; got {spec.intrinsic_dim} in R^{spec.ambient_dim}"
        )
    if spec.kind == "helix":
        if spec.ambient_dim != 3:
            raise InvalidSpec("helix requires ambient_dim = 3")
        if spec.intrinsic_dim != 1:
            raise InvalidSpec("helix is a curve: intrinsic_dim must be 1")
        if spec.radius <= 0 or spec.vertical_scale <= 0:
            raise InvalidSpec("helix radius and vertical_scale must be > 0")
        if not spec.t_range[0] < spec.t_range[1]:
            raise InvalidSpec("helix t_range must be a nonempty interval")


def _orthogonal_frame(rng: np.random.Generator, ambient: int, intrinsic: int) -> np.ndarray:
    gauss = rng.normal(size=(ambient, ambient))
    q, r = np.linalg.qr(gauss)
    q = q * np.sign(np.diag(r))  # fix the QR sign ambiguity
    return q[:, :intrinsic]


def generate(spec: ManifoldSpec) -> PointCloud:
    """Deterministically realize a spec as a PointCloud.

    toy5 ignores n_points/seed and always yields the same five 2-D points.
    Flat patches draw uniform coordinates on [0,1)^d and embed them through
    a seeded random orthogonal map plus a seeded Gaussian offset, which
    preserves distances and hence the ground-truth dimension exactly.
    """
    _validate(spec)
    if spec.kind == "toy5":
        return PointCloud(_TOY5.copy())

    coords_ss, frame_ss, noise_ss = np.random.SeedSequence(
        spec.seed & 0xFFFFFFFFFFFFFFFF
    ).spawn(3)
    coords_rng = np.random.default_rng(coords_ss)

    if spec.kind == "helix":
        t = coords_rng.uniform(spec.t_range[0], spec.t_range[1], spec.n_points)
        data = np.column_stack(
            (
                spec.radius * np.cos(t),
                spec.radius * np.sin(t),
                spec.vertical_scale * t,
            )
        )
    else:  # hyperplane / hypercube: a flat uniform patch, rigidly embedded
        base = coords_rng.uniform(0.0, 1.0, size=(spec.n_points, spec.intrinsic_dim))
        frame_rng = np.random.default_rng(frame_ss)
        frame = _orthogonal_frame(frame_rng, spec.ambient_dim, spec.intrinsic_dim)
        offset = frame_rng.normal(size=spec.ambient_dim)
        data = base @ frame.T + offset

    if spec.noise_sigma > 0:
        noise_rng = np.random.default_rng(noise_ss)
        data = data + noise_rng.normal(0.0, spec.noise_sigma, size=data.shape)
    return PointCloud(data)
