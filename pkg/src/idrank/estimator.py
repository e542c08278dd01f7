"""Two-nearest-neighbor intrinsic-dimension estimation.

For each point the ratio mu = r2/r1 of its second- to first-nearest-neighbor
distance is, under locally uniform density, Pareto distributed with shape
equal to the intrinsic dimension d (CDF 1 - mu^-d). The shape is recovered
either by the closed-form maximum-likelihood estimate or by a least-squares
line through the origin in (ln mu, -ln(1 - F_emp)) space. Subset decimation
re-runs the estimate on nested random subsamples to check stability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import as_cloud
from .errors import DegenerateInput, InvalidRatio, NonFiniteInput, TooFewPoints

# auto backend switches from brute force to the tree above this size
_BRUTE_MAX = 512
# candidate neighbors fetched from the tree and re-ranked canonically
_TREE_CANDIDATES = 8
_QUERY_CHUNK = 8192

#: smallest subset a decimation scale may draw
MIN_SUBSET_SIZE = 10

METHODS = ("mle", "regression")

#: regression drops the top 10% of ratios unless told otherwise
DEFAULT_DISCARD_FRACTION = 0.1


@dataclass
class NeighborStats:
    """Per-point nearest-neighbor distances after duplicate collapsing.

    ``kept_indices`` are indices into the original cloud of the retained
    representatives (first occurrence of each distinct point); r1/r2/mu are
    aligned with it. 0 < r1 <= r2, so mu >= 1 throughout.
    """

    r1: np.ndarray
    r2: np.ndarray
    mu: np.ndarray
    kept_indices: np.ndarray


@dataclass
class IdEstimate:
    """One intrinsic-dimension estimate with fit diagnostics."""

    d_hat: float
    method: str
    n_used: int
    discard_fraction: float | None = None
    residual: float | None = None

    def to_dict(self) -> dict:
        out = {"d_hat": self.d_hat, "method": self.method, "n_used": self.n_used}
        if self.discard_fraction is not None:
            out["discard_fraction"] = self.discard_fraction
        if self.residual is not None:
            out["residual"] = self.residual
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "IdEstimate":
        return cls(
            d_hat=float(data["d_hat"]),
            method=str(data["method"]),
            n_used=int(data["n_used"]),
            discard_fraction=data.get("discard_fraction"),
            residual=data.get("residual"),
        )


@dataclass
class ScaleStats:
    """Estimates gathered at one decimation scale."""

    size: int
    mean: float
    std: float
    estimates: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"size": self.size, "mean": self.mean, "std": self.std, "estimates": self.estimates}

    @classmethod
    def from_dict(cls, data: dict) -> "ScaleStats":
        return cls(
            size=int(data["size"]),
            mean=float(data["mean"]),
            std=float(data["std"]),
            estimates=[float(v) for v in data.get("estimates", [])],
        )


@dataclass
class StabilityReport:
    """Decimation summary: estimates per subset size plus the plateau pick."""

    subset_sizes: list[int]
    estimates_per_size: list[ScaleStats]
    selected_d: float
    plateau_found: bool
    seed: int

    def to_dict(self) -> dict:
        return {
            "subset_sizes": self.subset_sizes,
            "estimates_per_size": [s.to_dict() for s in self.estimates_per_size],
            "selected_d": self.selected_d,
            "plateau_found": self.plateau_found,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "StabilityReport":
        return cls(
            subset_sizes=[int(v) for v in data["subset_sizes"]],
            estimates_per_size=[ScaleStats.from_dict(s) for s in data["estimates_per_size"]],
            selected_d=float(data["selected_d"]),
            plateau_found=bool(data["plateau_found"]),
            seed=int(data["seed"]),
        )


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Single canonical routine for every squared distance in this module:
    # both search backends must produce bit-identical values.
    diff = a - b
    return np.einsum("...k,...k->...", diff, diff)


def _collapse_duplicates(data: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # +0.0 maps -0.0 onto +0.0 so the byte-level row comparison inside
    # np.unique(axis=0) coincides with value equality (NaN already rejected).
    work = np.ascontiguousarray(data, dtype=np.float64) + 0.0
    _, first = np.unique(work, axis=0, return_index=True)
    kept = np.sort(first)
    return work[kept], kept


def _two_smallest_brute(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n, dim = pts.shape
    r1 = np.empty(n)
    r2 = np.empty(n)
    # bound the (chunk, n, dim) scratch array to ~32 MB
    chunk = max(1, int(4e6) // max(1, n * dim))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        sq = _sq_dists(pts[start:stop, None, :], pts[None, :, :])
        rows = np.arange(stop - start)
        sq[rows, np.arange(start, stop)] = np.inf
        two = np.partition(sq, 1, axis=1)[:, :2]
        two.sort(axis=1)
        r1[start:stop] = np.sqrt(two[:, 0])
        r2[start:stop] = np.sqrt(two[:, 1])
    return r1, r2


def _two_smallest_kdtree(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    from scipy.spatial import cKDTree

    n = pts.shape[0]
    k = min(n, _TREE_CANDIDATES + 1)  # +1: the query point finds itself
    tree = cKDTree(pts)
    r1 = np.empty(n)
    r2 = np.empty(n)
    for start in range(0, n, _QUERY_CHUNK):
        stop = min(start + _QUERY_CHUNK, n)
        _, idx = tree.query(pts[start:stop], k=k)
        # re-rank candidates with the canonical distance so the tree backend
        # agrees with brute force to the last bit
        sq = _sq_dists(pts[start:stop, None, :], pts[idx])
        sq[idx == np.arange(start, stop)[:, None]] = np.inf
        two = np.partition(sq, 1, axis=1)[:, :2]
        two.sort(axis=1)
        r1[start:stop] = np.sqrt(two[:, 0])
        r2[start:stop] = np.sqrt(two[:, 1])
    return r1, r2


def two_nearest(cloud, backend: str = "auto") -> NeighborStats:
    """Exact first/second nearest-neighbor distances and their ratios.

    Exact duplicate points are collapsed to a single representative before
    the search (r1 = 0 would make mu undefined); at least 3 distinct points
    must remain. ``backend`` is one of "auto", "brute", "kdtree" — the two
    search paths return identical distances, "brute" being the O(n^2)
    oracle.
    """
    cloud = as_cloud(cloud)
    pts, kept = _collapse_duplicates(cloud.data)
    n = pts.shape[0]
    if n < 3:
        raise TooFewPoints(f"need at least 3 distinct points, got {n}")
    if backend == "auto":
        backend = "brute" if n <= _BRUTE_MAX else "kdtree"
    if backend == "brute":
        r1, r2 = _two_smallest_brute(pts)
    elif backend == "kdtree":
        r1, r2 = _two_smallest_kdtree(pts)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return NeighborStats(r1=r1, r2=r2, mu=r2 / r1, kept_indices=kept)


def _checked_ratios(mu_values) -> np.ndarray:
    mu = np.atleast_1d(np.asarray(mu_values, dtype=np.float64))
    if mu.ndim != 1:
        raise ValueError("mu_values must be one-dimensional")
    if not np.isfinite(mu).all():
        raise NonFiniteInput("ratios must be finite")
    if mu.size < 3:
        raise TooFewPoints(f"need at least 3 ratios, got {mu.size}")
    if (mu < 1.0).any():
        raise InvalidRatio("all ratios must be >= 1 (r2 >= r1 by construction)")
    return mu


def fit_mle(mu_values) -> IdEstimate:
    """Closed-form Pareto(shape d, scale 1) maximum-likelihood fit: n / sum(ln mu)."""
    mu = _checked_ratios(mu_values)
    total = float(np.sum(np.log(mu)))
    if total <= 0.0:
        raise DegenerateInput("all ratios equal 1; the likelihood has no finite maximizer")
    return IdEstimate(d_hat=mu.size / total, method="mle", n_used=int(mu.size))


def regression_points(mu_values, discard_fraction: float = DEFAULT_DISCARD_FRACTION):
    """The (ln mu, -ln(1 - F_emp)) pairs entering the regression fit.

    Ratios are sorted ascending and F_emp(mu_(i)) = i/N. The top
    ceil(discard_fraction * N) ratios are dropped, never fewer than one:
    the largest ratio sits at F = N/N where -ln(1 - F) diverges.
    """
    mu = _checked_ratios(mu_values)
    if not 0.0 <= discard_fraction < 1.0:
        raise ValueError("discard_fraction must lie in [0, 1)")
    n = mu.size
    n_discard = max(1, math.ceil(discard_fraction * n))
    n_keep = n - n_discard
    if n_keep < 3:
        raise TooFewPoints(
            f"only {n_keep} ratios left after discarding the top {n_discard}; need >= 3"
        )
    x = np.log(np.sort(mu)[:n_keep])
    f = np.arange(1, n_keep + 1, dtype=np.float64) / n
    y = -np.log1p(-f)
    return x, y


def fit_regression(mu_values, discard_fraction: float = DEFAULT_DISCARD_FRACTION) -> IdEstimate:
    """Least-squares slope through the origin of -ln(1 - F_emp) vs ln mu."""
    x, y = regression_points(mu_values, discard_fraction)
    sxx = float(np.dot(x, x))
    if sxx == 0.0:
        raise DegenerateInput("all retained ratios equal 1; the slope is undefined")
    d_hat = float(np.dot(x, y)) / sxx
    resid = y - d_hat * x
    return IdEstimate(
        d_hat=d_hat,
        method="regression",
        n_used=int(x.size),
        discard_fraction=discard_fraction,
        residual=float(np.sqrt(np.mean(resid * resid))),
    )


def estimate_id(
    cloud,
    method: str = "mle",
    discard_fraction: float = DEFAULT_DISCARD_FRACTION,
    backend: str = "auto",
) -> IdEstimate:
    """Estimate the intrinsic dimension of a cloud: neighbor ratios + chosen fit."""
    stats = two_nearest(cloud, backend=backend)
    if method == "mle":
        return fit_mle(stats.mu)
    if method == "regression":
        return fit_regression(stats.mu, discard_fraction)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _subset_rng(seed: int, scale: int, repeat: int) -> np.random.Generator:
    # every subset draw is individually recomputable from (seed, scale, repeat)
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, scale, repeat])


def _find_plateau(scales: list[ScaleStats], rel_tol: float = 0.05) -> int | None:
    """Start index of the longest qualifying suffix of scales, or None.

    A suffix qualifies when every scale's std is below rel_tol of its mean
    and consecutive means differ by less than rel_tol relative to the larger
    of the pair. Suffixes shorter than 2 scales never qualify.
    """
    means = [s.mean for s in scales]
    tight = [s.std < rel_tol * abs(s.mean) for s in scales]
    for start in range(len(scales) - 1):
        if not all(tight[start:]):
            continue
        steps_ok = all(
            abs(means[i + 1] - means[i]) < rel_tol * max(abs(means[i]), abs(means[i + 1]))
            for i in range(start, len(means) - 1)
        )
        if steps_ok:
            return start
    return None


def decimation_stability(
    cloud,
    n_scales: int = 4,
    repeats_per_scale: int = 5,
    seed: int = 0,
    *,
    method: str = "mle",
    discard_fraction: float = DEFAULT_DISCARD_FRACTION,
    backend: str = "auto",
) -> StabilityReport:
    """Re-estimate on nested random subsets of sizes N, N/2, ..., N/2^(k-1).

    Draws ``repeats_per_scale`` subsets per scale (without replacement,
    seeded from (seed, scale, repeat), indices sorted so estimates do not
    depend on draw order), records mean/std of d_hat per scale, and detects
    a plateau. Without a plateau, selected_d falls back to the full-sample
    estimate. Fully reproducible for a fixed seed.
    """
    cloud = as_cloud(cloud)
    if n_scales < 1:
        raise ValueError("n_scales must be >= 1")
    if repeats_per_scale < 1:
        raise ValueError("repeats_per_scale must be >= 1")
    n = cloud.n_points
    sizes = [n // (2**k) for k in range(n_scales)]
    for k, size in enumerate(sizes):
        if size < MIN_SUBSET_SIZE:
            raise TooFewPoints(
                f"scale {k} would draw subsets of size {size}, below the minimum of {MIN_SUBSET_SIZE}"
            )
    per_scale: list[ScaleStats] = []
    for k, size in enumerate(sizes):
        estimates = []
        for j in range(repeats_per_scale):
            idx = np.sort(_subset_rng(seed, k, j).choice(n, size=size, replace=False))
            est = estimate_id(cloud.subset(idx), method, discard_fraction, backend)
            estimates.append(est.d_hat)
        arr = np.asarray(estimates)
        per_scale.append(
            ScaleStats(size=size, mean=float(arr.mean()), std=float(arr.std()), estimates=estimates)
        )
    start = _find_plateau(per_scale)
    # scale 0 draws the full sample, so its mean IS the full-sample estimate
    selected = per_scale[start].mean if start is not None else per_scale[0].mean
    return StabilityReport(
        subset_sizes=sizes,
        estimates_per_size=per_scale,
        selected_d=selected,
        plateau_found=start is not None,
        seed=seed,
    )
