"""Point clouds and CSV I/O."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError, NonFiniteInput


@dataclass
class PointCloud:
    """n points in a D-dimensional ambient space.

    ``data`` is an (n_points, ambient_dim) float array, one point per row.
    Coordinates must be finite and the ambient dimension at least 1; the
    dtype is preserved (hidden-state dumps stay float32, synthetic clouds
    float64).
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.dtype.kind != "f":
            arr = arr.astype(np.float64)
        if arr.ndim != 2:
            raise ValueError(f"expected a 2-D array of points, got shape {arr.shape}")
        if arr.shape[1] < 1:
            raise ValueError("ambient_dim must be >= 1")
        if not np.isfinite(arr).all():
            raise NonFiniteInput("point coordinates must be finite (no NaN/Inf)")
        self.data = arr

    @property
    def n_points(self) -> int:
        return self.data.shape[0]

    @property
    def ambient_dim(self) -> int:
        return self.data.shape[1]

    def subset(self, indices) -> "PointCloud":
        return PointCloud(self.data[np.asarray(indices)])


def as_cloud(obj) -> PointCloud:
    """Coerce an array-like or PointCloud into a validated PointCloud."""
    if isinstance(obj, PointCloud):
        return obj
    return PointCloud(np.asarray(obj))


def _is_numeric_row(line: str) -> bool:
    tokens = [t.strip() for t in line.strip().split(",")]
    if not tokens or tokens == [""]:
        return False
    try:
        for tok in tokens:
            float(tok)
    except ValueError:
        return False
    return True


def read_csv(path) -> PointCloud:
    """Load a cloud from CSV: one point per row, optional single header line."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline()
    if not first:
        raise FormatError(f"{path}: empty CSV file")
    skiprows = 0 if _is_numeric_row(first) else 1
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=skiprows, ndmin=2, dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: could not parse CSV point data: {exc}") from exc
    if data.size == 0:
        raise FormatError(f"{path}: CSV contains no data rows")
    return PointCloud(data)


def write_csv(cloud: PointCloud, path) -> None:
    # %.17g round-trips float64 exactly
    np.savetxt(path, cloud.data, delimiter=",", fmt="%.17g")
