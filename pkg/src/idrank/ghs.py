"""GHS1: a bit-exact binary container for per-layer hidden-state clouds.

Layout, all integers little-endian:

    bytes 0-3   magic "GHS1"
    byte  4     version = 1
    byte  5     flags = 0
    bytes 6-7   reserved = 0
    u32         num_layers
    u32         n_points            (shared by every layer)
    per layer:  u32 ambient_dim, then n_points * ambient_dim float32
                values, row-major
    u32         metadata_length
    bytes       UTF-8 JSON metadata object

Values are stored as IEEE-754 float32; the writer casts whatever it is
given, so keep clouds in float32 if byte-level round-trips matter.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud
from .errors import DimensionMismatch, FormatError, NonFiniteInput

MAGIC = b"GHS1"
VERSION = 1

_U32 = struct.Struct("<I")


@dataclass
class HiddenStateSet:
    """Per-layer point clouds for one model/dataset pass.

    Layer 0 is the embedding output, layer i (i >= 1) the output of block i.
    Every layer holds the same number of points; ambient dimensions may
    differ. ``metadata`` is a free-form JSON object (model, dataset,
    pooling, tags).
    """

    layers: list[PointCloud]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a HiddenStateSet needs at least one layer")
        counts = {layer.n_points for layer in self.layers}
        if len(counts) > 1:
            raise DimensionMismatch(
                f"layers disagree on n_points: {[layer.n_points for layer in self.layers]}"
            )

    @property
    def num_layers(self) -> int:
        return len(self.layers)

    @property
    def n_points(self) -> int:
        return self.layers[0].n_points


def write_ghs(states: HiddenStateSet, path) -> None:
    """Serialize a HiddenStateSet to the GHS1 byte layout."""
    parts = [MAGIC, bytes((VERSION, 0, 0, 0))]
    parts.append(_U32.pack(states.num_layers))
    parts.append(_U32.pack(states.n_points))
    for layer in states.layers:
        parts.append(_U32.pack(layer.ambient_dim))
        parts.append(np.ascontiguousarray(layer.data, dtype="<f4").tobytes())
    meta = json.dumps(states.metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts.append(_U32.pack(len(meta)))
    parts.append(meta)
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


class _Reader:
    def __init__(self, buf: bytes, path):
        self.buf = buf
        self.off = 0
        self.path = path

    def take(self, n: int, what: str) -> bytes:
        if self.off + n > len(self.buf):
            raise FormatError(f"{self.path}: truncated while reading {what}")
        chunk = self.buf[self.off : self.off + n]
        self.off += n
        return chunk

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(4, what))[0]


def read_ghs(path) -> HiddenStateSet:
    """Load a GHS1 file, validating magic, version, counts and payload sizes."""
    with open(path, "rb") as fh:
        buf = fh.read()
    rd = _Reader(buf, path)

    magic = rd.take(4, "magic")
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    version = rd.take(1, "version")[0]
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    flags = rd.take(1, "flags")[0]
    if flags != 0:
        raise FormatError(f"{path}: unknown flags 0x{flags:02x}")
    if rd.take(2, "reserved bytes") != b"\x00\x00":
        raise FormatError(f"{path}: reserved bytes must be zero")

    num_layers = rd.u32("num_layers")
    if num_layers == 0:
        raise FormatError(f"{path}: file declares zero layers")
    n_points = rd.u32("n_points")

    layers = []
    for i in range(num_layers):
        dim = rd.u32(f"layer {i} ambient_dim")
        if dim == 0:
            raise FormatError(f"{path}: layer {i} has ambient_dim 0")
        payload = rd.take(4 * n_points * dim, f"layer {i} payload")
        values = np.frombuffer(payload, dtype="<f4").reshape(n_points, dim).copy()
        try:
            layers.append(PointCloud(values))
        except NonFiniteInput as exc:
            raise FormatError(f"{path}: layer {i} holds non-finite values") from exc

    meta_len = rd.u32("metadata_length")
    meta_raw = rd.take(meta_len, "metadata")
    try:
        metadata = json.loads(meta_raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: metadata is not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(metadata, dict):
        raise FormatError(f"{path}: metadata must be a JSON object")
    if rd.off != len(buf):
        raise FormatError(f"{path}: {len(buf) - rd.off} trailing bytes after metadata")

    return HiddenStateSet(layers=layers, metadata=metadata)
