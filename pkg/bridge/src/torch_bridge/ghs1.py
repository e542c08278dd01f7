"""Standalone GHS1 writer.

The bridge talks to the analysis tool only through file contracts, so this
module reimplements the byte layout rather than importing the reader's
package. Layout (integers little-endian): magic "GHS1"; version byte 1;
flags byte 0; two reserved zero bytes; u32 num_layers; u32 n_points; per
layer a u32 ambient_dim followed by n_points * ambient_dim float32 values,
row-major; u32 metadata length; UTF-8 JSON metadata object.
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

MAGIC = b"GHS1"
VERSION = 1

_U32 = struct.Struct("<I")


def write_ghs1(layers: list[np.ndarray], metadata: dict, path) -> None:
    """Write per-layer (n_points, dim) arrays as one GHS1 file.

    Values are cast to float32. The write is atomic: a temp file in the
    same directory is renamed over the target.
    """
    if not layers:
        raise ValueError("need at least one layer")
    n_points = layers[0].shape[0]
    for i, arr in enumerate(layers):
        if arr.ndim != 2:
            raise ValueError(f"layer {i} is not a 2-D array")
        if arr.shape[0] != n_points:
            raise ValueError(
                f"layer {i} has {arr.shape[0]} points, expected {n_points} (all layers must match)"
            )
    parts = [MAGIC, bytes((VERSION, 0, 0, 0)), _U32.pack(len(layers)), _U32.pack(n_points)]
    for arr in layers:
        parts.append(_U32.pack(arr.shape[1]))
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    meta = json.dumps(metadata, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts.append(_U32.pack(len(meta)))
    parts.append(meta)

    path = os.fspath(path)
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(b"".join(parts))
    os.replace(tmp, path)
