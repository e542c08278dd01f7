"""Glue between transformers checkpoints and the rank-planning tool.

Two jobs: run a model over a dataset and dump every layer's pooled hidden
states into a GHS1 file, and expand an emitted rank plan into per-matrix
adapter settings for the K/Q/V/O projections of each block. Communication
with the analysis tool happens purely through the GHS1 and plan-JSON file
contracts.
"""

from .errors import (
    BlockCountMismatch,
    BridgeError,
    DatasetError,
    ModelLoadError,
    SchemaError,
    ValidationError,
)
from .extract import POOLING_MODES, ExtractionSpec, extract_hidden_states
from .ghs1 import write_ghs1
from .plan_apply import (
    AdapterConfig,
    AdapterTargetSpec,
    MatrixAssignment,
    apply_plan,
    load_plan,
    summary_tsv,
    write_config,
)

__version__ = "0.1.0"
