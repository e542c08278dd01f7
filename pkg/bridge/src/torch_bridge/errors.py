"""Bridge error types with stable machine-readable codes."""


class BridgeError(Exception):
    code = "error"


class ValidationError(BridgeError):
    """A spec field is invalid; raised before any model or data is touched."""

    code = "validation_error"


class ModelLoadError(BridgeError):
    code = "model_load_error"


class DatasetError(BridgeError):
    code = "dataset_error"


class SchemaError(BridgeError):
    """A rank-plan file does not match the supported schema."""

    code = "schema_error"


class BlockCountMismatch(BridgeError):
    code = "block_count_mismatch"
