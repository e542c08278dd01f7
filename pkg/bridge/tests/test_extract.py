import numpy as np
import pytest

from torch_bridge import (
    DatasetError,
    ExtractionSpec,
    ModelLoadError,
    ValidationError,
    extract_hidden_states,
)


def spec_for(model_dir, dataset, out, **kw):
    return ExtractionSpec(model=model_dir, dataset=dataset, output_path=str(out), **kw)


def read_layout(path):
    """Just enough parsing to check the structural contract."""
    import json
    import struct

    blob = path.read_bytes()
    num_layers, n_points = struct.unpack_from("<II", blob, 8)
    off = 16
    dims = []
    for _ in range(num_layers):
        (dim,) = struct.unpack_from("<I", blob, off)
        dims.append(dim)
        off += 4 + 4 * n_points * dim
    (meta_len,) = struct.unpack_from("<I", blob, off)
    meta = json.loads(blob[off + 4 : off + 4 + meta_len])
    return num_layers, n_points, dims, meta


class TestStructure:
    def test_layer_and_point_counts(self, tiny_encoder_dir, text_dataset, tmp_path):
        out = tmp_path / "states.ghs"
        path = extract_hidden_states(
            spec_for(tiny_encoder_dir, text_dataset, out, max_examples=50, pooling="mean")
        )
        num_layers, n_points, dims, meta = read_layout(path)
        assert num_layers == 5  # embedding output + 4 block outputs
        assert n_points == 50
        assert dims == [32] * 5
        assert meta["pooling"] == "mean"
        assert meta["model"] == tiny_encoder_dir

    def test_byte_identical_reruns(self, tiny_encoder_dir, text_dataset, tmp_path):
        spec_a = spec_for(tiny_encoder_dir, text_dataset, tmp_path / "a.ghs", max_examples=32)
        spec_b = spec_for(tiny_encoder_dir, text_dataset, tmp_path / "b.ghs", max_examples=32)
        extract_hidden_states(spec_a)
        extract_hidden_states(spec_b)
        assert (tmp_path / "a.ghs").read_bytes() == (tmp_path / "b.ghs").read_bytes()

    def test_token_sample_k_multiplies_points(self, tiny_encoder_dir, text_dataset, tmp_path):
        out = tmp_path / "k.ghs"
        extract_hidden_states(
            spec_for(
                tiny_encoder_dir,
                text_dataset,
                out,
                max_examples=16,
                pooling="token-sample-k",
                token_sample_k=3,
                seed=5,
            )
        )
        _, n_points, _, meta = read_layout(out)
        assert n_points == 16 * 3
        assert meta["pooling"] == "token-sample-k"

    @pytest.mark.parametrize("pooling", ["first-token", "last-token"])
    def test_single_token_poolings(self, tiny_encoder_dir, text_dataset, tmp_path, pooling):
        out = tmp_path / f"{pooling}.ghs"
        extract_hidden_states(
            spec_for(tiny_encoder_dir, text_dataset, out, max_examples=12, pooling=pooling)
        )
        num_layers, n_points, _, _ = read_layout(out)
        assert (num_layers, n_points) == (5, 12)

    def test_batch_boundaries_do_not_change_counts(self, tiny_encoder_dir, text_dataset, tmp_path):
        out = tmp_path / "bs.ghs"
        extract_hidden_states(
            spec_for(tiny_encoder_dir, text_dataset, out, max_examples=30, batch_size=7)
        )
        _, n_points, _, _ = read_layout(out)
        assert n_points == 30


class TestValidation:
    def test_unknown_pooling_fails_before_model_load(self, text_dataset, tmp_path):
        # the model path does not exist: reaching ModelLoadError would mean
        # validation ran too late
        spec = spec_for("/nonexistent/model", text_dataset, tmp_path / "x.ghs", pooling="median")
        with pytest.raises(ValidationError, match="pooling"):
            extract_hidden_states(spec)

    def test_max_examples_floor(self, text_dataset, tmp_path):
        spec = spec_for("/nonexistent/model", text_dataset, tmp_path / "x.ghs", max_examples=5)
        with pytest.raises(ValidationError, match="max_examples"):
            extract_hidden_states(spec)

    def test_missing_dataset(self, tiny_encoder_dir, tmp_path):
        spec = spec_for(tiny_encoder_dir, tmp_path / "absent.txt", tmp_path / "x.ghs")
        with pytest.raises(DatasetError, match="not found"):
            extract_hidden_states(spec)

    def test_dataset_checked_before_model(self, tmp_path):
        spec = spec_for("/nonexistent/model", tmp_path / "absent.txt", tmp_path / "x.ghs")
        with pytest.raises(DatasetError):
            extract_hidden_states(spec)

    def test_bad_model_path(self, text_dataset, tmp_path):
        spec = spec_for("/nonexistent/model", text_dataset, tmp_path / "x.ghs")
        with pytest.raises(ModelLoadError):
            extract_hidden_states(spec)

    def test_dataset_directory_with_split(self, tiny_encoder_dir, text_dataset, tmp_path):
        from pathlib import Path

        data_dir = Path(text_dataset).parent
        out = tmp_path / "split.ghs"
        extract_hidden_states(
            spec_for(tiny_encoder_dir, str(data_dir), out, split="validation", max_examples=10)
        )
        _, n_points, _, _ = read_layout(out)
        assert n_points == 10
