"""Fixtures: a tiny 4-block encoder built offline, and a small text dataset."""

import pytest


def _build_tokenizer():
    # transformers 5 no longer populates a fast tokenizer from a bare
    # vocab_file, so assemble the WordPiece backend explicitly
    from tokenizers import Tokenizer
    from tokenizers.models import WordPiece
    from tokenizers.normalizers import BertNormalizer
    from tokenizers.pre_tokenizers import BertPreTokenizer
    from tokenizers.processors import TemplateProcessing
    from transformers import BertTokenizerFast

    words = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    words += list("abcdefghijklmnopqrstuvwxyz")
    words += ["##" + c for c in "abcdefghijklmnopqrstuvwxyz"]
    vocab = {w: i for i, w in enumerate(words)}
    backend = Tokenizer(WordPiece(vocab, unk_token="[UNK]"))
    backend.normalizer = BertNormalizer(lowercase=True)
    backend.pre_tokenizer = BertPreTokenizer()
    backend.post_processor = TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    return BertTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )


@pytest.fixture(scope="session")
def tiny_encoder_dir(tmp_path_factory):
    """A bert-tiny-style encoder (4 blocks, width 32) with seeded weights."""
    import torch
    from transformers import BertConfig, BertModel

    path = tmp_path_factory.mktemp("tiny-encoder")
    torch.manual_seed(1234)
    config = BertConfig(
        vocab_size=64,
        hidden_size=32,
        num_hidden_layers=4,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
    )
    BertModel(config).save_pretrained(path)
    _build_tokenizer().save_pretrained(path)
    return str(path)


@pytest.fixture(scope="session")
def text_dataset(tmp_path_factory):
    """64 distinct lowercase lines; one example per line."""
    words = ["gradient", "manifold", "tensor", "neighbor", "distance", "layer", "rank", "scale"]
    lines = []
    for i in range(64):
        tag = "".join("abcdefghij"[int(c)] for c in str(i))  # unique per line
        lines.append(" ".join(words[(i + j) % len(words)] for j in range(3 + i % 4)) + " " + tag)
    path = tmp_path_factory.mktemp("data") / "validation.txt"
    path.write_text("\n".join(lines) + "\n")
    return str(path)
