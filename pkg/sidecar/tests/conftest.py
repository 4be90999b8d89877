import string

import pytest
import torch


def build_tiny_model(target_dir):
    """Write a small randomly initialized BERT checkpoint + wordpiece tokenizer
    to ``target_dir``, entirely offline. Deterministic for a fixed seed."""
    from transformers import BertConfig, BertModel, BertTokenizerFast

    vocab = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab += list(string.ascii_lowercase) + list(string.digits)
    vocab += list(".,!?;:'\"$#@%&()-|<>")
    vocab += ["the", "cat", "sat", "mat", "dog", "ran", "fast", "river", "bridge",
              "mayor", "town", "storm", "rain", "##s", "##ing", "##ed"]
    vocab_file = target_dir / "vocab.txt"
    vocab_file.write_text("\n".join(vocab) + "\n", encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file), do_lower_case=True)
    tokenizer.save_pretrained(target_dir)

    torch.manual_seed(7)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=512,
    )
    BertModel(config).save_pretrained(target_dir)
    return target_dir


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    return str(build_tiny_model(tmp_path_factory.mktemp("tiny-model")))


@pytest.fixture(scope="session")
def tiny_backend(tiny_model_dir):
    from bertscore_sidecar.scoring import BertScoreBackend, SidecarConfig

    return BertScoreBackend(SidecarConfig(model=tiny_model_dir))
