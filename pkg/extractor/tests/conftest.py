"""Session fixtures: a tiny seeded encoder checkpoint and a toy corpus.

The checkpoint is randomly initialized with a fixed seed; nothing here
depends on trained weights.
"""

import pytest
import torch
from transformers import BertConfig, BertModel, BertTokenizerFast

from toycorpus import HIDDEN, MAX_POSITIONS, N_BLOCKS, VOCAB, make_corpus


@pytest.fixture(scope="session")
def checkpoint(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny_encoder")
    tokenizer = BertTokenizerFast(vocab={t: i for i, t in enumerate(VOCAB)},
                                  do_lower_case=True)
    torch.manual_seed(20260819)
    config = BertConfig(
        vocab_size=len(VOCAB),
        hidden_size=HIDDEN,
        num_hidden_layers=N_BLOCKS,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=MAX_POSITIONS,
    )
    model = BertModel(config)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    return str(out)


@pytest.fixture(scope="session")
def corpus50(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus50")
    lines, tags = make_corpus(50, seed=7)
    corpus = d / "corpus.txt"
    labels = d / "labels.txt"
    corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")
    labels.write_text("\n".join(tags) + "\n", encoding="utf-8")
    return str(corpus), str(labels)
