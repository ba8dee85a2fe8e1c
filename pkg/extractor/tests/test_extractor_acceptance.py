"""Round-trip acceptance: extractor output must load cleanly through the
clustering package's dataset reader, keep N consistent across layers, and
match a by-hand pooling computation on a known sentence."""

import time

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from conceptmine.dataset import load_dataset
from hsextract import ExtractionJob, extract


def test_round_trip_fifty_sentences(checkpoint, corpus50, tmp_path):
    t0 = time.perf_counter()
    corpus, labels = corpus50
    layers = (0, 1, 2)
    job = ExtractionJob(
        model=checkpoint,
        layers=layers,
        corpus=corpus,
        out_dir=str(tmp_path / "out"),
        labels=labels,
        aggregation="mean_subwords",
        span_ngrams=(2, 3),
    )
    res = extract(job)
    assert res.skipped_lines == []

    # loader validates ids, spans, shapes, finiteness; any violation raises
    sets = {l: load_dataset(res.files[l], res.tokens_path) for l in layers}
    counts = {l: ds.n_points for l, ds in sets.items()}
    assert len(set(counts.values())) == 1
    with open(res.tokens_path, encoding="utf-8") as f:
        n_records = sum(1 for line in f if line.strip())
    assert n_records == res.rows == counts[0]
    for l, ds in sets.items():
        assert ds.layer_id == l
        assert ds.dim == res.dim

    # hand computation: sentence 0, word 1 ("unbreakable", 3 subwords), last block
    tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    model = AutoModel.from_pretrained(checkpoint)
    model.eval()
    with open(corpus, encoding="utf-8") as f:
        words = f.readline().split()
    enc = tokenizer([words], is_split_into_words=True, return_tensors="pt")
    with torch.no_grad():
        states = model(**enc, output_hidden_states=True).hidden_states
    positions = [i for i, w in enumerate(enc.word_ids(0)) if w == 1]
    assert len(positions) == 3
    hand = states[2][0].numpy().astype(np.float64)[positions].mean(axis=0)

    ds = sets[2]
    rows = [t.id for t in ds.tokens if t.sent == 0 and t.pos == 1 and t.span == 1]
    assert len(rows) == 1
    assert ds.tokens[rows[0]].word == "unbreakable"
    got = ds.vectors[rows[0]].astype(np.float64)
    worst = float(np.max(np.abs(got - hand)))
    assert np.allclose(got, hand, rtol=1e-5, atol=1e-6)

    print(f"PASS extractor round-trip (N={counts[0]} in all {len(layers)} layer files, "
          f"hand-check max|diff|={worst:.2e}) [{time.perf_counter() - t0:.1f}s]")
