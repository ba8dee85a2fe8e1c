"""Unit and property tests for corpus parsing, pooling, and file output."""

import logging

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st
from transformers import AutoModel, AutoTokenizer

from conceptmine.dataset import load_dataset
from hsextract import AGGREGATIONS, ExtractionError, ExtractionJob, extract
from hsextract.job import read_corpus, read_span_labels

from toycorpus import DT, IN, JJ, NN, TAG_OF, VB, make_corpus

WORD_POOL = DT + NN + VB + IN + JJ + ["zzz"]


def _write_corpus(tmp_path, text, name="corpus.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def _job(checkpoint, tmp_path, text, **kwargs):
    kwargs.setdefault("layers", (0,))
    return ExtractionJob(
        model=checkpoint,
        corpus=_write_corpus(tmp_path, text),
        out_dir=str(tmp_path / "out"),
        **kwargs,
    )


def _hand_states(checkpoint, words):
    """Forward pass run directly in the test, bypassing the extractor."""
    tokenizer = AutoTokenizer.from_pretrained(checkpoint)
    model = AutoModel.from_pretrained(checkpoint)
    model.eval()
    enc = tokenizer([words], is_split_into_words=True, return_tensors="pt")
    with torch.no_grad():
        states = model(**enc, output_hidden_states=True).hidden_states
    return [s[0].numpy() for s in states], enc.word_ids(0)


def test_two_sentences_seven_words(checkpoint, tmp_path):
    res = extract(_job(checkpoint, tmp_path, "the cat sat\non the big mat\n",
                       layers=(0, 2)))
    assert res.rows == 7
    for layer in (0, 2):
        ds = load_dataset(res.files[layer], res.tokens_path)
        assert ds.n_points == 7
        assert ds.layer_id == layer
    ds = load_dataset(res.files[0], res.tokens_path)
    assert [t.sent for t in ds.tokens] == [0, 0, 0, 1, 1, 1, 1]
    assert [t.pos for t in ds.tokens] == [0, 1, 2, 0, 1, 2, 3]
    assert [t.word for t in ds.tokens] == ["the", "cat", "sat", "on", "the", "big", "mat"]
    assert all(t.span == 1 and t.label is None for t in ds.tokens)


def test_mean_subwords_matches_hand_pooling(checkpoint, tmp_path):
    words = "the unbreakable cat".split()
    res = extract(_job(checkpoint, tmp_path, " ".join(words) + "\n", layers=(1,)))
    states, word_ids = _hand_states(checkpoint, words)
    ds = load_dataset(res.files[1], res.tokens_path)
    for w in range(len(words)):
        positions = [i for i, wid in enumerate(word_ids) if wid == w]
        hand = states[1][positions].mean(axis=0)
        assert np.array_equal(ds.vectors[w], hand)


def test_first_subword_matches_hand_pooling(checkpoint, tmp_path):
    words = "a playful dog ran\n"
    res = extract(_job(checkpoint, tmp_path, words, layers=(2,),
                       aggregation="first_subword"))
    states, word_ids = _hand_states(checkpoint, words.split())
    ds = load_dataset(res.files[2], res.tokens_path)
    for w in range(4):
        first = min(i for i, wid in enumerate(word_ids) if wid == w)
        assert np.array_equal(ds.vectors[w], states[2][first])


def test_span_rows_are_word_vector_means(checkpoint, tmp_path):
    res = extract(_job(checkpoint, tmp_path, "a big dog ran near the river\n",
                       span_ngrams=(2, 3)))
    ds = load_dataset(res.files[0], res.tokens_path)
    assert ds.n_points == 7 + 6 + 5
    spans = [t for t in ds.tokens if t.span > 1]
    assert [(t.span, t.pos) for t in spans] == \
        [(2, s) for s in range(6)] + [(3, s) for s in range(5)]
    words = "a big dog ran near the river".split()
    for t in spans:
        assert t.word == " ".join(words[t.pos:t.pos + t.span])
        assert t.label is None
        expected = ds.vectors[t.pos:t.pos + t.span].mean(axis=0)
        assert np.array_equal(ds.vectors[t.id], expected)


def test_span_label_file(checkpoint, tmp_path):
    span_file = tmp_path / "spans.tsv"
    span_file.write_text("0\t0\t2\tNP\n", encoding="utf-8")
    res = extract(_job(checkpoint, tmp_path, "the cat sat\n",
                       span_ngrams=(2,), span_labels=str(span_file)))
    ds = load_dataset(res.files[0], res.tokens_path)
    labels = {(t.sent, t.pos, t.span): t.label for t in ds.tokens if t.span > 1}
    assert labels == {(0, 0, 2): "NP", (0, 1, 2): None}


def test_word_labels_carried_through(checkpoint, corpus50, tmp_path):
    corpus, labels = corpus50
    job = ExtractionJob(model=checkpoint, layers=(0,), corpus=corpus,
                        out_dir=str(tmp_path / "out"), labels=labels,
                        span_ngrams=(2,))
    res = extract(job)
    ds = load_dataset(res.files[0], res.tokens_path)
    for t in ds.tokens:
        if t.span == 1:
            assert t.label == TAG_OF[t.word]
        else:
            assert t.label is None


def test_overflow_sentence_skipped_and_logged(checkpoint, tmp_path, caplog):
    text = "the cat sat\n" + " ".join(["the"] * 40) + "\na dog ran\n"
    with caplog.at_level(logging.WARNING, logger="hsextract"):
        res = extract(_job(checkpoint, tmp_path, text))
    assert res.skipped_lines == [1]
    assert "line 1 skipped" in caplog.text
    ds = load_dataset(res.files[0], res.tokens_path)
    assert sorted({t.sent for t in ds.tokens}) == [0, 2]
    assert ds.n_points == 6


def test_all_sentences_overflowing_is_an_error(checkpoint, tmp_path):
    with pytest.raises(ExtractionError, match="nothing to extract"):
        extract(_job(checkpoint, tmp_path, " ".join(["the"] * 40) + "\n"))


def test_word_erased_by_normalization_is_an_error(checkpoint, tmp_path):
    # a bare combining accent normalizes to nothing and owns no subwords
    with pytest.raises(ExtractionError, match="no subword tokens"):
        extract(_job(checkpoint, tmp_path, "the ́ cat\n"))


def test_label_file_line_count_mismatch(tmp_path):
    corpus = _write_corpus(tmp_path, "the cat\nthe dog\n")
    labels = _write_corpus(tmp_path, "DT NN\n", name="labels.txt")
    with pytest.raises(ExtractionError, match="label/line mismatch"):
        read_corpus(corpus, labels)


def test_label_tag_count_mismatch(tmp_path):
    corpus = _write_corpus(tmp_path, "the cat sat\n")
    labels = _write_corpus(tmp_path, "DT NN\n", name="labels.txt")
    with pytest.raises(ExtractionError, match="line 0"):
        read_corpus(corpus, labels)


def test_empty_corpus_line_rejected(tmp_path):
    corpus = _write_corpus(tmp_path, "the cat\n\nthe dog\n")
    with pytest.raises(ExtractionError, match="line 1 is empty"):
        read_corpus(corpus)


def test_empty_corpus_file_rejected(tmp_path):
    corpus = _write_corpus(tmp_path, "")
    with pytest.raises(ExtractionError, match="empty"):
        read_corpus(corpus)


def test_span_label_parsing_errors(tmp_path):
    bad_fields = tmp_path / "a.tsv"
    bad_fields.write_text("0\t1\tNP\n", encoding="utf-8")
    with pytest.raises(ExtractionError, match="4 tab-separated fields"):
        read_span_labels(str(bad_fields))
    bad_int = tmp_path / "b.tsv"
    bad_int.write_text("0\tx\t2\tNP\n", encoding="utf-8")
    with pytest.raises(ExtractionError, match="non-integer"):
        read_span_labels(str(bad_int))
    dup = tmp_path / "c.tsv"
    dup.write_text("0\t0\t2\tNP\n0\t0\t2\tVP\n", encoding="utf-8")
    with pytest.raises(ExtractionError, match="duplicate span"):
        read_span_labels(str(dup))


def test_layer_out_of_range(checkpoint, tmp_path):
    with pytest.raises(ExtractionError, match=r"valid: 0\.\.2"):
        extract(_job(checkpoint, tmp_path, "the cat\n", layers=(0, 3)))


@pytest.mark.parametrize("kwargs", [
    {"layers": ()},
    {"layers": (1, 1)},
    {"layers": (-1,)},
    {"layers": (0,), "aggregation": "max_subwords"},
    {"layers": (0,), "span_ngrams": (1,)},
    {"layers": (0,), "span_ngrams": (6,)},
    {"layers": (0,), "span_ngrams": (2, 2)},
    {"layers": (0,), "batch_size": 0},
])
def test_bad_job_parameters(checkpoint, tmp_path, kwargs):
    with pytest.raises(ExtractionError):
        extract(_job(checkpoint, tmp_path, "the cat\n", **kwargs))


def test_unloadable_checkpoint(tmp_path):
    with pytest.raises(ExtractionError, match="cannot load checkpoint"):
        extract(ExtractionJob(model=str(tmp_path / "missing"), layers=(0,),
                              corpus=_write_corpus(tmp_path, "the cat\n"),
                              out_dir=str(tmp_path / "out")))


def test_runs_are_byte_identical(checkpoint, tmp_path):
    lines, _ = make_corpus(10, seed=3)
    corpus = _write_corpus(tmp_path, "\n".join(lines) + "\n")
    outs = []
    for name in ("run1", "run2"):
        job = ExtractionJob(model=checkpoint, layers=(0, 1, 2), corpus=corpus,
                            out_dir=str(tmp_path / name), span_ngrams=(2,))
        outs.append(extract(job))
    for a, b in zip(
        [*outs[0].files.values(), outs[0].tokens_path, outs[0].manifest_path],
        [*outs[1].files.values(), outs[1].tokens_path, outs[1].manifest_path],
    ):
        with open(a, "rb") as fa, open(b, "rb") as fb:
            assert fa.read() == fb.read()


def test_batch_size_does_not_move_vectors(checkpoint, tmp_path):
    # padding changes reduction shapes, so exact bits may differ; values must not
    lines, _ = make_corpus(20, seed=5)
    corpus = _write_corpus(tmp_path, "\n".join(lines) + "\n")
    results = []
    for bs in (16, 1):
        job = ExtractionJob(model=checkpoint, layers=(2,), corpus=corpus,
                            out_dir=str(tmp_path / f"bs{bs}"), batch_size=bs)
        res = extract(job)
        results.append(load_dataset(res.files[2], res.tokens_path).vectors)
    assert np.allclose(results[0], results[1], rtol=1e-4, atol=1e-5)


@settings(max_examples=8, deadline=None)
@given(data=st.data())
def test_row_accounting_property(checkpoint, tmp_path_factory, data):
    sentences = data.draw(st.lists(
        st.lists(st.sampled_from(WORD_POOL), min_size=1, max_size=8),
        min_size=1, max_size=5,
    ))
    ngrams = tuple(sorted(data.draw(st.sets(st.sampled_from((2, 3, 4, 5))))))
    layers = tuple(sorted(data.draw(st.sets(st.sampled_from((0, 1, 2)), min_size=1))))
    aggregation = data.draw(st.sampled_from(AGGREGATIONS))
    d = tmp_path_factory.mktemp("prop")
    corpus = d / "corpus.txt"
    corpus.write_text("\n".join(" ".join(s) for s in sentences) + "\n", encoding="utf-8")
    job = ExtractionJob(model=checkpoint, layers=layers, corpus=str(corpus),
                        out_dir=str(d / "out"), aggregation=aggregation,
                        span_ngrams=ngrams)
    res = extract(job)
    expected = sum(len(s) for s in sentences) + sum(
        max(0, len(s) - n + 1) for s in sentences for n in ngrams
    )
    assert res.rows == expected
    for layer in layers:
        assert load_dataset(res.files[layer], res.tokens_path).n_points == expected
