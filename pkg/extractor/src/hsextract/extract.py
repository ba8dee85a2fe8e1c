"""Transformer hidden-state extraction to embedding-matrix datasets.

Runs a forward pass over an annotated corpus and writes one binary
matrix per requested layer plus a shared token sidecar, in the formats
the clustering package reads: magic "LCE1", then u32 N, u32 D,
u32 layer_id (little-endian), then N*D float32 values row-major; token
records as JSONL objects {id, sent, pos, word, label, span}.

Row i of every layer file is the vector for token record i. Word rows
pool subword states per the job's aggregation policy; span rows are the
arithmetic mean of their constituent word vectors and stay unlabeled
unless a span label file supplies one. Sentences whose subword length
exceeds the model's position limit are skipped and logged; "sent"
fields keep original corpus line numbers so skips stay traceable.
"""

from __future__ import annotations

import json
import logging
import os
import struct
from dataclasses import dataclass

import numpy as np
import torch

from .errors import ExtractionError
from .job import ExtractionJob, Sentence, read_corpus, read_span_labels, validate_job

log = logging.getLogger("hsextract")

MAGIC = b"LCE1"
_HEADER = struct.Struct("<4sIII")


@dataclass
class ExtractionResult:
    rows: int
    dim: int
    files: dict[int, str]
    tokens_path: str
    manifest_path: str
    skipped_lines: list[int]


def _load_checkpoint(model_path: str):
    from transformers import AutoModel, AutoTokenizer

    try:
        tokenizer = AutoTokenizer.from_pretrained(model_path)
        model = AutoModel.from_pretrained(model_path)
    except Exception as e:
        raise ExtractionError(f"cannot load checkpoint {model_path!r}: {e}") from e
    if not getattr(tokenizer, "is_fast", False):
        raise ExtractionError(
            f"{model_path!r}: subword-to-word alignment needs a fast tokenizer"
        )
    model.eval()
    depth = getattr(model.config, "num_hidden_layers", None)
    if depth is None:
        raise ExtractionError(f"{model_path!r}: config does not state num_hidden_layers")
    max_len = getattr(model.config, "max_position_embeddings", None)
    if max_len is None:
        mm = getattr(tokenizer, "model_max_length", None)
        max_len = mm if mm is not None and mm < 10**9 else None
    return tokenizer, model, int(depth), max_len


def _split_by_length(tokenizer, sentences: list[Sentence], max_len):
    """Drop sentences that would overflow the position limit, with a log line."""
    kept, skipped = [], []
    for s in sentences:
        n_pos = len(tokenizer(s.words, is_split_into_words=True)["input_ids"])
        if max_len is not None and n_pos > max_len:
            log.warning(
                "corpus line %d skipped: %d subword positions exceed the model limit of %d",
                s.line, n_pos, max_len,
            )
            skipped.append(s.line)
        else:
            kept.append(s)
    return kept, skipped


def _pool_words(hidden: np.ndarray, slots: list[list[int]], aggregation: str) -> np.ndarray:
    if aggregation == "first_subword":
        return np.stack([hidden[sl[0]] for sl in slots])
    return np.stack([hidden[sl].mean(axis=0) for sl in slots])


def _word_vectors(tokenizer, model, kept: list[Sentence], layers, aggregation, batch_size):
    """One (W, D) float32 array per layer per kept sentence, corpus order."""
    out: dict[int, list[np.ndarray]] = {l: [] for l in layers}
    for lo in range(0, len(kept), batch_size):
        batch = kept[lo:lo + batch_size]
        enc = tokenizer(
            [s.words for s in batch],
            is_split_into_words=True,
            padding=True,
            return_tensors="pt",
        )
        with torch.inference_mode():
            states = model(**enc, output_hidden_states=True).hidden_states
        for b, s in enumerate(batch):
            slots: list[list[int]] = [[] for _ in s.words]
            for pos_idx, w in enumerate(enc.word_ids(b)):
                if w is not None:
                    slots[w].append(pos_idx)
            for w, sl in enumerate(slots):
                if not sl:
                    raise ExtractionError(
                        f"corpus line {s.line}: word {w} ({s.words[w]!r}) "
                        "produced no subword tokens"
                    )
            for l in layers:
                hidden = states[l][b].detach().cpu().numpy()
                out[l].append(_pool_words(hidden, slots, aggregation).astype(np.float32))
    return out


def _write_matrix(path: str, X: np.ndarray, layer_id: int) -> None:
    X = np.ascontiguousarray(X, dtype="<f4")
    n, d = X.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, n, d, layer_id))
        f.write(X.tobytes(order="C"))


def extract(job: ExtractionJob) -> ExtractionResult:
    """Run the job; returns row/file accounting for the written dataset."""
    validate_job(job)
    sentences = read_corpus(job.corpus, job.labels)
    span_map = read_span_labels(job.span_labels) if job.span_labels else {}
    tokenizer, model, depth, max_len = _load_checkpoint(job.model)
    bad = [l for l in job.layers if l > depth]
    if bad:
        raise ExtractionError(
            f"layers {bad} out of range for a {depth}-block model (valid: 0..{depth})"
        )

    kept, skipped = _split_by_length(tokenizer, sentences, max_len)
    if not kept:
        raise ExtractionError("every sentence overflowed the position limit; nothing to extract")
    word_vecs = _word_vectors(
        tokenizer, model, kept, job.layers, job.aggregation, job.batch_size
    )

    ngrams = sorted(set(job.span_ngrams))
    tokens: list[dict] = []
    mats: dict[int, list[np.ndarray]] = {l: [] for l in job.layers}
    used_spans: set[tuple[int, int, int]] = set()
    for si, s in enumerate(kept):
        n_words = len(s.words)
        for w in range(n_words):
            tokens.append({
                "id": len(tokens), "sent": s.line, "pos": w, "word": s.words[w],
                "label": s.tags[w] if s.tags else None, "span": 1,
            })
        for l in job.layers:
            mats[l].append(word_vecs[l][si])
        for n in ngrams:
            if n_words < n:
                continue
            for start in range(n_words - n + 1):
                key = (s.line, start, n)
                label = span_map.get(key)
                if label is not None:
                    used_spans.add(key)
                tokens.append({
                    "id": len(tokens), "sent": s.line, "pos": start,
                    "word": " ".join(s.words[start:start + n]),
                    "label": label, "span": n,
                })
            for l in job.layers:
                wv = word_vecs[l][si]
                mats[l].append(np.stack(
                    [wv[start:start + n].mean(axis=0) for start in range(n_words - n + 1)]
                ))
    unused = len(span_map) - len(used_spans)
    if unused:
        log.warning("%d span-label entries matched no emitted row", unused)

    os.makedirs(job.out_dir, exist_ok=True)
    dim = word_vecs[job.layers[0]][0].shape[1]
    files = {}
    for l in job.layers:
        X = np.concatenate(mats[l], axis=0)
        path = os.path.join(job.out_dir, f"layer_{l:02d}.lce1")
        _write_matrix(path, X, l)
        files[l] = path
    tokens_path = os.path.join(job.out_dir, "tokens.jsonl")
    with open(tokens_path, "w", encoding="utf-8") as f:
        for t in tokens:
            f.write(json.dumps(t, ensure_ascii=False) + "\n")

    manifest = {
        "model": job.model,
        "layers": list(job.layers),
        "aggregation": job.aggregation,
        "span_ngrams": ngrams,
        "corpus": job.corpus,
        "labels": job.labels,
        "span_labels": job.span_labels,
        "batch_size": job.batch_size,
        "rows": len(tokens),
        "dim": int(dim),
        "sentences_read": len(sentences),
        "skipped_lines": skipped,
        "files": {str(l): os.path.basename(p) for l, p in files.items()},
        "tokens_file": "tokens.jsonl",
    }
    manifest_path = os.path.join(job.out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")

    return ExtractionResult(
        rows=len(tokens), dim=int(dim), files=files, tokens_path=tokens_path,
        manifest_path=manifest_path, skipped_lines=skipped,
    )
