"""Embedding dataset I/O, validation, ontology construction, frequency filtering.

A dataset is a pair of files: a binary embedding matrix and a JSONL token
sidecar. The embedding file is little-endian: magic bytes "LCE1", then
u32 N, u32 D, u32 layer_id, then N*D IEEE-754 float32 values row-major.
Token records are one JSON object per line with keys
{"id", "sent", "pos", "word", "label", "span"}; "span" defaults to 1
when absent and "label" may be null.

Row i of the matrix is the vector for token record i; ids are dense and
positional so cluster assignments can be stored as flat arrays.
"""

from __future__ import annotations

import json
import struct
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

MAGIC = b"LCE1"
_HEADER = struct.Struct("<4sIII")


@dataclass
class TokenRecord:
    id: int
    sent: int
    pos: int
    word: str
    label: str | None = None
    span: int = 1


@dataclass
class EmbeddingDataset:
    """N x D float32 vectors plus one TokenRecord per row."""

    vectors: np.ndarray
    tokens: list[TokenRecord]
    layer_id: int = 0

    @property
    def n_points(self) -> int:
        return int(self.vectors.shape[0])

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])


@dataclass
class HumanOntology:
    """Label -> set of token ids carrying that label."""

    concepts: dict[str, frozenset[int]]

    @property
    def label_count(self) -> int:
        return len(self.concepts)


def as_matrix(ds) -> np.ndarray:
    """Accept an EmbeddingDataset or a bare 2-D array; return float32 C-order."""
    X = ds.vectors if isinstance(ds, EmbeddingDataset) else np.asarray(ds)
    if X.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {X.shape}")
    return np.ascontiguousarray(X, dtype=np.float32)


def validate_dataset(ds: EmbeddingDataset) -> None:
    X = ds.vectors
    if X.ndim != 2:
        raise ValidationError(f"vectors must be 2-D, got shape {X.shape}")
    if X.dtype != np.float32:
        raise ValidationError(f"vectors must be float32, got {X.dtype}")
    n, _ = X.shape
    finite_rows = np.isfinite(X).all(axis=1)
    if not finite_rows.all():
        row = int(np.argmin(finite_rows))
        raise ValidationError(f"non-finite value at row {row}")
    if len(ds.tokens) != n:
        raise ValidationError(
            f"token count mismatch: {len(ds.tokens)} records for {n} vectors"
        )
    for i, t in enumerate(ds.tokens):
        if t.id != i:
            raise ValidationError(f"token id {t.id} at line {i}: ids must be 0..N-1 in order")
        if not t.word:
            raise ValidationError(f"empty word at token {i}")
        if t.span < 1:
            raise ValidationError(f"span {t.span} at token {i}: must be >= 1")
        if t.sent < 0 or t.pos < 0:
            raise ValidationError(f"negative sent/pos at token {i}")


def from_arrays(X, words=None, labels=None, spans=None, sents=None, layer_id=0) -> EmbeddingDataset:
    """Build a validated dataset from arrays; missing metadata gets defaults."""
    X = as_matrix(X)
    n = X.shape[0]
    words = [f"w{i}" for i in range(n)] if words is None else list(words)
    labels = [None] * n if labels is None else list(labels)
    spans = [1] * n if spans is None else [int(s) for s in spans]
    sents = [i // 16 for i in range(n)] if sents is None else [int(s) for s in sents]
    tokens = [
        TokenRecord(id=i, sent=sents[i], pos=i % 16, word=words[i], label=labels[i], span=spans[i])
        for i in range(n)
    ]
    ds = EmbeddingDataset(vectors=X, tokens=tokens, layer_id=layer_id)
    validate_dataset(ds)
    return ds


def save_embeddings(path, vectors: np.ndarray, layer_id: int = 0) -> None:
    X = np.ascontiguousarray(vectors, dtype=np.float32)
    n, d = X.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, n, d, layer_id))
        f.write(X.tobytes(order="C"))


def load_embeddings(path) -> tuple[np.ndarray, int]:
    with open(path, "rb") as f:
        head = f.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise ValidationError(f"{path}: truncated header")
        magic, n, d, layer_id = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValidationError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        body = f.read()
    expected = n * d * 4
    if len(body) != expected:
        raise ValidationError(
            f"{path}: payload is {len(body)} bytes, header N={n} D={d} implies {expected}"
        )
    X = np.frombuffer(body, dtype="<f4").reshape(n, d)
    return np.ascontiguousarray(X), int(layer_id)


def save_tokens(path, tokens: list[TokenRecord]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for t in tokens:
            obj = {"id": t.id, "sent": t.sent, "pos": t.pos, "word": t.word,
                   "label": t.label, "span": t.span}
            f.write(json.dumps(obj, ensure_ascii=False) + "\n")


def load_tokens(path) -> list[TokenRecord]:
    tokens = []
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValidationError(f"{path}: bad JSON at line {i}: {e}") from e
            try:
                tokens.append(TokenRecord(
                    id=int(obj["id"]), sent=int(obj["sent"]), pos=int(obj["pos"]),
                    word=str(obj["word"]), label=obj.get("label"),
                    span=int(obj.get("span", 1)),
                ))
            except KeyError as e:
                raise ValidationError(f"{path}: missing field {e} at line {i}") from e
    return tokens


def load_dataset(embedding_path, tokens_path) -> EmbeddingDataset:
    """Load and validate the file pair; any contract violation names its row."""
    X, layer_id = load_embeddings(embedding_path)
    tokens = load_tokens(tokens_path)
    if len(tokens) != X.shape[0]:
        raise ValidationError(
            f"token count mismatch: {tokens_path} has {len(tokens)} records, "
            f"{embedding_path} has N={X.shape[0]}"
        )
    ds = EmbeddingDataset(vectors=X, tokens=tokens, layer_id=layer_id)
    validate_dataset(ds)
    return ds


def save_dataset(ds: EmbeddingDataset, embedding_path, tokens_path) -> None:
    save_embeddings(embedding_path, ds.vectors, ds.layer_id)
    save_tokens(tokens_path, ds.tokens)


def build_ontology(ds: EmbeddingDataset) -> HumanOntology:
    """One concept per distinct label; unlabeled tokens belong to no concept."""
    groups: dict[str, list[int]] = {}
    for t in ds.tokens:
        if t.label is not None:
            groups.setdefault(t.label, []).append(t.id)
    if not groups:
        raise ValidationError("no labeled tokens: cannot build an ontology")
    return HumanOntology(concepts={lab: frozenset(ids) for lab, ids in groups.items()})


def frequency_filter(ds: EmbeddingDataset, min_occ: int, max_occ: int | None = None) -> EmbeddingDataset:
    """Keep rows whose surface form occurs between min_occ and max_occ times.

    Counting is over token occurrences (rows), case-sensitive on the exact
    surface string. Ids are re-densified; row order is preserved.
    max_occ=None means no upper bound.
    """
    hi = float("inf") if max_occ is None else max_occ
    if min_occ > hi:
        raise ValidationError(f"min_occ {min_occ} exceeds max_occ {max_occ}")
    counts = Counter(t.word for t in ds.tokens)
    keep = [t.id for t in ds.tokens if min_occ <= counts[t.word] <= hi]
    if not keep:
        raise ValidationError("empty result: frequency filter removed all points")
    idx = np.asarray(keep, dtype=np.int64)
    new_tokens = [
        TokenRecord(id=j, sent=t.sent, pos=t.pos, word=t.word, label=t.label, span=t.span)
        for j, t in enumerate(ds.tokens[i] for i in keep)
    ]
    return EmbeddingDataset(vectors=ds.vectors[idx].copy(), tokens=new_tokens,
                            layer_id=ds.layer_id)
