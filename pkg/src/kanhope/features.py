"""Tokenization and TF-IDF n-gram features.

The same word tokenizer feeds corpus statistics, the classical
classifiers, and the dual-channel token hasher. Kannada carries no case,
so lowercasing only affects Latin text; leading and trailing punctuation
is stripped but combining marks (e.g. the Kannada virama) are kept.

The TF-IDF weighting is the smoothed convention with the "+1" both
inside and outside the log, followed by per-document L2 normalization:

    idf(t) = ln((1 + N) / (1 + df(t))) + 1
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence
import unicodedata

import numpy as np
from scipy import sparse

TFIDF_FORMAT_VERSION = 1

# Sentence boundaries: western terminators, newline, and the Kannada danda.
_SENTENCE_BREAK = re.compile(r"[.!?।॥…\n]+")


def _strip_affix_punct(token: str) -> str:
    """Drop leading/trailing punctuation and symbols, keep marks/letters/digits."""
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start])[0] in ("P", "S"):
        start += 1
    while end > start and unicodedata.category(token[end - 1])[0] in ("P", "S"):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> list[str]:
    """Whitespace word tokens, lowercased, with affix punctuation stripped."""
    tokens = []
    for raw in text.lower().split():
        tok = _strip_affix_punct(raw)
        if tok:
            tokens.append(tok)
    return tokens


def split_sentences(text: str) -> list[str]:
    """Non-empty sentence segments per the toolkit's segmentation rule."""
    return [seg.strip() for seg in _SENTENCE_BREAK.split(text) if seg.strip()]


def ngrams(tokens: Sequence[str], n_min: int, n_max: int, joiner: str = " ") -> list[str]:
    """All contiguous n-grams for n in [n_min, n_max], ordered by (n, position)."""
    if not 1 <= n_min <= n_max:
        raise ValueError(f"invalid n-gram range ({n_min}, {n_max})")
    grams = []
    for n in range(n_min, n_max + 1):
        for i in range(len(tokens) - n + 1):
            grams.append(joiner.join(tokens[i : i + n]))
    return grams


@dataclass(frozen=True)
class SparseVector:
    """Sorted sparse feature vector: strictly increasing indices, no stored zeros."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-d and aligned")
        if idx.size and np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if np.any(val == 0.0):
            raise ValueError("explicit zeros are not allowed")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.values**2)))

    def __len__(self) -> int:
        return int(self.indices.size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparseVector)
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.values, other.values)
        )


def to_csr(vectors: Iterable[SparseVector], n_features: int) -> sparse.csr_matrix:
    """Stack sparse vectors into a CSR matrix of width ``n_features``."""
    vectors = list(vectors)
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, v in enumerate(vectors):
        if v.indices.size and v.indices[-1] >= n_features:
            raise ValueError(
                f"feature index {int(v.indices[-1])} out of range for dimension {n_features}"
            )
        indptr[i + 1] = indptr[i] + len(v)
    indices = np.concatenate([v.indices for v in vectors]) if vectors else np.zeros(0, np.int64)
    data = np.concatenate([v.values for v in vectors]) if vectors else np.zeros(0, np.float64)
    return sparse.csr_matrix((data, indices, indptr), shape=(len(vectors), n_features))


@dataclass
class TfidfModel:
    """Fitted n-gram vocabulary with document frequencies.

    vocabulary maps each n-gram to a contiguous feature index 0..V-1 in
    sorted n-gram order; doc_freq[i] is the number of fitting documents
    containing the n-gram with index i.
    """

    vocabulary: dict[str, int]
    doc_freq: np.ndarray
    num_docs: int
    n_range: tuple[int, int]
    min_df: int
    analyzer: str = "word"
    _idf: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._idf is None:
            self._idf = np.log((1.0 + self.num_docs) / (1.0 + np.asarray(self.doc_freq, float))) + 1.0

    @property
    def num_features(self) -> int:
        return len(self.vocabulary)

    def idf(self, index: int) -> float:
        return float(self._idf[index])


def _analyzer_joiner(analyzer: str) -> str:
    if analyzer == "word":
        return " "
    if analyzer == "char":
        return ""
    raise ValueError(f"unknown analyzer {analyzer!r}")


def prepare_doc(text: str, analyzer: str = "word") -> list[str]:
    """Turn raw text into the unit sequence the analyzer consumes."""
    tokens = tokenize(text)
    if analyzer == "word":
        return tokens
    if analyzer == "char":
        return list(" ".join(tokens))
    raise ValueError(f"unknown analyzer {analyzer!r}")


def fit_tfidf(
    docs: Sequence[Sequence[str]],
    n_range: tuple[int, int] = (1, 5),
    min_df: int = 1,
    analyzer: str = "word",
) -> TfidfModel:
    """Fit vocabulary and document frequencies over tokenized documents."""
    if not docs:
        raise ValueError("cannot fit TF-IDF on an empty document list")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    joiner = _analyzer_joiner(analyzer)
    df: dict[str, int] = {}
    for doc in docs:
        for gram in set(ngrams(doc, n_range[0], n_range[1], joiner)):
            df[gram] = df.get(gram, 0) + 1
    kept = sorted(g for g, c in df.items() if c >= min_df)
    if not kept:
        raise ValueError(f"empty vocabulary: no n-gram reaches min_df={min_df}")
    vocabulary = {g: i for i, g in enumerate(kept)}
    doc_freq = np.array([df[g] for g in kept], dtype=np.int64)
    return TfidfModel(vocabulary, doc_freq, len(docs), tuple(n_range), min_df, analyzer)


def transform(model: TfidfModel, doc: Sequence[str]) -> SparseVector:
    """TF-IDF vector for one tokenized document, L2-normalized unless empty."""
    joiner = _analyzer_joiner(model.analyzer)
    counts: dict[int, int] = {}
    for gram in ngrams(doc, model.n_range[0], model.n_range[1], joiner):
        idx = model.vocabulary.get(gram)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return SparseVector(np.zeros(0, np.int64), np.zeros(0, np.float64))
    indices = np.array(sorted(counts), dtype=np.int64)
    weights = np.array([counts[i] for i in indices], dtype=np.float64) * model._idf[indices]
    norm = math.sqrt(float(np.sum(weights**2)))
    if norm > 0.0:
        weights = weights / norm
    return SparseVector(indices, weights)


def transform_all(model: TfidfModel, docs: Sequence[Sequence[str]]) -> list[SparseVector]:
    return [transform(model, doc) for doc in docs]


def save_tfidf(model: TfidfModel, path: str | Path) -> None:
    vocab = [None] * model.num_features
    for gram, idx in model.vocabulary.items():
        vocab[idx] = gram
    payload = {
        "version": TFIDF_FORMAT_VERSION,
        "analyzer": model.analyzer,
        "n_range": list(model.n_range),
        "min_df": model.min_df,
        "num_docs": model.num_docs,
        "vocab": vocab,
        "df": model.doc_freq.tolist(),
    }
    Path(path).write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_tfidf(path: str | Path) -> TfidfModel:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != TFIDF_FORMAT_VERSION:
        raise ValueError(f"unsupported TF-IDF model version {payload.get('version')!r}")
    vocabulary = {g: i for i, g in enumerate(payload["vocab"])}
    return TfidfModel(
        vocabulary=vocabulary,
        doc_freq=np.asarray(payload["df"], dtype=np.int64),
        num_docs=int(payload["num_docs"]),
        n_range=tuple(payload["n_range"]),
        min_df=int(payload["min_df"]),
        analyzer=payload.get("analyzer", "word"),
    )
