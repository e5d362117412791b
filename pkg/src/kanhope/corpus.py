"""Dataset loading, validation, filtering, splitting, and summary statistics.

The on-disk format is a UTF-8 CSV with a header row and columns
``text,label`` plus an optional ``translation`` column, quoted per
RFC 4180. Label spellings map through a configurable table whose
defaults match the published data ("Hope", "Not-Hope", "Not-Kannada").
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import features
from .util import rng_for


class DatasetError(Exception):
    """Raised for malformed dataset files or invalid dataset operations."""


class Label(enum.Enum):
    HOPE = "Hope"
    NOT_HOPE = "Not-Hope"
    NOT_KANNADA = "Not-Kannada"


DEFAULT_LABEL_MAP = {
    "Hope": Label.HOPE,
    "Not-Hope": Label.NOT_HOPE,
    "Not-Kannada": Label.NOT_KANNADA,
}

# The binary task keeps only these two classes; Not-Kannada rows exist
# solely in raw ingested data.
CLASSIFICATION_LABELS = (Label.NOT_HOPE, Label.HOPE)


@dataclass(frozen=True)
class Comment:
    """One labeled text unit, optionally carrying an English translation."""

    id: int
    text: str
    label: Label
    translation: str | None = None


@dataclass
class Dataset:
    comments: list[Comment]
    name: str = field(default="dataset", compare=False)

    def __post_init__(self):
        seen = set()
        for c in self.comments:
            if c.id in seen:
                raise DatasetError(f"duplicate comment id {c.id} in dataset {self.name!r}")
            seen.add(c.id)

    def __len__(self) -> int:
        return len(self.comments)

    def __iter__(self):
        return iter(self.comments)

    def ids(self) -> set[int]:
        return {c.id for c in self.comments}

    def label_counts(self) -> dict[Label, int]:
        counts: dict[Label, int] = {}
        for c in self.comments:
            counts[c.label] = counts.get(c.label, 0) + 1
        return counts

    def has_translations(self) -> bool:
        return any(c.translation is not None for c in self.comments)


@dataclass(frozen=True)
class CorpusStats:
    num_posts: int
    num_tokens: int
    vocab_size: int
    num_sentences: int
    tokens_per_post: int
    sentences_per_post: int

    def to_dict(self) -> dict:
        return {
            "posts": self.num_posts,
            "tokens": self.num_tokens,
            "vocab": self.vocab_size,
            "sentences": self.num_sentences,
            "tokens_per_post": self.tokens_per_post,
            "sentences_per_post": self.sentences_per_post,
        }


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    dev_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 0
    stratified: bool = True

    def __post_init__(self):
        fractions = (self.train_fraction, self.dev_fraction, self.test_fraction)
        for f in fractions:
            if not 0.0 < f < 1.0:
                raise ValueError(f"split fraction {f} not in (0, 1)")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"split fractions sum to {sum(fractions)}, expected 1")

    @property
    def fractions(self) -> tuple[float, float, float]:
        return (self.train_fraction, self.dev_fraction, self.test_fraction)


def load_dataset(
    path: str | Path,
    label_map: dict[str, Label] | None = None,
    name: str | None = None,
) -> Dataset:
    """Load a dataset CSV; ids are assigned 0..n-1 in file order."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    label_map = label_map or DEFAULT_LABEL_MAP
    comments: list[Comment] = []
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DatasetError(f"{path}: missing header row") from None
            columns = {col.strip(): i for i, col in enumerate(header)}
            for required in ("text", "label"):
                if required not in columns:
                    raise DatasetError(f"{path}: header lacks required column {required!r}")
            text_col, label_col = columns["text"], columns["label"]
            trans_col = columns.get("translation")
            for rownum, row in enumerate(reader, start=2):
                if len(row) <= max(text_col, label_col):
                    raise DatasetError(f"{path}: malformed row {rownum}: too few fields")
                text = row[text_col]
                if not text.strip():
                    raise DatasetError(f"{path}: malformed row {rownum}: empty text")
                label_str = row[label_col].strip()
                if label_str not in label_map:
                    raise DatasetError(
                        f"{path}: row {rownum}: unknown label {label_str!r} "
                        f"(known: {sorted(label_map)})"
                    )
                translation = None
                if trans_col is not None and len(row) > trans_col and row[trans_col] != "":
                    translation = row[trans_col]
                comments.append(Comment(len(comments), text, label_map[label_str], translation))
    except UnicodeDecodeError as exc:
        raise DatasetError(f"{path}: not valid UTF-8 ({exc})") from exc
    return Dataset(comments, name=name or path.stem)


def save_dataset(dataset: Dataset, path: str | Path, label_names: dict[Label, str] | None = None) -> None:
    """Write the dataset back to CSV, preserving comment order."""
    label_names = label_names or {v: k for k, v in DEFAULT_LABEL_MAP.items()}
    with_translation = dataset.has_translations()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["text", "label"] + (["translation"] if with_translation else [])
        writer.writerow(header)
        for c in dataset.comments:
            row = [c.text, label_names[c.label]]
            if with_translation:
                row.append(c.translation or "")
            writer.writerow(row)


def filter_labels(dataset: Dataset, keep: Iterable[Label]) -> Dataset:
    """Keep exactly the comments whose label is in ``keep``; order and ids preserved."""
    keep = set(keep)
    if not keep:
        raise ValueError("keep set must be non-empty")
    kept = [c for c in dataset.comments if c.label in keep]
    if not kept:
        raise DatasetError(
            f"filtering {dataset.name!r} by {sorted(l.value for l in keep)} left no comments"
        )
    return Dataset(kept, name=dataset.name)


def _part_sizes(n: int, fractions: Sequence[float]) -> list[int]:
    """Floor each part, then hand leftovers to the last parts first.

    For n=6,176 at 0.8/0.1/0.1 this yields 4,940/618/618; assigning
    leftovers to train instead would give 4,942/617/617.
    """
    sizes = [math.floor(n * f) for f in fractions]
    leftover = n - sum(sizes)
    i = len(sizes) - 1
    while leftover > 0:
        sizes[i] += 1
        leftover -= 1
        i = (i - 1) % len(sizes)
    return sizes


def _apportion(class_sizes: list[int], part_sizes: list[int]) -> list[list[int]]:
    """Per-class counts for each part, preserving both marginals.

    Cumulative largest-remainder rounding: after each part, the running
    total assigned to a class stays within one item of its running quota,
    which keeps every cell near n_c * f_p while part sums match exactly.
    Returns a matrix indexed [part][class].
    """
    n = sum(class_sizes)
    cum_quota = [0.0] * len(class_sizes)
    cum_assigned = [0] * len(class_sizes)
    out: list[list[int]] = []
    for p, size in enumerate(part_sizes[:-1]):
        for c, n_c in enumerate(class_sizes):
            cum_quota[c] += size * n_c / n
        base = [max(math.floor(cum_quota[c]) - cum_assigned[c], 0) for c in range(len(class_sizes))]
        rem = size - sum(base)
        order = sorted(
            range(len(class_sizes)),
            key=lambda c: (-(cum_quota[c] - math.floor(cum_quota[c])), c),
        )
        alloc = list(base)
        for c in order:
            if rem <= 0:
                break
            alloc[c] += 1
            rem -= 1
        while rem < 0:
            # clamping negatives to zero can overshoot; shave the most overfull class
            c = max(
                (c for c in range(len(class_sizes)) if alloc[c] > 0),
                key=lambda c: cum_assigned[c] + alloc[c] - cum_quota[c],
            )
            alloc[c] -= 1
            rem += 1
        for c in range(len(class_sizes)):
            cum_assigned[c] += alloc[c]
        out.append(alloc)
    out.append([class_sizes[c] - cum_assigned[c] for c in range(len(class_sizes))])
    return out


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Partition into (train, dev, test); deterministic for a fixed seed."""
    n = len(dataset)
    if n == 0:
        raise DatasetError("cannot split an empty dataset")
    sizes = _part_sizes(n, spec.fractions)
    if min(sizes) == 0:
        raise DatasetError(f"split of {n} comments at {spec.fractions} leaves an empty part")
    rng = rng_for(spec.seed, "corpus.split")

    part_positions: list[list[int]] = [[], [], []]
    if spec.stratified:
        by_label: dict[Label, list[int]] = {}
        for pos, c in enumerate(dataset.comments):
            by_label.setdefault(c.label, []).append(pos)
        labels = sorted(by_label, key=lambda l: l.value)
        # parts ordered (test, dev, train) so train absorbs the per-class remainders
        alloc = _apportion([len(by_label[l]) for l in labels], [sizes[2], sizes[1], sizes[0]])
        for ci, label in enumerate(labels):
            positions = np.array(by_label[label])
            rng.shuffle(positions)
            offset = 0
            for part_idx, part in ((2, 0), (1, 1), (0, 2)):
                take = alloc[part][ci]
                part_positions[part_idx].extend(positions[offset : offset + take].tolist())
                offset += take
    else:
        positions = np.arange(n)
        rng.shuffle(positions)
        part_positions[2] = positions[: sizes[2]].tolist()
        part_positions[1] = positions[sizes[2] : sizes[2] + sizes[1]].tolist()
        part_positions[0] = positions[sizes[2] + sizes[1] :].tolist()

    parts = []
    for part_idx, suffix in ((0, "train"), (1, "dev"), (2, "test")):
        chosen = sorted(part_positions[part_idx])
        parts.append(
            Dataset([dataset.comments[i] for i in chosen], name=f"{dataset.name}/{suffix}")
        )
    return tuple(parts)


def corpus_stats(
    dataset: Dataset,
    word_tokenizer=features.tokenize,
    sentence_splitter=features.split_sentences,
) -> CorpusStats:
    """Token, vocabulary, and sentence counts under the given tokenizers."""
    num_tokens = 0
    num_sentences = 0
    vocab: set[str] = set()
    for c in dataset.comments:
        tokens = word_tokenizer(c.text)
        num_tokens += len(tokens)
        vocab.update(tokens)
        num_sentences += len(sentence_splitter(c.text))
    n = len(dataset)
    return CorpusStats(
        num_posts=n,
        num_tokens=num_tokens,
        vocab_size=len(vocab),
        num_sentences=num_sentences,
        tokens_per_post=num_tokens // n if n else 0,
        sentences_per_post=num_sentences // n if n else 0,
    )
