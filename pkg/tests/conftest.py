import csv
from pathlib import Path

import numpy as np
import pytest

from kanhope import corpus

HOPE_WORDS = [
    "super", "hope", "best", "wishes", "great", "love", "support",
    "nimge", "olle", "agali", "shubha", "chennagide",
]
NOT_HOPE_WORDS = [
    "waste", "troll", "worst", "hate", "bad", "flop",
    "beda", "saaku", "kett", "nodbedi", "boring", "dislike",
]
FILLER_WORDS = [
    "movie", "trailer", "anna", "guru", "kannada", "song",
    "idu", "nodi", "tumba", "sakkath", "ಚಿತ್ರ", "ನೋಡಿ",
]


def synthetic_rows(n: int, seed: int = 7, not_kannada: int = 0):
    """Label-correlated synthetic comments mimicking code-mixed YouTube text."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        label = "Hope" if i % 3 == 0 else "Not-Hope"
        pool = HOPE_WORDS if label == "Hope" else NOT_HOPE_WORDS
        k = int(rng.integers(4, 10))
        words = list(rng.choice(pool, size=k // 2)) + list(rng.choice(FILLER_WORDS, size=k - k // 2))
        rng.shuffle(words)
        rows.append((" ".join(words), label))
    for i in range(not_kannada):
        rows.append((f"plain english filler comment {i}", "Not-Kannada"))
    return rows


def write_dataset_csv(path: Path, rows, header=("text", "label")):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


@pytest.fixture
def synth_csv(tmp_path):
    return write_dataset_csv(tmp_path / "synth.csv", synthetic_rows(240, not_kannada=30))


@pytest.fixture
def synth_dataset(synth_csv):
    return corpus.load_dataset(synth_csv)
