"""Krippendorff's alpha (nominal metric) over incomplete annotation tables.

Each unit with m >= 2 values contributes every ordered value pair with
weight 1/(m-1) to the coincidence matrix; units seen by fewer than two
annotators contribute nothing. With observed and expected disagreement

    D_o = sum_{c != k} o_ck / n
    D_e = sum_{c != k} n_c * n_k / (n * (n - 1))

the coefficient is alpha = 1 - D_o / D_e.
"""

from __future__ import annotations

import csv
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Sequence

logger = logging.getLogger(__name__)


class UndefinedAlphaError(Exception):
    """Alpha has no value: no pairable data or no expected disagreement."""


@dataclass(frozen=True)
class AnnotationRecord:
    unit_id: str
    annotator_id: str
    label: Hashable


@dataclass
class CoincidenceMatrix:
    labels: list[Hashable]
    counts: dict[Hashable, dict[Hashable, float]]
    n: float

    def value(self, c: Hashable, k: Hashable) -> float:
        return self.counts.get(c, {}).get(k, 0.0)

    def marginal(self, c: Hashable) -> float:
        return sum(self.counts.get(c, {}).values())

    def to_dict(self) -> dict:
        names = [str(l) for l in self.labels]
        return {
            "labels": names,
            "counts": [[self.value(c, k) for k in self.labels] for c in self.labels],
            "n": self.n,
        }


def _units(records: Sequence[AnnotationRecord]) -> dict[str, list[Hashable]]:
    seen: set[tuple[str, str]] = set()
    units: dict[str, list[Hashable]] = defaultdict(list)
    for rec in records:
        key = (rec.unit_id, rec.annotator_id)
        if key in seen:
            raise ValueError(f"duplicate annotation for unit {rec.unit_id!r} by {rec.annotator_id!r}")
        seen.add(key)
        units[rec.unit_id].append(rec.label)
    return units


def coincidence_matrix(records: Sequence[AnnotationRecord]) -> CoincidenceMatrix:
    units = _units(records)
    labels = sorted({rec.label for rec in records}, key=str)
    counts: dict[Hashable, dict[Hashable, float]] = {
        c: {k: 0.0 for k in labels} for c in labels
    }
    n = 0.0
    for values in units.values():
        m = len(values)
        if m < 2:
            continue
        n += m
        weight = 1.0 / (m - 1)
        for i, v in enumerate(values):
            for j, w in enumerate(values):
                if i != j:
                    counts[v][w] += weight
    return CoincidenceMatrix(labels, counts, n)


def krippendorff_alpha(records: Sequence[AnnotationRecord]) -> float:
    """Nominal-metric alpha; 1.0 is perfect agreement, 0.0 chance level."""
    matrix = coincidence_matrix(records)
    n = matrix.n
    if n == 0:
        raise UndefinedAlphaError("no unit has two or more annotations")
    d_o = sum(
        matrix.value(c, k)
        for c in matrix.labels
        for k in matrix.labels
        if c != k
    ) / n
    marginals = {c: matrix.marginal(c) for c in matrix.labels}
    d_e = sum(
        marginals[c] * marginals[k]
        for c in matrix.labels
        for k in matrix.labels
        if c != k
    ) / (n * (n - 1))
    if d_e == 0.0:
        raise UndefinedAlphaError("all pairable values are identical; alpha is undefined")
    return 1.0 - d_o / d_e


@dataclass(frozen=True)
class AnnotatorInfo:
    annotator_id: str
    gender: str = ""
    higher_education: str = ""
    medium_of_schooling: str = ""


@dataclass(frozen=True)
class AnnotatorSummary:
    annotator_id: str
    num_annotations: int
    gender: str
    higher_education: str
    medium_of_schooling: str


def annotator_summary(
    records: Sequence[AnnotationRecord],
    roster: Sequence[AnnotatorInfo] = (),
) -> list[AnnotatorSummary]:
    """Per-annotator annotation counts, joined with roster demographics."""
    by_id = {info.annotator_id: info for info in roster}
    counts = Counter(rec.annotator_id for rec in records)
    rows = []
    ids = sorted(set(counts) | set(by_id))
    for annotator_id in ids:
        info = by_id.get(annotator_id)
        if info is None:
            logger.warning("annotator %r appears in records but not in the roster", annotator_id)
            info = AnnotatorInfo(annotator_id)
        rows.append(
            AnnotatorSummary(
                annotator_id=annotator_id,
                num_annotations=counts.get(annotator_id, 0),
                gender=info.gender,
                higher_education=info.higher_education,
                medium_of_schooling=info.medium_of_schooling,
            )
        )
    return rows


def load_annotations(path: str | Path) -> list[AnnotationRecord]:
    """Read an annotations CSV with columns unit_id,annotator_id,label."""
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for required in ("unit_id", "annotator_id", "label"):
            if required not in (reader.fieldnames or []):
                raise ValueError(f"{path}: annotations CSV lacks column {required!r}")
        for row in reader:
            records.append(AnnotationRecord(row["unit_id"], row["annotator_id"], row["label"]))
    return records


def load_roster(path: str | Path) -> list[AnnotatorInfo]:
    """Read a roster CSV: annotator_id,gender,higher_education,medium_of_schooling."""
    roster = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if "annotator_id" not in (reader.fieldnames or []):
            raise ValueError(f"{path}: roster CSV lacks column 'annotator_id'")
        for row in reader:
            roster.append(
                AnnotatorInfo(
                    annotator_id=row["annotator_id"],
                    gender=row.get("gender", "") or "",
                    higher_education=row.get("higher_education", "") or "",
                    medium_of_schooling=row.get("medium_of_schooling", "") or "",
                )
            )
    return roster
