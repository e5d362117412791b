"""Confusion matrices, precision/recall/F1, averaging, and report assembly.

Per-class metrics follow

    P = TP / (TP + FP)    R = TP / (TP + FN)    F1 = 2PR / (P + R)

with zero denominators reported as 0 together with a degenerate-class
flag. The weighted average weighs classes by support, so weighted recall
always equals accuracy for single-label predictions; the micro average
is computed but not surfaced in the default table.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np


@dataclass(frozen=True)
class ConfusionMatrix:
    """Square count matrix: rows are true classes, columns are predictions."""

    counts: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        k = len(self.class_names)
        if counts.shape != (k, k):
            raise ValueError(f"confusion matrix shape {counts.shape} does not match {k} classes")
        if np.any(counts < 0):
            raise ValueError("confusion matrix counts must be nonnegative")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def support(self, index: int) -> int:
        return int(self.counts[index].sum())


class PRF(NamedTuple):
    precision: float
    recall: float
    f1: float
    degenerate: bool = False


def confusion(
    y_true: Sequence, y_pred: Sequence, class_names: Sequence[str]
) -> ConfusionMatrix:
    if len(y_true) != len(y_pred):
        raise ValueError(f"length mismatch: {len(y_true)} true vs {len(y_pred)} predicted")
    index = {name: i for i, name in enumerate(class_names)}
    counts = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        if t not in index or p not in index:
            unknown = t if t not in index else p
            raise ValueError(f"unknown label {unknown!r}; known classes: {list(class_names)}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(counts, tuple(class_names))


def prf(matrix: ConfusionMatrix, class_index: int) -> PRF:
    if not 0 <= class_index < len(matrix.class_names):
        raise IndexError(f"class index {class_index} out of range")
    tp = float(matrix.counts[class_index, class_index])
    fp = float(matrix.counts[:, class_index].sum() - tp)
    fn = float(matrix.counts[class_index, :].sum() - tp)
    degenerate = False
    if tp + fp == 0.0:
        precision, degenerate = 0.0, True
    else:
        precision = tp / (tp + fp)
    if tp + fn == 0.0:
        recall, degenerate = 0.0, True
    else:
        recall = tp / (tp + fn)
    if precision + recall == 0.0:
        f1 = 0.0
        degenerate = degenerate or tp + fp + fn > 0
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return PRF(precision, recall, f1, degenerate)


def accuracy(matrix: ConfusionMatrix) -> float:
    total = matrix.total
    if total == 0:
        raise ValueError("accuracy of an empty confusion matrix is undefined")
    return float(np.trace(matrix.counts)) / total


def averages(matrix: ConfusionMatrix, mode: str = "weighted") -> PRF:
    """Averaged (P, R, F1) across classes: macro, weighted, or micro."""
    k = len(matrix.class_names)
    per_class = [prf(matrix, i) for i in range(k)]
    degenerate = any(m.degenerate for m in per_class)
    if mode == "macro":
        weights = np.full(k, 1.0 / k)
    elif mode == "weighted":
        supports = np.array([matrix.support(i) for i in range(k)], dtype=float)
        total = supports.sum()
        if total == 0:
            raise ValueError("weighted average of an empty matrix is undefined")
        weights = supports / total
    elif mode == "micro":
        tp = float(np.trace(matrix.counts))
        total = float(matrix.total)
        value = tp / total if total else 0.0
        return PRF(value, value, value, degenerate)
    else:
        raise ValueError(f"unknown averaging mode {mode!r}")
    p = float(np.dot(weights, [m.precision for m in per_class]))
    r = float(np.dot(weights, [m.recall for m in per_class]))
    f = float(np.dot(weights, [m.f1 for m in per_class]))
    return PRF(p, r, f, degenerate)


@dataclass
class EvalReport:
    model_id: str
    matrix: ConfusionMatrix
    per_class: dict[str, dict]
    accuracy: float
    macro: PRF
    weighted: PRF
    run_meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        seeds = self.run_meta.get("seed")
        return {
            "model": self.model_id,
            "seeds": [seeds] if seeds is not None else [],
            "per_class": {
                str(name): {
                    "p": m["precision"],
                    "r": m["recall"],
                    "f1": m["f1"],
                    "support": m["support"],
                    "degenerate": m["degenerate"],
                }
                for name, m in self.per_class.items()
            },
            "accuracy": self.accuracy,
            "macro": {"p": self.macro.precision, "r": self.macro.recall, "f1": self.macro.f1},
            "weighted": {
                "p": self.weighted.precision,
                "r": self.weighted.recall,
                "f1": self.weighted.f1,
            },
            "degenerate_classes": [
                str(name) for name, m in self.per_class.items() if m["degenerate"]
            ],
            "confusion": self.matrix.counts.tolist(),
            "class_names": [str(name) for name in self.matrix.class_names],
            "run_meta": self.run_meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)


def evaluate(
    y_true: Sequence,
    y_pred: Sequence,
    class_names: Sequence[str],
    model_id: str = "model",
    run_meta: dict | None = None,
) -> EvalReport:
    matrix = confusion(y_true, y_pred, class_names)
    per_class = {}
    for i, name in enumerate(class_names):
        m = prf(matrix, i)
        per_class[name] = {
            "precision": m.precision,
            "recall": m.recall,
            "f1": m.f1,
            "support": matrix.support(i),
            "degenerate": m.degenerate,
        }
    return EvalReport(
        model_id=model_id,
        matrix=matrix,
        per_class=per_class,
        accuracy=accuracy(matrix),
        macro=averages(matrix, "macro"),
        weighted=averages(matrix, "weighted"),
        run_meta=dict(run_meta or {}),
    )


def report_from_dict(payload: dict) -> EvalReport:
    matrix = ConfusionMatrix(np.asarray(payload["confusion"]), tuple(payload["class_names"]))
    macro = PRF(payload["macro"]["p"], payload["macro"]["r"], payload["macro"]["f1"])
    weighted = PRF(payload["weighted"]["p"], payload["weighted"]["r"], payload["weighted"]["f1"])
    per_class = {
        name: {
            "precision": m["p"],
            "recall": m["r"],
            "f1": m["f1"],
            "support": m["support"],
            "degenerate": m.get("degenerate", False),
        }
        for name, m in payload["per_class"].items()
    }
    return EvalReport(
        model_id=payload["model"],
        matrix=matrix,
        per_class=per_class,
        accuracy=payload["accuracy"],
        macro=macro,
        weighted=weighted,
        run_meta=payload.get("run_meta", {}),
    )


@dataclass(frozen=True)
class ReportRow:
    """One line of the rendered benchmark table (seed-averaged)."""

    model_id: str
    seeds: tuple[int, ...]
    per_class: dict[str, tuple[float, float, float]]
    accuracy: float
    weighted: tuple[float, float, float]
    degenerate_classes: tuple[str, ...]


def aggregate(reports: Sequence[EvalReport]) -> list[ReportRow]:
    """Group reports by model id; values become means over the seeds supplied."""
    if not reports:
        raise ValueError("no evaluations to aggregate")
    by_model: dict[str, list[EvalReport]] = {}
    for rep in reports:
        by_model.setdefault(rep.model_id, []).append(rep)
    rows = []
    for model_id, group in by_model.items():
        class_names = group[0].matrix.class_names
        per_class = {}
        for name in class_names:
            per_class[name] = tuple(
                float(np.mean([g.per_class[name][key] for g in group]))
                for key in ("precision", "recall", "f1")
            )
        seeds = tuple(g.run_meta.get("seed") for g in group if g.run_meta.get("seed") is not None)
        degenerate = tuple(
            sorted({name for g in group for name, m in g.per_class.items() if m["degenerate"]})
        )
        rows.append(
            ReportRow(
                model_id=model_id,
                seeds=seeds,
                per_class=per_class,
                accuracy=float(np.mean([g.accuracy for g in group])),
                weighted=tuple(
                    float(np.mean([getattr(g.weighted, key) for g in group]))
                    for key in ("precision", "recall", "f1")
                ),
                degenerate_classes=degenerate,
            )
        )
    return rows


def render_table(rows: Sequence[ReportRow], class_names: Sequence[str]) -> str:
    """Aligned text table: per-class P/R/F1 blocks, then Acc, W(P), W(R), W(F1)."""
    header = ["Model"]
    for name in class_names:
        header += [f"{name} P", f"{name} R", f"{name} F1"]
    header += ["Acc", "W(P)", "W(R)", "W(F1)"]
    body = []
    for row in rows:
        cells = [row.model_id]
        for name in class_names:
            cells += [f"{v:.3f}" for v in row.per_class[name]]
        cells += [f"{row.accuracy:.3f}"] + [f"{v:.3f}" for v in row.weighted]
        if row.degenerate_classes:
            cells[0] += " [degenerate: " + ",".join(str(c) for c in row.degenerate_classes) + "]"
        body.append(cells)
    widths = [max(len(r[i]) for r in [header] + body) for i in range(len(header))]
    lines = []
    for r in [header] + body:
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(r, widths)).rstrip())
    return "\n".join(lines)
