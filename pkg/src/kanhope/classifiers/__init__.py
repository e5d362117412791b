"""The five classical baselines over TF-IDF vectors.

Every model exposes fit via its module, plus the shared ``predict`` /
``predict_proba`` dispatch and versioned JSON persistence keyed by a
``model_kind`` discriminator.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import sparse

from ..features import SparseVector
from .bayes import NBModel, fit_nb, predict_proba_nb
from .linear import LinearModel, fit_logreg, predict_proba_linear
from .neighbors import KnnModel, fit_knn, predict_proba_knn
from .tree import (
    ForestModel,
    TreeModel,
    fit_forest,
    fit_tree,
    predict_proba_forest,
    predict_proba_tree,
)

MODEL_FORMAT_VERSION = 1

Model = LinearModel | NBModel | KnnModel | TreeModel | ForestModel

__all__ = [
    "LinearModel",
    "NBModel",
    "KnnModel",
    "TreeModel",
    "ForestModel",
    "fit_logreg",
    "fit_nb",
    "fit_knn",
    "fit_tree",
    "fit_forest",
    "predict",
    "predict_proba",
    "model_classes",
    "save_model",
    "load_model",
]


def model_classes(model: Model) -> np.ndarray:
    if isinstance(model, LinearModel):
        return np.array([0, 1])
    return model.classes


def predict_proba(model: Model, X: Sequence[SparseVector]) -> np.ndarray:
    if isinstance(model, LinearModel):
        return predict_proba_linear(model, X)
    if isinstance(model, NBModel):
        return predict_proba_nb(model, X)
    if isinstance(model, KnnModel):
        return predict_proba_knn(model, X)
    if isinstance(model, TreeModel):
        return predict_proba_tree(model, X)
    if isinstance(model, ForestModel):
        return predict_proba_forest(model, X)
    raise TypeError(f"unknown model type {type(model).__name__}")


def predict(model: Model, X: Sequence[SparseVector]) -> np.ndarray:
    proba = predict_proba(model, X)
    return model_classes(model)[np.argmax(proba, axis=1)]


def _tree_payload(tree: TreeModel) -> dict:
    nodes = []
    for node in tree.nodes:
        if node.is_leaf:
            nodes.append({"counts": node.counts.tolist()})
        else:
            nodes.append(
                {
                    "feature": node.feature,
                    "threshold": node.threshold,
                    "left": node.left,
                    "right": node.right,
                    "counts": node.counts.tolist(),
                }
            )
    return {
        "nodes": nodes,
        "classes": tree.classes.tolist(),
        "n_features": tree.n_features,
        "max_depth": tree.max_depth,
        "min_samples_split": tree.min_samples_split,
        "criterion": tree.criterion,
    }


def _tree_from_payload(payload: dict) -> TreeModel:
    from .tree import TreeNode

    nodes = []
    for raw in payload["nodes"]:
        counts = np.asarray(raw["counts"], dtype=np.int64)
        if "feature" in raw:
            nodes.append(
                TreeNode(raw["feature"], raw["threshold"], raw["left"], raw["right"], counts)
            )
        else:
            nodes.append(TreeNode(counts=counts))
    return TreeModel(
        nodes=nodes,
        classes=np.asarray(payload["classes"], dtype=np.int64),
        n_features=payload["n_features"],
        max_depth=payload["max_depth"],
        min_samples_split=payload["min_samples_split"],
        criterion=payload["criterion"],
    )


def model_payload(model: Model) -> dict:
    base = {"version": MODEL_FORMAT_VERSION}
    if isinstance(model, LinearModel):
        return base | {
            "model_kind": "logreg",
            "C": model.C,
            "bias": model.bias,
            "weights": model.weights.tolist(),
            "train_config": model.train_config,
        }
    if isinstance(model, NBModel):
        return base | {
            "model_kind": "naive_bayes",
            "alpha": model.alpha,
            "class_log_prior": model.class_log_prior.tolist(),
            "feature_log_prob": model.feature_log_prob.tolist(),
            "classes": model.classes.tolist(),
        }
    if isinstance(model, KnnModel):
        return base | {
            "model_kind": "knn",
            "k": model.k,
            "p": model.p,
            "labels": model.stored_labels.tolist(),
            "classes": model.classes.tolist(),
            "n_features": model.stored.shape[1],
            "indptr": model.stored.indptr.tolist(),
            "indices": model.stored.indices.tolist(),
            "data": model.stored.data.tolist(),
        }
    if isinstance(model, TreeModel):
        return base | {"model_kind": "decision_tree"} | _tree_payload(model)
    if isinstance(model, ForestModel):
        return base | {
            "model_kind": "random_forest",
            "n_trees": model.n_trees,
            "max_features": model.max_features,
            "bootstrap": model.bootstrap,
            "seed": model.seed,
            "classes": model.classes.tolist(),
            "n_features": model.n_features,
            "trees": [_tree_payload(t) for t in model.trees],
        }
    raise TypeError(f"cannot serialize model type {type(model).__name__}")


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model_payload(model)), encoding="utf-8")


def load_model(path: str | Path) -> Model:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')!r}")
    kind = payload.get("model_kind")
    if kind == "logreg":
        return LinearModel(
            weights=np.asarray(payload["weights"], dtype=np.float64),
            bias=float(payload["bias"]),
            C=float(payload["C"]),
            train_config=payload.get("train_config", {}),
        )
    if kind == "naive_bayes":
        return NBModel(
            class_log_prior=np.asarray(payload["class_log_prior"], dtype=np.float64),
            feature_log_prob=np.asarray(payload["feature_log_prob"], dtype=np.float64),
            alpha=float(payload["alpha"]),
            classes=np.asarray(payload["classes"], dtype=np.int64),
        )
    if kind == "knn":
        stored = sparse.csr_matrix(
            (
                np.asarray(payload["data"], dtype=np.float64),
                np.asarray(payload["indices"], dtype=np.int64),
                np.asarray(payload["indptr"], dtype=np.int64),
            ),
            shape=(len(payload["labels"]), payload["n_features"]),
        )
        return KnnModel(
            stored=stored,
            stored_labels=np.asarray(payload["labels"], dtype=np.int64),
            k=int(payload["k"]),
            p=float(payload["p"]),
            classes=np.asarray(payload["classes"], dtype=np.int64),
        )
    if kind == "decision_tree":
        return _tree_from_payload(payload)
    if kind == "random_forest":
        return ForestModel(
            trees=[_tree_from_payload(t) for t in payload["trees"]],
            classes=np.asarray(payload["classes"], dtype=np.int64),
            n_features=payload["n_features"],
            n_trees=payload["n_trees"],
            max_features=payload["max_features"],
            bootstrap=payload["bootstrap"],
            seed=payload["seed"],
        )
    raise ValueError(f"unknown model_kind {kind!r}")
