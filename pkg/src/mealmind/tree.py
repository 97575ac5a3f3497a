"""Greedy CART classification trees used as surrogates of the rule engine.

Split contract: "go left iff value <= threshold", thresholds are midpoints
of consecutive distinct sorted values, ties broken by lowest feature index
then lowest threshold. Fitted trees are immutable.
"""

from __future__ import annotations

import json
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .domain import FeatureSchema, SchemaError


@dataclass(frozen=True)
class TrainConfig:
    max_depth: int | None = 5
    min_samples_split: int = 4
    min_gain: float = 1e-7
    seed: int = 42
    subsample: float | None = None  # fraction of rows; None disables subsampling

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be at least 1 (or None for unbounded)")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if self.min_gain < 0:
            raise ValueError("min_gain must be non-negative")
        if self.subsample is not None and not 0.0 < self.subsample <= 1.0:
            raise ValueError("subsample must lie in (0, 1]")


@dataclass(frozen=True)
class TreeNode:
    """Internal node (feature_index/threshold/left/right) or leaf (class_counts)."""

    cover: int
    feature_index: int | None = None
    threshold: float | None = None
    left: int | None = None
    right: int | None = None
    class_counts: tuple[int, ...] | None = None

    @property
    def is_leaf(self) -> bool:
        return self.class_counts is not None


def gini_impurity(counts: Sequence[int]) -> float:
    """1 - sum(p^2); 0 for a pure node, 0.5 for balanced binary counts."""
    total = sum(counts)
    if total == 0:
        return 0.0
    return 1.0 - sum((c / total) ** 2 for c in counts)


@dataclass(frozen=True)
class DecisionTree:
    """Flat preorder node array; node 0 is the root."""

    nodes: tuple[TreeNode, ...]
    schema: FeatureSchema
    classes: tuple[Any, ...]

    def class_index(self, label: Any) -> int:
        try:
            return self.classes.index(label)
        except ValueError:
            raise KeyError(f"label {label!r} is not a class of this tree") from None

    def _leaf_for(self, x: Sequence[float]) -> TreeNode:
        node = self.nodes[0]
        while not node.is_leaf:
            if x[node.feature_index] <= node.threshold:
                node = self.nodes[node.left]
            else:
                node = self.nodes[node.right]
        return node

    def predict_proba(self, x: Sequence[float]) -> tuple[float, ...]:
        """Class distribution of the leaf reached by x, aligned with self.classes."""
        self.schema.validate_vector(x)
        leaf = self._leaf_for(x)
        total = sum(leaf.class_counts)
        return tuple(c / total for c in leaf.class_counts)

    def predict_class(self, x: Sequence[float]) -> Any:
        """Majority class of the reached leaf; ties go to the lowest class index."""
        self.schema.validate_vector(x)
        leaf = self._leaf_for(x)
        best = max(range(len(leaf.class_counts)), key=lambda i: (leaf.class_counts[i], -i))
        return self.classes[best]

    def to_dict(self) -> dict[str, Any]:
        nodes = []
        for node in self.nodes:
            if node.is_leaf:
                nodes.append({"class_counts": list(node.class_counts), "cover": node.cover})
            else:
                nodes.append(
                    {
                        "feature_index": node.feature_index,
                        "threshold": node.threshold,
                        "left": node.left,
                        "right": node.right,
                        "cover": node.cover,
                    }
                )
        return {
            "schema": self.schema.to_dict(),
            "classes": list(self.classes),
            "nodes": nodes,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> DecisionTree:
        nodes = []
        for entry in data["nodes"]:
            if "class_counts" in entry:
                nodes.append(
                    TreeNode(cover=entry["cover"], class_counts=tuple(entry["class_counts"]))
                )
            else:
                nodes.append(
                    TreeNode(
                        cover=entry["cover"],
                        feature_index=entry["feature_index"],
                        threshold=entry["threshold"],
                        left=entry["left"],
                        right=entry["right"],
                    )
                )
        return cls(
            nodes=tuple(nodes),
            schema=FeatureSchema.from_dict(data["schema"]),
            classes=tuple(data["classes"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> DecisionTree:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _best_split(
    X: np.ndarray, y: np.ndarray, n_classes: int
) -> tuple[float, int, float] | None:
    """Best (gain, feature_index, threshold); ties fall to the first candidate."""
    n = len(y)
    parent_counts = np.bincount(y, minlength=n_classes)
    parent_gini = gini_impurity(parent_counts.tolist())

    best: tuple[float, int, float] | None = None
    for j in range(X.shape[1]):
        values = X[:, j]
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        sorted_y = y[order]

        left_counts = [0] * n_classes
        right_counts = parent_counts.tolist()
        for i in range(n - 1):
            cls = sorted_y[i]
            left_counts[cls] += 1
            right_counts[cls] -= 1
            if sorted_vals[i] == sorted_vals[i + 1]:
                continue
            n_left = i + 1
            n_right = n - n_left
            weighted = (
                n_left * gini_impurity(left_counts) + n_right * gini_impurity(right_counts)
            ) / n
            gain = parent_gini - weighted
            if best is None or gain > best[0]:
                threshold = (float(sorted_vals[i]) + float(sorted_vals[i + 1])) / 2.0
                best = (gain, j, threshold)
    return best


def fit(
    rows: Sequence[Sequence[float]],
    labels: Sequence[Any],
    schema: FeatureSchema,
    config: TrainConfig | None = None,
    classes: Sequence[Any] | None = None,
) -> DecisionTree:
    """Grow a CART tree; pure in (rows, labels, config) when subsampling is off."""
    if config is None:
        config = TrainConfig()
    if len(rows) == 0:
        raise ValueError("training set must be non-empty")
    if len(rows) != len(labels):
        raise ValueError("rows and labels must have equal length")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValueError("feature vectors have inconsistent lengths")
    if widths.pop() != len(schema):
        raise SchemaError("vectors do not match schema length")

    if classes is None:
        class_list = sorted(set(labels), key=lambda c: (str(type(c)), c))
    else:
        class_list = list(classes)
        missing = set(labels) - set(class_list)
        if missing:
            raise ValueError(f"labels {sorted(missing, key=str)!r} absent from classes")
    class_index = {c: i for i, c in enumerate(class_list)}
    n_classes = len(class_list)

    X = np.asarray(rows, dtype=float)
    y = np.asarray([class_index[label] for label in labels], dtype=np.intp)

    if config.subsample is not None:
        rng = random.Random(config.seed)
        keep = max(1, round(len(rows) * config.subsample))
        chosen = sorted(rng.sample(range(len(rows)), keep))
        X, y = X[chosen], y[chosen]

    nodes: list[TreeNode | None] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        position = len(nodes)
        nodes.append(None)
        counts = np.bincount(y[idx], minlength=n_classes)

        def make_leaf() -> int:
            nodes[position] = TreeNode(cover=len(idx), class_counts=tuple(int(c) for c in counts))
            return position

        if (
            gini_impurity(counts.tolist()) == 0.0
            or (config.max_depth is not None and depth >= config.max_depth)
            or len(idx) < config.min_samples_split
        ):
            return make_leaf()

        best = _best_split(X[idx], y[idx], n_classes)
        if best is None or best[0] < config.min_gain:
            return make_leaf()

        _, feature, threshold = best
        mask = X[idx, feature] <= threshold
        left = grow(idx[mask], depth + 1)
        right = grow(idx[~mask], depth + 1)
        nodes[position] = TreeNode(
            cover=len(idx),
            feature_index=feature,
            threshold=threshold,
            left=left,
            right=right,
        )
        return position

    grow(np.arange(len(y)), 0)
    return DecisionTree(nodes=tuple(nodes), schema=schema, classes=tuple(class_list))


def fidelity(tree: DecisionTree, rows: Sequence[Sequence[float]], labels: Sequence[Any]) -> float:
    """Fraction of rows where the surrogate reproduces the given label."""
    if len(rows) == 0:
        raise ValueError("evaluation set must be non-empty")
    if len(rows) != len(labels):
        raise ValueError("rows and labels must have equal length")
    hits = sum(1 for x, label in zip(rows, labels) if tree.predict_class(x) == label)
    return hits / len(rows)
