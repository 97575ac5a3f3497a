"""Exact interventional Shapley values for decision-tree predictions.

The value of a coalition S splices the explained instance's coordinates on
S onto a background row elsewhere and averages the tree's class probability
over the background set. Two independent routes compute the same numbers:
a brute-force enumeration over all coalitions (the oracle, capped at 16
features) and a tree-path algorithm with closed-form factorial weights.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from math import comb
from typing import Any

from .domain import FeatureSchema, FeatureVector, decode
from .tree import DecisionTree

BRUTEFORCE_MAX_FEATURES = 16


@dataclass(frozen=True)
class BackgroundSet:
    """Reference rows the coalition value function averages over."""

    rows: tuple[FeatureVector, ...]

    def __post_init__(self) -> None:
        if not self.rows:
            raise ValueError("background set must contain at least one row")

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class FeatureAttribution:
    """Per-feature Shapley values for one prediction.

    base_value is the mean prediction over the background (the empty
    coalition); base_value + sum(phis) equals model_output.
    """

    base_value: float
    phis: tuple[float, ...]
    model_output: float
    target_class: Any
    instance: FeatureVector

    def to_dict(self, schema: FeatureSchema) -> dict[str, Any]:
        raws = decode(schema, self.instance)
        return {
            "base_value": self.base_value,
            "model_output": self.model_output,
            "target_class": self.target_class,
            "entries": [
                {"feature": name, "raw_value": raws[name], "phi": phi}
                for name, phi in zip(schema.names(), self.phis)
            ],
        }


def _as_rows(background: BackgroundSet | Sequence[Sequence[float]]) -> tuple[FeatureVector, ...]:
    if isinstance(background, BackgroundSet):
        return background.rows
    rows = tuple(tuple(float(v) for v in row) for row in background)
    if not rows:
        raise ValueError("background set must contain at least one row")
    return rows


def _validate_inputs(
    tree: DecisionTree,
    x: Sequence[float],
    rows: Sequence[FeatureVector],
    target_class: Any,
) -> tuple[FeatureVector, int]:
    tree.schema.validate_vector(x)
    for row in rows:
        tree.schema.validate_vector(row)
    return tuple(float(v) for v in x), tree.class_index(target_class)


def _leaf_probability(tree: DecisionTree, x: Sequence[float], class_idx: int) -> float:
    leaf = tree._leaf_for(x)
    return leaf.class_counts[class_idx] / sum(leaf.class_counts)


def shap_bruteforce(
    tree: DecisionTree,
    x: Sequence[float],
    background: BackgroundSet | Sequence[Sequence[float]],
    target_class: Any,
) -> FeatureAttribution:
    """Shapley values by full coalition enumeration; the correctness oracle."""
    rows = _as_rows(background)
    x, class_idx = _validate_inputs(tree, x, rows, target_class)
    n = len(tree.schema)
    if n > BRUTEFORCE_MAX_FEATURES:
        raise ValueError(
            f"brute force handles at most {BRUTEFORCE_MAX_FEATURES} features, got {n}"
        )

    # v[mask] = mean prediction with x's coordinates on the coalition bits.
    values = [0.0] * (1 << n)
    for mask in range(1 << n):
        total = 0.0
        for row in rows:
            composite = tuple(
                x[i] if mask >> i & 1 else row[i] for i in range(n)
            )
            total += _leaf_probability(tree, composite, class_idx)
        values[mask] = total / len(rows)

    weight = [1.0 / (n * comb(n - 1, s)) for s in range(n)]  # s!(n-s-1)!/n!
    phis = [0.0] * n
    for i in range(n):
        bit = 1 << i
        for mask in range(1 << n):
            if mask & bit:
                continue
            phis[i] += weight[bin(mask).count("1")] * (values[mask | bit] - values[mask])

    return FeatureAttribution(
        base_value=values[0],
        phis=tuple(phis),
        model_output=values[(1 << n) - 1],
        target_class=target_class,
        instance=x,
    )


def shap_tree(
    tree: DecisionTree,
    x: Sequence[float],
    background: BackgroundSet | Sequence[Sequence[float]],
    target_class: Any,
) -> FeatureAttribution:
    """Shapley values via root-leaf path enumeration; equals shap_bruteforce.

    For a fixed background row, a leaf is reached by a coalition S exactly
    when every feature on its path that only the instance satisfies is in S
    and every feature only the background row satisfies is out of S. That
    membership condition has a closed-form Shapley weight, summed per leaf.
    """
    rows = _as_rows(background)
    x, class_idx = _validate_inputs(tree, x, rows, target_class)
    n = len(tree.schema)

    weight = [1.0 / (n * comb(n - 1, s)) for s in range(n)]
    # in_weight[a][f] = sum over coalition extensions of w(a-1+k) picking k of f
    # free features; out_weight[a][f] the same with w(a+k).
    choose = [[comb(f, k) for k in range(f + 1)] for f in range(n + 1)]

    def coalition_sum(required: int, free: int) -> float:
        return sum(choose[free][k] * weight[required + k] for k in range(free + 1))

    phis = [0.0] * n
    base = 0.0

    for row in rows:
        # state[f] = (x still satisfies every split on f, background row does)
        state: dict[int, tuple[bool, bool]] = {}

        def walk(node_idx: int) -> None:
            nonlocal base
            node = tree.nodes[node_idx]
            if node.is_leaf:
                total = sum(node.class_counts)
                p = node.class_counts[class_idx] / total
                if p == 0.0:
                    return
                must_in = [f for f, (xa, ba) in state.items() if xa and not ba]
                must_out = [f for f, (xa, ba) in state.items() if ba and not xa]
                a = len(must_in)
                free = n - a - len(must_out)
                if a == 0:
                    base += p
                else:
                    contribution = p * coalition_sum(a - 1, free)
                    for f in must_in:
                        phis[f] += contribution
                if must_out:
                    contribution = p * coalition_sum(a, free)
                    for f in must_out:
                        phis[f] -= contribution
                return

            f = node.feature_index
            x_left = x[f] <= node.threshold
            b_left = row[f] <= node.threshold
            had_state = f in state
            previous = state.get(f, (True, True))
            for child, direction_left in ((node.left, True), (node.right, False)):
                x_ok = previous[0] and (x_left == direction_left)
                b_ok = previous[1] and (b_left == direction_left)
                if not x_ok and not b_ok:
                    continue  # no coalition can route this way
                state[f] = (x_ok, b_ok)
                walk(child)
            if had_state:
                state[f] = previous
            else:
                del state[f]

        walk(0)

    count = len(rows)
    return FeatureAttribution(
        base_value=base / count,
        phis=tuple(phi / count for phi in phis),
        model_output=_leaf_probability(tree, x, class_idx),
        target_class=target_class,
        instance=x,
    )


def rank_features(
    attribution: FeatureAttribution,
    schema: FeatureSchema,
    k: int,
) -> list[tuple[str, Any, float]]:
    """Top-k (feature_name, raw_value, phi) by |phi|, ties by feature index."""
    if k < 1:
        raise ValueError("k must be at least 1")
    raws = decode(schema, attribution.instance)
    order = sorted(
        range(len(attribution.phis)),
        key=lambda i: (-abs(attribution.phis[i]), i),
    )
    names = schema.names()
    return [(names[i], raws[names[i]], attribution.phis[i]) for i in order[:k]]
