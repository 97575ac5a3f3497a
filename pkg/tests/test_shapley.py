"""Shapley attribution: axiom checks, oracle equivalence, ranking."""

from __future__ import annotations

import random

import pytest

from mealmind.domain import Feature, FeatureKind, FeatureSchema
from mealmind.shapley import (
    BackgroundSet,
    FeatureAttribution,
    rank_features,
    shap_bruteforce,
    shap_tree,
)
from mealmind.tree import DecisionTree, TrainConfig, TreeNode, fit


def numeric_schema(n: int) -> FeatureSchema:
    return FeatureSchema(tuple(Feature(f"f{i}", FeatureKind.NUMERIC) for i in range(n)))


def leaf(cover: int, counts: tuple[int, ...]) -> TreeNode:
    return TreeNode(cover=cover, class_counts=counts)


def split(cover: int, feature: int, threshold: float, left: int, right: int) -> TreeNode:
    return TreeNode(cover=cover, feature_index=feature, threshold=threshold, left=left, right=right)


@pytest.fixture
def stump() -> DecisionTree:
    """x0 <= 0.5 -> class 0 leaf, else class 1 leaf (both pure)."""
    return DecisionTree(
        nodes=(split(2, 0, 0.5, 1, 2), leaf(1, (1, 0)), leaf(1, (0, 1))),
        schema=numeric_schema(1),
        classes=(0, 1),
    )


@pytest.fixture
def and_tree() -> DecisionTree:
    """Outputs class 1 iff x0 > 0.5 and x1 > 0.5."""
    return DecisionTree(
        nodes=(
            split(4, 0, 0.5, 1, 2),
            leaf(2, (2, 0)),
            split(2, 1, 0.5, 3, 4),
            leaf(1, (1, 0)),
            leaf(1, (0, 1)),
        ),
        schema=numeric_schema(2),
        classes=(0, 1),
    )


def assert_close(left, right, tol=1e-9):
    assert abs(left - right) <= tol


class TestBruteforce:
    def test_constant_tree_gives_zero_phis(self):
        tree = DecisionTree(
            nodes=(leaf(4, (3, 1)),), schema=numeric_schema(2), classes=(0, 1)
        )
        attr = shap_bruteforce(tree, (1.0, 2.0), [(0.0, 0.0)], 0)
        assert attr.phis == (0.0, 0.0)
        assert attr.base_value == 0.75
        assert attr.model_output == 0.75

    def test_stump_attributes_everything_to_its_feature(self, stump):
        attr = shap_bruteforce(stump, (1.0,), [(0.0,)], 1)
        assert attr.base_value == 0.0
        assert_close(attr.phis[0], 1.0)

    def test_and_game_splits_credit_evenly(self, and_tree):
        attr = shap_bruteforce(and_tree, (1.0, 1.0), [(0.0, 0.0)], 1)
        assert attr.base_value == 0.0
        assert_close(attr.phis[0], 0.5)
        assert_close(attr.phis[1], 0.5)

    def test_feature_cap(self):
        tree = DecisionTree(
            nodes=(leaf(1, (1,)),), schema=numeric_schema(17), classes=(0,)
        )
        x = tuple(0.0 for _ in range(17))
        with pytest.raises(ValueError, match="16"):
            shap_bruteforce(tree, x, [x], 0)


class TestTreeAlgorithm:
    def test_efficiency_on_fixture_trees(self, stump, and_tree):
        for tree, x, bg in (
            (stump, (0.3,), [(0.9,), (0.1,)]),
            (and_tree, (1.0, 0.0), [(0.0, 1.0), (1.0, 1.0)]),
        ):
            attr = shap_tree(tree, x, bg, 1)
            assert_close(attr.base_value + sum(attr.phis), attr.model_output)

    def test_unused_feature_gets_exactly_zero(self, stump):
        padded = DecisionTree(
            nodes=stump.nodes, schema=numeric_schema(2), classes=(0, 1)
        )
        attr = shap_tree(padded, (1.0, 5.0), [(0.0, -3.0)], 1)
        assert attr.phis[1] == 0.0

    def test_symmetric_features_get_equal_phi(self):
        # OR-like tree mirrored in both features; x and background identical
        # per coordinate, so symmetry forces equal attribution.
        tree = DecisionTree(
            nodes=(
                split(4, 0, 0.5, 1, 2),
                split(2, 1, 0.5, 3, 4),
                split(2, 1, 0.5, 5, 6),
                leaf(1, (1, 0)),
                leaf(1, (0, 1)),
                leaf(1, (0, 1)),
                leaf(1, (0, 1)),
            ),
            schema=numeric_schema(2),
            classes=(0, 1),
        )
        attr = shap_tree(tree, (1.0, 1.0), [(0.0, 0.0)], 1)
        assert abs(attr.phis[0] - attr.phis[1]) <= 1e-12

    def test_singleton_background_base_is_background_prediction(self, and_tree):
        background = (0.0, 1.0)
        attr = shap_tree(and_tree, (1.0, 1.0), [background], 1)
        assert attr.base_value == and_tree.predict_proba(background)[1]

    def test_linearity_in_leaf_values(self):
        structure = (split(4, 0, 0.5, 1, 2),)

        def with_leaves(counts_left, counts_right):
            return DecisionTree(
                nodes=structure + (leaf(4, counts_left), leaf(4, counts_right)),
                schema=numeric_schema(1),
                classes=(0, 1),
            )

        tree_a = with_leaves((1, 3), (3, 1))
        tree_b = with_leaves((3, 1), (1, 3))
        tree_mix = with_leaves((2, 2), (2, 2))  # leaf probs average a and b
        x, bg = (1.0,), [(0.0,), (0.8,)]
        attr_a = shap_tree(tree_a, x, bg, 1)
        attr_b = shap_tree(tree_b, x, bg, 1)
        attr_mix = shap_tree(tree_mix, x, bg, 1)
        for mixed, a, b in zip(attr_mix.phis, attr_a.phis, attr_b.phis):
            assert_close(mixed, (a + b) / 2.0)
        assert_close(attr_mix.base_value, (attr_a.base_value + attr_b.base_value) / 2.0)

    def test_oracle_equivalence_randomized(self):
        rng = random.Random(20240901)
        for _ in range(40):
            n_feat = rng.randint(1, 8)
            schema = numeric_schema(n_feat)
            rows = [
                tuple(rng.choice([0.0, 0.5, 1.0]) for _ in range(n_feat))
                for _ in range(rng.randint(4, 30))
            ]
            labels = [rng.randint(0, 2) for _ in rows]
            config = TrainConfig(
                max_depth=rng.choice([2, 3, None]), min_samples_split=2, min_gain=0.0
            )
            tree = fit(rows, labels, schema, config)
            x = tuple(rng.random() for _ in range(n_feat))
            bg = [tuple(rng.random() for _ in range(n_feat)) for _ in range(rng.randint(1, 5))]
            target = rng.choice(tree.classes)
            fast = shap_tree(tree, x, bg, target)
            slow = shap_bruteforce(tree, x, bg, target)
            for a, b in zip(fast.phis, slow.phis):
                assert_close(a, b)
            assert_close(fast.base_value, slow.base_value)
            assert_close(fast.model_output, slow.model_output)

    def test_unknown_target_class_rejected(self, stump):
        with pytest.raises(KeyError):
            shap_tree(stump, (0.0,), [(0.0,)], "missing")

    def test_background_set_wrapper_accepted(self, stump):
        wrapped = BackgroundSet(rows=((0.0,),))
        assert shap_tree(stump, (1.0,), wrapped, 1) == shap_bruteforce(stump, (1.0,), wrapped, 1)

    def test_empty_background_rejected(self):
        with pytest.raises(ValueError):
            BackgroundSet(rows=())


class TestRankFeatures:
    def make_attr(self, phis):
        return FeatureAttribution(
            base_value=0.0,
            phis=tuple(phis),
            model_output=sum(phis),
            target_class=1,
            instance=tuple(float(i) for i in range(len(phis))),
        )

    def test_illustrative_triple_orders_by_magnitude(self):
        schema = numeric_schema(3)
        ranked = rank_features(self.make_attr([0.5, 0.2, 0.3]), schema, 2)
        assert [name for name, _, _ in ranked] == ["f0", "f2"]
        assert [phi for _, _, phi in ranked] == [0.5, 0.3]

    def test_zero_phis_tie_break_by_index(self):
        schema = numeric_schema(4)
        ranked = rank_features(self.make_attr([0.0, 0.0, 0.0, 0.0]), schema, 3)
        assert [name for name, _, _ in ranked] == ["f0", "f1", "f2"]

    def test_k_beyond_feature_count_returns_all(self):
        schema = numeric_schema(2)
        assert len(rank_features(self.make_attr([0.1, -0.4]), schema, 10)) == 2

    def test_raw_values_come_from_decode(self):
        schema = FeatureSchema(
            (
                Feature("diet", FeatureKind.CATEGORICAL, ("omnivore", "vegan")),
                Feature("age", FeatureKind.NUMERIC),
            )
        )
        attr = FeatureAttribution(
            base_value=0.0, phis=(0.9, 0.1), model_output=1.0, target_class=1,
            instance=(1.0, 31.0),
        )
        ranked = rank_features(attr, schema, 2)
        assert ranked[0] == ("diet", "vegan", 0.9)
        assert ranked[1] == ("age", 31.0, 0.1)

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError):
            rank_features(self.make_attr([0.1]), numeric_schema(1), 0)
