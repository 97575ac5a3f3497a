"""Per-profile recommendation sessions: ranked recipes plus fitted surrogates.

The user-side tree learns which user attributes drive the choice among the
session's candidate recipes. Because one profile is a single point, it is
trained on a seeded neighborhood of perturbed profiles, each labeled with
its own top choice among the candidates. The recipe-side tree learns
recommended-vs-not over the candidate set plus sampled non-candidates.
"""

from __future__ import annotations

import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Any

from . import rules, tree
from .domain import (
    ActivityLevel,
    Diet,
    FeatureSchema,
    FeatureVector,
    HealthGoal,
    MealSlot,
    Recipe,
    Sex,
    UserProfile,
)
from .ingest import (
    annotate,
    build_recipe_schema,
    build_user_schema,
    vectorize_profile,
    vectorize_recipe,
)

NONE_CLASS = "__none__"
MAX_CANDIDATE_CLASSES = 10


@dataclass(frozen=True)
class SessionConfig:
    neighborhood_size: int = 200
    negatives_per_profile: int = 200
    background_size: int = 100
    seed: int = 42
    global_tree: bool = False


class NoRecommendationError(RuntimeError):
    """No recipe satisfies the rules for this profile."""


@dataclass(frozen=True)
class Session:
    """Immutable snapshot; re-recommendation builds a new session."""

    profile: UserProfile
    meal_slot: MealSlot
    top_k: int
    meal_budget_kcal: float
    recommendations: tuple[rules.Recommendation, ...]
    candidates: tuple[Recipe, ...]
    candidate_vectors: Mapping[str, FeatureVector]
    user_schema: FeatureSchema
    recipe_schema: FeatureSchema
    user_tree: tree.DecisionTree
    recipe_tree: tree.DecisionTree
    user_vector: FeatureVector
    user_background: tuple[FeatureVector, ...]
    recipe_background: tuple[FeatureVector, ...]
    _by_id: dict[str, Recipe] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_by_id", {r.id: r for r in self.candidates})

    def candidate(self, recipe_id: str) -> Recipe | None:
        return self._by_id.get(recipe_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "profile": self.profile.to_dict(),
            "meal_slot": self.meal_slot.value,
            "top_k": self.top_k,
            "meal_budget_kcal": self.meal_budget_kcal,
            "recommendations": [r.to_dict() for r in self.recommendations],
            "candidates": [r.to_dict() for r in self.candidates],
            "candidate_vectors": {k: list(v) for k, v in self.candidate_vectors.items()},
            "user_schema": self.user_schema.to_dict(),
            "recipe_schema": self.recipe_schema.to_dict(),
            "user_tree": self.user_tree.to_dict(),
            "recipe_tree": self.recipe_tree.to_dict(),
            "user_vector": list(self.user_vector),
            "user_background": [list(row) for row in self.user_background],
            "recipe_background": [list(row) for row in self.recipe_background],
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Session:
        from .domain import NutritionFacts, validate_profile

        profile = validate_profile(data["profile"]).profile
        candidates = tuple(
            Recipe(
                id=r["id"],
                name=r["name"],
                ingredients=tuple(r["ingredients"]),
                nutrition=NutritionFacts(**r["nutrition"]),
                prep_time_min=r["prep_time_min"],
                rating=r["rating"],
                rating_count=r["rating_count"],
                seasonal=r["seasonal"],
                cuisine=r.get("cuisine"),
            )
            for r in data["candidates"]
        )
        return cls(
            profile=profile,
            meal_slot=MealSlot(data["meal_slot"]),
            top_k=data["top_k"],
            meal_budget_kcal=data["meal_budget_kcal"],
            recommendations=tuple(
                rules.Recommendation(
                    recipe_id=r["recipe_id"],
                    score=r["score"],
                    rank=r["rank"],
                    passed_rules=tuple(r["passed_rules"]),
                    meal_budget_kcal=r["meal_budget_kcal"],
                )
                for r in data["recommendations"]
            ),
            candidates=candidates,
            candidate_vectors={
                k: tuple(v) for k, v in data["candidate_vectors"].items()
            },
            user_schema=FeatureSchema.from_dict(data["user_schema"]),
            recipe_schema=FeatureSchema.from_dict(data["recipe_schema"]),
            user_tree=tree.DecisionTree.from_dict(data["user_tree"]),
            recipe_tree=tree.DecisionTree.from_dict(data["recipe_tree"]),
            user_vector=tuple(data["user_vector"]),
            user_background=tuple(tuple(row) for row in data["user_background"]),
            recipe_background=tuple(tuple(row) for row in data["recipe_background"]),
        )


def _clamp(value: float, low: float, high: float) -> float:
    return max(low, min(high, value))


def _toggle(tokens: frozenset[str], token: str) -> frozenset[str]:
    if token in tokens:
        return tokens - {token}
    return tokens | {token}


def perturb_profile(
    profile: UserProfile, schema: FeatureSchema, rng: random.Random
) -> UserProfile:
    """One neighbor: jittered numerics, occasionally resampled categoricals/flags."""
    variant = replace(
        profile,
        age=int(_clamp(profile.age + rng.randint(-12, 12), 13, 120)),
        height_cm=_clamp(profile.height_cm + rng.uniform(-12.0, 12.0), 51.0, 272.0),
        weight_kg=_clamp(profile.weight_kg + rng.uniform(-12.0, 12.0), 21.0, 400.0),
    )
    if rng.random() < 0.2:
        variant = replace(
            variant, sex=Sex.MALE if variant.sex is Sex.FEMALE else Sex.FEMALE
        )
    if rng.random() < 0.35:
        variant = replace(variant, activity_level=rng.choice(list(ActivityLevel)))
    if rng.random() < 0.35:
        variant = replace(variant, diet=rng.choice(list(Diet)))
    if rng.random() < 0.35:
        variant = replace(variant, health_goal=rng.choice(list(HealthGoal)))
    dislikes, allergens = variant.dislikes, variant.allergens
    for feature in schema.features:
        if feature.name.startswith("dislikes_") and rng.random() < 0.3:
            dislikes = _toggle(dislikes, feature.name[len("dislikes_"):])
        elif feature.name.startswith("allergen_") and rng.random() < 0.3:
            allergens = _toggle(allergens, feature.name[len("allergen_"):])
    return replace(variant, dislikes=dislikes, allergens=allergens)


def _top_choice_label(
    profile: UserProfile,
    candidates: Sequence[Recipe],
    taxonomy: Mapping[str, frozenset[str]],
    rules_config: rules.RulesConfig,
    meal_slot: MealSlot,
) -> str:
    result = rules.recommend(
        profile, candidates, taxonomy, rules_config, meal_slot=meal_slot, top_k=1
    )
    if result.recommendations:
        return result.recommendations[0].recipe_id
    return NONE_CLASS


def _sample_background(
    rows: Sequence[FeatureVector], size: int, rng: random.Random
) -> tuple[FeatureVector, ...]:
    unique = sorted(set(rows))
    if len(unique) <= size:
        return tuple(unique)
    return tuple(rng.sample(unique, size))


def build_session(
    profile: UserProfile,
    catalog: Sequence[Recipe],
    taxonomy: Mapping[str, frozenset[str]],
    rules_config: rules.RulesConfig,
    train_config: tree.TrainConfig | None = None,
    session_config: SessionConfig | None = None,
    meal_slot: MealSlot | None = None,
    top_k: int | None = None,
    stored_profiles: Sequence[UserProfile] = (),
) -> Session:
    """Recommend, then fit both surrogate trees and their background sets.

    Raises NoRecommendationError when no recipe passes the rules. With
    global_tree set, training pools the stored profile population instead of
    relying on the perturbation neighborhood alone.
    """
    train_config = train_config or tree.TrainConfig()
    config = session_config or SessionConfig()
    slot = meal_slot if meal_slot is not None else profile.meal_slot

    result = rules.recommend(
        profile, catalog, taxonomy, rules_config, meal_slot=slot, top_k=top_k
    )
    if not result.recommendations:
        raise NoRecommendationError(rules.STATUS_NO_MATCH)

    by_id = {r.id: r for r in catalog}
    candidate_ids = [r.recipe_id for r in result.recommendations[:MAX_CANDIDATE_CLASSES]]
    candidates = tuple(by_id[recipe_id] for recipe_id in candidate_ids)

    schema_profiles: list[UserProfile] = [profile]
    if config.global_tree:
        schema_profiles += [p for p in stored_profiles if p.id != profile.id]
    user_schema = build_user_schema(schema_profiles)
    recipe_schema = build_recipe_schema(catalog)

    # User tree: neighborhood (plus stored population in global mode) labeled
    # with each variant's own top choice among this session's candidates.
    rng = random.Random(f"{config.seed}:{profile.id}:neighborhood")
    variants = [profile] + [
        perturb_profile(profile, user_schema, rng) for _ in range(config.neighborhood_size)
    ]
    if config.global_tree:
        variants += [p for p in stored_profiles if p.id != profile.id]
    user_rows = [vectorize_profile(p, user_schema) for p in variants]
    user_labels = [
        _top_choice_label(p, candidates, taxonomy, rules_config, slot) for p in variants
    ]
    user_tree = tree.fit(
        user_rows,
        user_labels,
        user_schema,
        train_config,
        classes=candidate_ids + [NONE_CLASS],
    )

    # Recipe tree: recommended-vs-not over candidates plus sampled others.
    dataset_profiles = [profile]
    if config.global_tree:
        dataset_profiles += [p for p in stored_profiles if p.id != profile.id]
    dataset = annotate(
        dataset_profiles,
        catalog,
        taxonomy,
        rules_config,
        user_schema=user_schema,
        recipe_schema=recipe_schema,
        negatives_per_profile=config.negatives_per_profile,
        seed=config.seed,
    )
    recipe_rows = [row for _, row, _ in dataset.rows]
    recipe_labels = [label for _, _, label in dataset.rows]
    recipe_tree = tree.fit(
        recipe_rows, recipe_labels, recipe_schema, train_config, classes=[0, 1]
    )

    bg_rng = random.Random(f"{config.seed}:{profile.id}:background")
    return Session(
        profile=profile,
        meal_slot=slot,
        top_k=top_k if top_k is not None else rules_config.top_k,
        meal_budget_kcal=result.meal_budget_kcal,
        recommendations=result.recommendations,
        candidates=candidates,
        candidate_vectors={
            r.id: vectorize_recipe(r, recipe_schema, taxonomy) for r in candidates
        },
        user_schema=user_schema,
        recipe_schema=recipe_schema,
        user_tree=user_tree,
        recipe_tree=recipe_tree,
        user_vector=vectorize_profile(profile, user_schema),
        user_background=_sample_background(user_rows, config.background_size, bg_rng),
        recipe_background=_sample_background(recipe_rows, config.background_size, bg_rng),
    )
