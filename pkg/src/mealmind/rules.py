"""Knowledge-based recommender: energy needs, exclusion rules, scoring, ranking.

Rules run in a fixed order (allergen, diet, dislike, calorie budget) so a
failing recipe always reports the same first violated rule. Everything is a
pure function over immutable inputs.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from .domain import ActivityLevel, Diet, EnergyNeeds, HealthGoal, MealSlot, Recipe, Sex, UserProfile

RULE_ALLERGEN = "R1_allergen"
RULE_DIET = "R2_diet"
RULE_DISLIKE = "R3_dislike"
RULE_CALORIES = "R4_calorie_budget"
ALL_RULES = (RULE_ALLERGEN, RULE_DIET, RULE_DISLIKE, RULE_CALORIES)

# Taxonomy categories excluded per diet, checked in this order.
DIET_EXCLUSIONS: dict[Diet, tuple[str, ...]] = {
    Diet.OMNIVORE: (),
    Diet.PESCATARIAN: ("meat",),
    Diet.VEGETARIAN: ("meat", "fish"),
    Diet.VEGAN: ("meat", "fish", "dairy", "egg"),
}

DEFAULT_ACTIVITY_MULTIPLIERS: dict[ActivityLevel, float] = {
    ActivityLevel.SEDENTARY: 1.2,
    ActivityLevel.LIGHT: 1.375,
    ActivityLevel.MODERATE: 1.55,
    ActivityLevel.ACTIVE: 1.725,
    ActivityLevel.VERY_ACTIVE: 1.9,
}

DEFAULT_MEAL_FRACTIONS: dict[MealSlot, float] = {
    MealSlot.BREAKFAST: 0.25,
    MealSlot.LUNCH: 0.35,
    MealSlot.DINNER: 0.30,
    MealSlot.SNACK: 0.10,
}


class RulesConfigError(ValueError):
    """Raised when a rules configuration violates its invariants."""


class TaxonomyError(KeyError):
    """Raised when a rule references a taxonomy category that is absent."""


@dataclass(frozen=True)
class RulesConfig:
    """Tunable knobs of the recommender; defaults follow common nutrition practice."""

    activity_multipliers: Mapping[ActivityLevel, float] = field(
        default_factory=lambda: dict(DEFAULT_ACTIVITY_MULTIPLIERS)
    )
    meal_fractions: Mapping[MealSlot, float] = field(
        default_factory=lambda: dict(DEFAULT_MEAL_FRACTIONS)
    )
    calorie_tolerance: float = 0.25
    rating_w: float = 0.4
    goal_w: float = 0.4
    calorie_fit_w: float = 0.2
    top_k: int = 5

    def __post_init__(self) -> None:
        for level, mult in self.activity_multipliers.items():
            if not 1.0 <= mult <= 2.5:
                raise RulesConfigError(f"activity multiplier for {level} outside [1.0, 2.5]")
        total = 0.0
        for slot, frac in self.meal_fractions.items():
            if not 0.0 < frac <= 1.0:
                raise RulesConfigError(f"meal fraction for {slot} outside (0, 1]")
            total += frac
        if total > 1.0 + 1e-9:
            raise RulesConfigError("meal fractions sum above 1.0")
        if not 0.0 <= self.calorie_tolerance:
            raise RulesConfigError("calorie_tolerance must be non-negative")
        weights = (self.rating_w, self.goal_w, self.calorie_fit_w)
        if any(w < 0 for w in weights):
            raise RulesConfigError("score weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise RulesConfigError("score weights must sum to 1")
        if self.top_k < 1:
            raise RulesConfigError("top_k must be at least 1")


@dataclass(frozen=True)
class Recommendation:
    recipe_id: str
    score: float
    rank: int
    passed_rules: tuple[str, ...]
    meal_budget_kcal: float

    def to_dict(self) -> dict:
        return {
            "recipe_id": self.recipe_id,
            "score": self.score,
            "rank": self.rank,
            "passed_rules": list(self.passed_rules),
            "meal_budget_kcal": self.meal_budget_kcal,
        }


STATUS_OK = "ok"
STATUS_NO_MATCH = "no_recipe_satisfies_rules"


@dataclass(frozen=True)
class RecommendResult:
    """Ranked recommendations plus a machine-readable status for the empty case."""

    recommendations: tuple[Recommendation, ...]
    status: str
    meal_budget_kcal: float


def bmr(profile: UserProfile) -> float:
    """Basal metabolic rate in kcal/day (Mifflin-St Jeor)."""
    sex_term = 5.0 if profile.sex is Sex.MALE else -161.0
    return 10.0 * profile.weight_kg + 6.25 * profile.height_cm - 5.0 * profile.age + sex_term


def energy_needs(
    profile: UserProfile,
    config: RulesConfig,
    meal_slot: MealSlot | None = None,
) -> EnergyNeeds:
    """Daily energy expenditure and the budget for one meal slot."""
    slot = meal_slot if meal_slot is not None else profile.meal_slot
    base = bmr(profile)
    tdee = base * config.activity_multipliers[profile.activity_level]
    return EnergyNeeds(
        bmr_kcal=base,
        tdee_kcal=tdee,
        meal_budget_kcal=tdee * config.meal_fractions[slot],
    )


def _matching_tokens(profile_tokens: frozenset[str], recipe: Recipe, taxonomy: Mapping[str, frozenset[str]]) -> str | None:
    """First profile token (sorted) that hits the recipe, directly or via taxonomy."""
    recipe_tokens = recipe.ingredient_tokens()
    for token in sorted(profile_tokens):
        if token in recipe_tokens:
            return token
        expansion = taxonomy.get(token)
        if expansion and expansion & recipe_tokens:
            return token
    return None


def apply_rules(
    profile: UserProfile,
    recipe: Recipe,
    needs: EnergyNeeds,
    taxonomy: Mapping[str, frozenset[str]],
    config: RulesConfig,
) -> str | None:
    """Return None if the recipe passes, else the name of the first violated rule."""
    if _matching_tokens(profile.allergens, recipe, taxonomy) is not None:
        return RULE_ALLERGEN

    excluded = DIET_EXCLUSIONS[profile.diet]
    if excluded:
        recipe_tokens = recipe.ingredient_tokens()
        for category in excluded:
            if category not in taxonomy:
                raise TaxonomyError(f"diet rule needs taxonomy category {category!r}")
            if taxonomy[category] & recipe_tokens:
                return RULE_DIET

    if _matching_tokens(profile.dislikes, recipe, taxonomy) is not None:
        return RULE_DISLIKE

    budget = needs.meal_budget_kcal
    tol = config.calorie_tolerance
    calories = recipe.nutrition.calories
    if not budget * (1.0 - tol) <= calories <= budget * (1.0 + tol):
        return RULE_CALORIES

    return None


def _clamp01(value: float) -> float:
    return max(0.0, min(1.0, value))


def goal_alignment(recipe: Recipe, goal: HealthGoal) -> float:
    """How well a recipe's macros serve the user's health goal, in [0, 1]."""
    n = recipe.nutrition
    if goal is HealthGoal.WEIGHT_LOSS:
        return _clamp01(n.fiber_g / 10.0) * 0.5 + _clamp01(1.0 - n.fat_g / 40.0) * 0.5
    if goal is HealthGoal.MUSCLE_GAIN:
        return _clamp01(n.protein_g / 40.0)
    return 0.5


def score_recipe(recipe: Recipe, profile: UserProfile, needs: EnergyNeeds, config: RulesConfig) -> float:
    """Weighted blend of rating, goal alignment, and calorie fit, clamped to [0, 1]."""
    budget = needs.meal_budget_kcal
    calorie_fit = 1.0 - abs(recipe.nutrition.calories - budget) / budget
    raw = (
        config.rating_w * (recipe.rating / 5.0)
        + config.goal_w * goal_alignment(recipe, profile.health_goal)
        + config.calorie_fit_w * calorie_fit
    )
    return _clamp01(raw)


def recommend(
    profile: UserProfile,
    catalog: Sequence[Recipe],
    taxonomy: Mapping[str, frozenset[str]],
    config: RulesConfig,
    meal_slot: MealSlot | None = None,
    top_k: int | None = None,
) -> RecommendResult:
    """Rank rule-passing recipes; empty survivor set yields a no-match status."""
    if not catalog:
        raise ValueError("catalog must be non-empty")
    needs = energy_needs(profile, config, meal_slot)
    k = top_k if top_k is not None else config.top_k

    scored: list[tuple[float, str, Recipe]] = []
    for recipe in catalog:
        if apply_rules(profile, recipe, needs, taxonomy, config) is None:
            scored.append((score_recipe(recipe, profile, needs, config), recipe.id, recipe))

    if not scored:
        return RecommendResult(
            recommendations=(),
            status=STATUS_NO_MATCH,
            meal_budget_kcal=needs.meal_budget_kcal,
        )

    scored.sort(key=lambda item: (-item[0], item[1]))
    recommendations = tuple(
        Recommendation(
            recipe_id=recipe_id,
            score=score,
            rank=rank,
            passed_rules=ALL_RULES,
            meal_budget_kcal=needs.meal_budget_kcal,
        )
        for rank, (score, recipe_id, _) in enumerate(scored[:k], start=1)
    )
    return RecommendResult(
        recommendations=recommendations,
        status=STATUS_OK,
        meal_budget_kcal=needs.meal_budget_kcal,
    )
