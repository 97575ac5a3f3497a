"""Catalog and profile loading, cleaning, schema building, and annotation.

Per-row faults never abort a catalog load; every dropped row lands in
exactly one drop_reasons bucket so the accounting invariant
rows_kept + sum(drop_reasons) == rows_read always holds.
"""

from __future__ import annotations

import csv
import json
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import rules
from .domain import (
    ActivityLevel,
    Diet,
    Feature,
    FeatureKind,
    FeatureSchema,
    FeatureVector,
    HealthGoal,
    MealSlot,
    NutritionFacts,
    Recipe,
    Sex,
    UserProfile,
    encode,
    validate_profile,
)

CATALOG_COLUMNS = [
    "recipe_id",
    "name",
    "ingredients",
    "calories",
    "protein_g",
    "fat_g",
    "carbs_g",
    "fiber_g",
    "sugar_g",
    "sodium_mg",
    "prep_time_min",
    "rating",
    "rating_count",
    "seasonal",
    "cuisine",
]

NUTRITION_COLUMNS = ["calories", "protein_g", "fat_g", "carbs_g", "fiber_g", "sugar_g", "sodium_mg"]

USER_BASE_FEATURES = ["age", "sex", "height_cm", "weight_kg", "activity_level", "diet", "health_goal", "bmr_kcal"]
RECIPE_FEATURES = [
    "calories",
    "protein_g",
    "fat_g",
    "carbs_g",
    "fiber_g",
    "sugar_g",
    "sodium_mg",
    "prep_time_min",
    "rating",
    "n_ingredients",
    "contains_meat",
    "seasonal",
]

MAX_USER_FEATURES = 12   # keeps the brute-force Shapley oracle fast and exact
FLAGS_PER_KIND = 3       # most frequent dislike/allergen tokens promoted to flags
DEFAULT_NEGATIVES_PER_PROFILE = 200

Taxonomy = dict[str, frozenset[str]]

DEFAULT_TAXONOMY: Taxonomy = {
    "meat": frozenset({"beef", "pork", "chicken", "turkey", "bacon", "pancetta", "ham", "lamb", "sausage"}),
    "fish": frozenset({"salmon", "tuna", "cod", "anchovy", "shrimp", "prawn", "sardine"}),
    "dairy": frozenset({"milk", "cheese", "butter", "cream", "yogurt", "parmesan", "mozzarella"}),
    "egg": frozenset({"egg", "eggs", "mayonnaise"}),
    "mushroom": frozenset({"mushroom", "mushrooms", "shiitake", "portobello", "porcini"}),
    "peanut": frozenset({"peanut", "peanuts"}),
    "gluten": frozenset({"wheat", "flour", "bread", "pasta", "spaghetti", "barley", "rye", "couscous"}),
}


class IngestError(ValueError):
    """Unreadable files, malformed headers, or invalid profile/taxonomy documents."""


@dataclass(frozen=True)
class CatalogStats:
    rows_read: int
    rows_kept: int
    drop_reasons: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rows_kept + sum(self.drop_reasons.values()) != self.rows_read:
            raise ValueError("catalog stats do not account for every input row")

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows_read": self.rows_read,
            "rows_kept": self.rows_kept,
            "drop_reasons": dict(sorted(self.drop_reasons.items())),
        }


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Read a category -> keyword-array document; keywords are lowercased."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestError(f"cannot read taxonomy file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestError(f"taxonomy file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or not data:
        raise IngestError("taxonomy must be a non-empty object of category -> keywords")
    taxonomy: Taxonomy = {}
    for category, keywords in data.items():
        if not isinstance(keywords, list) or not keywords:
            raise IngestError(f"taxonomy category {category!r} needs a non-empty keyword array")
        taxonomy[str(category).strip().lower()] = frozenset(
            str(k).strip().lower() for k in keywords
        )
    return taxonomy


def _parse_float(value: str) -> float | None:
    try:
        return float(value)
    except (TypeError, ValueError):
        return None


def _parse_seasonal(value: str) -> bool | None:
    lowered = value.strip().lower()
    if lowered in {"true", "1", "yes"}:
        return True
    if lowered in {"false", "0", "no"}:
        return False
    return None


def _clean_row(row: list[str], seen_ids: set[str]) -> Recipe | str:
    """Turn one CSV row into a Recipe or the first applicable drop reason."""
    if len(row) != len(CATALOG_COLUMNS):
        return "malformed_row"
    record = dict(zip(CATALOG_COLUMNS, row))

    prep_time = _parse_float(record["prep_time_min"])
    rating_count = _parse_float(record["rating_count"])
    seasonal = _parse_seasonal(record["seasonal"])
    if prep_time is None or prep_time < 0 or rating_count is None or rating_count < 0 or seasonal is None:
        return "malformed_row"

    recipe_id = record["recipe_id"].strip()
    if not recipe_id:
        return "missing_id"
    name = record["name"].strip()
    if not name:
        return "missing_name"

    nutrition_values: dict[str, float] = {}
    for column in NUTRITION_COLUMNS:
        value = _parse_float(record[column])
        if value is None:
            return "missing_nutrition"
        if value < 0:
            return "invalid_nutrition"
        nutrition_values[column] = value
    if nutrition_values["calories"] == 0:
        return "zero_nutrition"

    ingredients = tuple(
        token.strip().lower() for token in record["ingredients"].split("|") if token.strip()
    )
    if not ingredients:
        return "empty_ingredients"

    rating = _parse_float(record["rating"])
    if rating is None or not 0.0 <= rating <= 5.0:
        return "invalid_rating"
    if nutrition_values["calories"] > 5000:
        return "excess_calories"
    if recipe_id in seen_ids:
        return "duplicate_id"

    return Recipe(
        id=recipe_id,
        name=name,
        ingredients=ingredients,
        nutrition=NutritionFacts(**nutrition_values),
        prep_time_min=int(prep_time),
        rating=rating,
        rating_count=int(rating_count),
        seasonal=seasonal,
        cuisine=record["cuisine"].strip() or None,
    )


def load_catalog(path: str | Path) -> tuple[list[Recipe], CatalogStats]:
    """Load and clean a recipe catalog; row faults only increment drop counts."""
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read catalog file: {exc}") from exc

    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("catalog file is empty (no header row)") from None
        if header != CATALOG_COLUMNS:
            raise IngestError(
                f"malformed catalog header: expected {','.join(CATALOG_COLUMNS)}"
            )

        recipes: list[Recipe] = []
        seen_ids: set[str] = set()
        drop_reasons: dict[str, int] = {}
        rows_read = 0
        for row in reader:
            rows_read += 1
            outcome = _clean_row(row, seen_ids)
            if isinstance(outcome, Recipe):
                recipes.append(outcome)
                seen_ids.add(outcome.id)
            else:
                drop_reasons[outcome] = drop_reasons.get(outcome, 0) + 1

    stats = CatalogStats(rows_read=rows_read, rows_kept=len(recipes), drop_reasons=drop_reasons)
    return recipes, stats


def _format_number(value: float) -> str:
    if value == int(value):
        return str(int(value))
    return repr(value)


def write_catalog(recipes: Sequence[Recipe], path: str | Path) -> None:
    """Write a cleaned catalog that reloads with zero drops."""
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(CATALOG_COLUMNS)
        for r in recipes:
            n = r.nutrition
            writer.writerow(
                [
                    r.id,
                    r.name,
                    "|".join(r.ingredients),
                    _format_number(n.calories),
                    _format_number(n.protein_g),
                    _format_number(n.fat_g),
                    _format_number(n.carbs_g),
                    _format_number(n.fiber_g),
                    _format_number(n.sugar_g),
                    _format_number(n.sodium_mg),
                    str(r.prep_time_min),
                    _format_number(r.rating),
                    str(r.rating_count),
                    "true" if r.seasonal else "false",
                    r.cuisine or "",
                ]
            )


def load_profiles(path: str | Path) -> list[UserProfile]:
    """Read a JSON array of profile records; any invalid record fails the load."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestError(f"cannot read profiles file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestError(f"profiles file is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise IngestError("profiles file must hold a JSON array of profiles")
    profiles: list[UserProfile] = []
    for index, record in enumerate(data):
        report = validate_profile(record)
        if not report.ok:
            raise IngestError(f"profile #{index}: " + "; ".join(report.errors))
        profiles.append(report.profile)
    return profiles


def _top_tokens(profiles: Sequence[UserProfile], attribute: str, limit: int) -> list[str]:
    counts: dict[str, int] = {}
    for profile in profiles:
        for token in getattr(profile, attribute):
            counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts, key=lambda t: (-counts[t], t))
    return ranked[:limit]


def build_user_schema(profiles: Sequence[UserProfile]) -> FeatureSchema:
    """Demographics plus flag features for the most common dislike/allergen tokens.

    Dislike flags come before allergen flags; the total feature count is
    capped at MAX_USER_FEATURES so the coalition oracle stays exact.
    """
    if not profiles:
        raise IngestError("cannot build a user schema from zero profiles")

    features = [
        Feature("age", FeatureKind.NUMERIC),
        Feature("sex", FeatureKind.CATEGORICAL, tuple(sorted(m.value for m in Sex))),
        Feature("height_cm", FeatureKind.NUMERIC),
        Feature("weight_kg", FeatureKind.NUMERIC),
        Feature(
            "activity_level",
            FeatureKind.CATEGORICAL,
            tuple(sorted(m.value for m in ActivityLevel)),
        ),
        Feature("diet", FeatureKind.CATEGORICAL, tuple(sorted(m.value for m in Diet))),
        Feature(
            "health_goal", FeatureKind.CATEGORICAL, tuple(sorted(m.value for m in HealthGoal))
        ),
        Feature("bmr_kcal", FeatureKind.NUMERIC),
    ]
    flags = [f"dislikes_{t}" for t in _top_tokens(profiles, "dislikes", FLAGS_PER_KIND)]
    flags += [f"allergen_{t}" for t in _top_tokens(profiles, "allergens", FLAGS_PER_KIND)]
    for name in flags[: MAX_USER_FEATURES - len(features)]:
        features.append(Feature(name, FeatureKind.NUMERIC))
    return FeatureSchema(tuple(features))


def build_recipe_schema(catalog: Sequence[Recipe]) -> FeatureSchema:
    """Fixed numeric recipe features (flags rendered as 0/1)."""
    if not catalog:
        raise IngestError("cannot build a recipe schema from an empty catalog")
    return FeatureSchema(tuple(Feature(name, FeatureKind.NUMERIC) for name in RECIPE_FEATURES))


def profile_named_values(profile: UserProfile, schema: FeatureSchema) -> dict[str, Any]:
    """Raw named values for a profile against a user schema (flags as 0/1)."""
    values: dict[str, Any] = {
        "age": profile.age,
        "sex": profile.sex.value,
        "height_cm": profile.height_cm,
        "weight_kg": profile.weight_kg,
        "activity_level": profile.activity_level.value,
        "diet": profile.diet.value,
        "health_goal": profile.health_goal.value,
        "bmr_kcal": rules.bmr(profile),
    }
    for feature in schema.features:
        if feature.name.startswith("dislikes_"):
            values[feature.name] = 1.0 if feature.name[len("dislikes_"):] in profile.dislikes else 0.0
        elif feature.name.startswith("allergen_"):
            values[feature.name] = 1.0 if feature.name[len("allergen_"):] in profile.allergens else 0.0
    return values


def recipe_named_values(recipe: Recipe, taxonomy: Mapping[str, frozenset[str]]) -> dict[str, Any]:
    """Raw named values for a recipe; contains_meat uses the taxonomy."""
    n = recipe.nutrition
    meat_keywords = taxonomy.get("meat", frozenset())
    return {
        "calories": n.calories,
        "protein_g": n.protein_g,
        "fat_g": n.fat_g,
        "carbs_g": n.carbs_g,
        "fiber_g": n.fiber_g,
        "sugar_g": n.sugar_g,
        "sodium_mg": n.sodium_mg,
        "prep_time_min": recipe.prep_time_min,
        "rating": recipe.rating,
        "n_ingredients": len(recipe.ingredients),
        "contains_meat": 1.0 if meat_keywords & recipe.ingredient_tokens() else 0.0,
        "seasonal": 1.0 if recipe.seasonal else 0.0,
    }


def vectorize_profile(profile: UserProfile, schema: FeatureSchema) -> FeatureVector:
    return encode(schema, profile_named_values(profile, schema))


def vectorize_recipe(
    recipe: Recipe, schema: FeatureSchema, taxonomy: Mapping[str, frozenset[str]]
) -> FeatureVector:
    return encode(schema, recipe_named_values(recipe, taxonomy))


@dataclass(frozen=True)
class AnnotatedDataset:
    """(profile_vector, recipe_vector, label) rows for surrogate training."""

    user_schema: FeatureSchema
    recipe_schema: FeatureSchema
    rows: tuple[tuple[FeatureVector, FeatureVector, int], ...]

    def feature_names(self) -> list[str]:
        return self.user_schema.names() + self.recipe_schema.names()

    def combined_rows(self) -> list[tuple[FeatureVector, int]]:
        return [(u + r, label) for u, r, label in self.rows]


def annotate(
    profiles: Sequence[UserProfile],
    catalog: Sequence[Recipe],
    taxonomy: Mapping[str, frozenset[str]],
    rules_config: rules.RulesConfig,
    user_schema: FeatureSchema | None = None,
    recipe_schema: FeatureSchema | None = None,
    negatives_per_profile: int = DEFAULT_NEGATIVES_PER_PROFILE,
    seed: int = 42,
) -> AnnotatedDataset:
    """Label (profile, recipe) pairs by rule-engine top-k membership.

    Positives are the profile's ranked recommendations; negatives are a
    seeded uniform sample of the remaining catalog. Reruns are byte-identical.
    """
    if not profiles:
        raise IngestError("annotate needs at least one profile")
    if not catalog:
        raise IngestError("annotate needs a non-empty catalog")

    user_schema = user_schema or build_user_schema(profiles)
    recipe_schema = recipe_schema or build_recipe_schema(catalog)
    recipe_vectors = {r.id: vectorize_recipe(r, recipe_schema, taxonomy) for r in catalog}
    by_id = {r.id: r for r in catalog}

    rows: list[tuple[FeatureVector, FeatureVector, int]] = []
    for profile in profiles:
        user_vector = vectorize_profile(profile, user_schema)
        result = rules.recommend(profile, catalog, taxonomy, rules_config)
        recommended = [rec.recipe_id for rec in result.recommendations]
        for recipe_id in recommended:
            rows.append((user_vector, recipe_vectors[recipe_id], 1))

        others = sorted(set(by_id) - set(recommended))
        rng = random.Random(f"{seed}:{profile.id}")
        sample_size = min(negatives_per_profile, len(others))
        for recipe_id in rng.sample(others, sample_size):
            rows.append((user_vector, recipe_vectors[recipe_id], 0))

    return AnnotatedDataset(
        user_schema=user_schema, recipe_schema=recipe_schema, rows=tuple(rows)
    )


def save_dataset(dataset: AnnotatedDataset, path: str | Path) -> None:
    """CSV with one column per schema feature plus label; schemas in a sidecar."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(dataset.feature_names() + ["label"])
        for user_vec, recipe_vec, label in dataset.rows:
            writer.writerow(
                [_format_number(v) for v in user_vec + recipe_vec] + [str(label)]
            )
    sidecar = {
        "user_schema": dataset.user_schema.to_dict(),
        "recipe_schema": dataset.recipe_schema.to_dict(),
    }
    path.with_suffix(path.suffix + ".schema.json").write_text(
        json.dumps(sidecar), encoding="utf-8"
    )


def load_dataset(path: str | Path) -> AnnotatedDataset:
    """Read a dataset CSV; the sidecar restores schemas, else all-numeric."""
    path = Path(path)
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read dataset file: {exc}") from exc

    with handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError("dataset file is empty") from None
        if not header or header[-1] != "label":
            raise IngestError("dataset header must end with a label column")
        data_rows = [row for row in reader]

    sidecar_path = path.with_suffix(path.suffix + ".schema.json")
    if sidecar_path.exists():
        sidecar = json.loads(sidecar_path.read_text(encoding="utf-8"))
        user_schema = FeatureSchema.from_dict(sidecar["user_schema"])
        recipe_schema = FeatureSchema.from_dict(sidecar["recipe_schema"])
    else:
        names = header[:-1]
        split = len(names) - len(RECIPE_FEATURES) if len(names) > len(RECIPE_FEATURES) else len(names)
        user_schema = FeatureSchema(
            tuple(Feature(n, FeatureKind.NUMERIC) for n in names[:split])
        )
        recipe_schema = FeatureSchema(
            tuple(Feature(n, FeatureKind.NUMERIC) for n in names[split:])
        )

    expected = len(user_schema) + len(recipe_schema) + 1
    rows: list[tuple[FeatureVector, FeatureVector, int]] = []
    for line_no, row in enumerate(data_rows, start=2):
        if len(row) != expected:
            raise IngestError(f"dataset line {line_no}: expected {expected} columns")
        values = [float(v) for v in row[:-1]]
        rows.append(
            (
                tuple(values[: len(user_schema)]),
                tuple(values[len(user_schema):]),
                int(row[-1]),
            )
        )
    return AnnotatedDataset(user_schema=user_schema, recipe_schema=recipe_schema, rows=tuple(rows))
