"""Shared domain types: user profiles, recipes, feature schemas, and label encoding.

Everything here is immutable after construction and safe to share across
threads. Categorical values are encoded by lexicographic index so the
encoding never depends on catalog order.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import Any


class Sex(str, Enum):
    FEMALE = "female"
    MALE = "male"


class ActivityLevel(str, Enum):
    SEDENTARY = "sedentary"
    LIGHT = "light"
    MODERATE = "moderate"
    ACTIVE = "active"
    VERY_ACTIVE = "very_active"


class Diet(str, Enum):
    OMNIVORE = "omnivore"
    PESCATARIAN = "pescatarian"
    VEGETARIAN = "vegetarian"
    VEGAN = "vegan"


class HealthGoal(str, Enum):
    WEIGHT_LOSS = "weight_loss"
    MAINTENANCE = "maintenance"
    MUSCLE_GAIN = "muscle_gain"


class MealSlot(str, Enum):
    BREAKFAST = "breakfast"
    LUNCH = "lunch"
    DINNER = "dinner"
    SNACK = "snack"


AGE_RANGE = (13, 120)
HEIGHT_RANGE_CM = (50.0, 272.0)   # exclusive lower bound
WEIGHT_RANGE_KG = (20.0, 400.0)   # exclusive lower bound
MAX_CALORIES = 5000.0


@dataclass(frozen=True)
class UserProfile:
    """Demographic, dietary, and preference attributes of one user."""

    id: str
    age: int
    sex: Sex
    height_cm: float
    weight_kg: float
    activity_level: ActivityLevel
    diet: Diet
    health_goal: HealthGoal
    allergens: frozenset[str] = frozenset()
    dislikes: frozenset[str] = frozenset()
    meal_slot: MealSlot = MealSlot.LUNCH

    def to_dict(self) -> dict[str, Any]:
        """Canonical flat record; token sets become sorted string arrays."""
        return {
            "id": self.id,
            "age": self.age,
            "sex": self.sex.value,
            "height_cm": self.height_cm,
            "weight_kg": self.weight_kg,
            "activity_level": self.activity_level.value,
            "diet": self.diet.value,
            "health_goal": self.health_goal.value,
            "allergens": sorted(self.allergens),
            "dislikes": sorted(self.dislikes),
            "meal_slot": self.meal_slot.value,
        }


@dataclass(frozen=True)
class NutritionFacts:
    """Per-serving nutrition. A record missing any field is invalid upstream."""

    calories: float
    protein_g: float
    fat_g: float
    carbs_g: float
    fiber_g: float
    sugar_g: float
    sodium_mg: float

    def to_dict(self) -> dict[str, float]:
        return {
            "calories": self.calories,
            "protein_g": self.protein_g,
            "fat_g": self.fat_g,
            "carbs_g": self.carbs_g,
            "fiber_g": self.fiber_g,
            "sugar_g": self.sugar_g,
            "sodium_mg": self.sodium_mg,
        }


@dataclass(frozen=True)
class Recipe:
    """A cleaned recipe with per-serving nutrition and catalog metadata."""

    id: str
    name: str
    ingredients: tuple[str, ...]
    nutrition: NutritionFacts
    prep_time_min: int
    rating: float
    rating_count: int
    seasonal: bool
    cuisine: str | None = None

    def ingredient_tokens(self) -> frozenset[str]:
        """Lowercase single-word tokens; multi-word ingredients split on whitespace."""
        tokens: set[str] = set()
        for ingredient in self.ingredients:
            tokens.update(ingredient.lower().split())
        return frozenset(tokens)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "ingredients": list(self.ingredients),
            "nutrition": self.nutrition.to_dict(),
            "prep_time_min": self.prep_time_min,
            "rating": self.rating,
            "rating_count": self.rating_count,
            "seasonal": self.seasonal,
            "cuisine": self.cuisine,
        }


@dataclass(frozen=True)
class EnergyNeeds:
    """Daily energy requirement and the share allotted to one meal."""

    bmr_kcal: float
    tdee_kcal: float
    meal_budget_kcal: float


class FeatureKind(str, Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class Feature:
    """One schema entry; categorical codes are lexicographically sorted."""

    name: str
    kind: FeatureKind
    category_codes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind is FeatureKind.CATEGORICAL:
            if not self.category_codes:
                raise ValueError(f"categorical feature {self.name!r} needs category codes")
            if list(self.category_codes) != sorted(self.category_codes):
                raise ValueError(f"category codes of {self.name!r} must be sorted")
        elif self.category_codes:
            raise ValueError(f"numeric feature {self.name!r} cannot carry category codes")


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature list; a vector is valid only against its schema."""

    features: tuple[Feature, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        object.__setattr__(self, "_index", {name: i for i, name in enumerate(names)})

    def __len__(self) -> int:
        return len(self.features)

    def names(self) -> list[str]:
        return [f.name for f in self.features]

    def index_of(self, name: str) -> int:
        return self._index[name]

    def validate_vector(self, vector: Sequence[float]) -> None:
        """Raise SchemaError unless vector length and categorical codes fit."""
        if len(vector) != len(self.features):
            raise SchemaError(
                f"vector length {len(vector)} does not match schema length {len(self.features)}"
            )
        for feature, value in zip(self.features, vector):
            if feature.kind is FeatureKind.CATEGORICAL:
                if value != int(value) or not 0 <= int(value) < len(feature.category_codes):
                    raise SchemaError(
                        f"feature {feature.name!r}: code {value!r} outside "
                        f"[0, {len(feature.category_codes)})"
                    )

    def to_dict(self) -> dict[str, Any]:
        return {
            "features": [
                {
                    "name": f.name,
                    "kind": f.kind.value,
                    "category_codes": list(f.category_codes),
                }
                for f in self.features
            ]
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> FeatureSchema:
        return cls(
            features=tuple(
                Feature(
                    name=entry["name"],
                    kind=FeatureKind(entry["kind"]),
                    category_codes=tuple(entry.get("category_codes", ())),
                )
                for entry in data["features"]
            )
        )


FeatureVector = tuple[float, ...]


class EncodingError(ValueError):
    """Raised on unknown categories, missing features, or bad codes."""


class SchemaError(ValueError):
    """Raised when a vector does not fit its schema."""


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validate_profile: a normalized profile or every violation."""

    profile: UserProfile | None
    errors: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.profile is not None


def _normalize_tokens(raw: Any) -> frozenset[str]:
    if raw is None:
        return frozenset()
    if isinstance(raw, str):
        raw = [raw]
    return frozenset(token.strip().lower() for token in raw if str(token).strip())


def _parse_enum(kind: type[Enum], value: Any, field_name: str, errors: list[str]) -> Any:
    if isinstance(value, kind):
        return value
    try:
        return kind(str(value).strip().lower())
    except ValueError:
        allowed = ", ".join(member.value for member in kind)
        errors.append(f"{field_name} must be one of: {allowed} (got {value!r})")
        return None


def validate_profile(raw: UserProfile | Mapping[str, Any]) -> ValidationReport:
    """Normalize a profile or report every violated invariant.

    Never raises: each invalid field contributes exactly one report entry.
    Token sets are lowercased, trimmed, and deduplicated.
    """
    data: dict[str, Any]
    if isinstance(raw, UserProfile):
        data = raw.to_dict()
    else:
        data = dict(raw)

    errors: list[str] = []

    profile_id = str(data.get("id") or "").strip()
    if not profile_id:
        errors.append("id must be a non-empty string")

    age: int | None = None
    try:
        age = int(data["age"])
    except (KeyError, TypeError, ValueError):
        errors.append("age must be an integer")
    if age is not None and not AGE_RANGE[0] <= age <= AGE_RANGE[1]:
        errors.append(f"age out of range [{AGE_RANGE[0]}, {AGE_RANGE[1]}]")
        age = None

    height: float | None = None
    try:
        height = float(data["height_cm"])
    except (KeyError, TypeError, ValueError):
        errors.append("height_cm must be a number")
    if height is not None and not HEIGHT_RANGE_CM[0] < height <= HEIGHT_RANGE_CM[1]:
        errors.append(f"height_cm out of range ({HEIGHT_RANGE_CM[0]}, {HEIGHT_RANGE_CM[1]}]")
        height = None

    weight: float | None = None
    try:
        weight = float(data["weight_kg"])
    except (KeyError, TypeError, ValueError):
        errors.append("weight_kg must be a number")
    if weight is not None and not WEIGHT_RANGE_KG[0] < weight <= WEIGHT_RANGE_KG[1]:
        errors.append(f"weight_kg out of range ({WEIGHT_RANGE_KG[0]}, {WEIGHT_RANGE_KG[1]}]")
        weight = None

    sex = _parse_enum(Sex, data.get("sex"), "sex", errors)
    activity = _parse_enum(ActivityLevel, data.get("activity_level"), "activity_level", errors)
    diet = _parse_enum(Diet, data.get("diet"), "diet", errors)
    goal = _parse_enum(HealthGoal, data.get("health_goal"), "health_goal", errors)
    slot = _parse_enum(MealSlot, data.get("meal_slot", MealSlot.LUNCH), "meal_slot", errors)

    allergens = _normalize_tokens(data.get("allergens"))
    dislikes = _normalize_tokens(data.get("dislikes"))

    if errors:
        return ValidationReport(profile=None, errors=tuple(errors))

    return ValidationReport(
        profile=UserProfile(
            id=profile_id,
            age=age,
            sex=sex,
            height_cm=height,
            weight_kg=weight,
            activity_level=activity,
            diet=diet,
            health_goal=goal,
            allergens=allergens,
            dislikes=dislikes,
            meal_slot=slot,
        )
    )


def encode(schema: FeatureSchema, named_values: Mapping[str, Any]) -> FeatureVector:
    """Map raw named values onto a vector aligned with the schema.

    Numeric values pass through; categorical values become their index in
    the sorted category list.
    """
    values: list[float] = []
    for feature in schema.features:
        if feature.name not in named_values:
            raise EncodingError(f"missing feature {feature.name!r}")
        raw = named_values[feature.name]
        if feature.kind is FeatureKind.NUMERIC:
            try:
                values.append(float(raw))
            except (TypeError, ValueError):
                raise EncodingError(
                    f"feature {feature.name!r}: non-numeric value {raw!r}"
                ) from None
        else:
            label = str(raw)
            try:
                values.append(float(feature.category_codes.index(label)))
            except ValueError:
                raise EncodingError(
                    f"feature {feature.name!r}: unknown category {label!r}"
                ) from None
    return tuple(values)


def decode(schema: FeatureSchema, vector: Sequence[float]) -> dict[str, Any]:
    """Invert encode: decode(schema, encode(schema, m)) == m for valid m."""
    if len(vector) != len(schema.features):
        raise EncodingError(
            f"vector length {len(vector)} does not match schema length {len(schema.features)}"
        )
    out: dict[str, Any] = {}
    for feature, value in zip(schema.features, vector):
        if feature.kind is FeatureKind.NUMERIC:
            out[feature.name] = value
        else:
            code = int(value)
            if code != value or not 0 <= code < len(feature.category_codes):
                raise EncodingError(
                    f"feature {feature.name!r}: code {value!r} outside "
                    f"[0, {len(feature.category_codes)})"
                )
            out[feature.name] = feature.category_codes[code]
    return out
