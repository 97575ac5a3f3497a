"""Shared fixtures: a reference profile, a small taxonomy, and a tiny catalog."""

from __future__ import annotations

import pytest

from mealmind.domain import (
    ActivityLevel,
    Diet,
    HealthGoal,
    MealSlot,
    NutritionFacts,
    Recipe,
    Sex,
    UserProfile,
)
from mealmind.rules import RulesConfig


@pytest.fixture
def reference_profile() -> UserProfile:
    """30-year-old vegetarian, 170 cm / 65 kg, dislikes mushrooms (BMR 1401.5)."""
    return UserProfile(
        id="u-mara",
        age=30,
        sex=Sex.FEMALE,
        height_cm=170.0,
        weight_kg=65.0,
        activity_level=ActivityLevel.SEDENTARY,
        diet=Diet.VEGETARIAN,
        health_goal=HealthGoal.MAINTENANCE,
        allergens=frozenset(),
        dislikes=frozenset({"mushroom"}),
        meal_slot=MealSlot.LUNCH,
    )


@pytest.fixture
def taxonomy() -> dict[str, frozenset[str]]:
    return {
        "meat": frozenset({"beef", "chicken", "pancetta", "bacon", "pork"}),
        "fish": frozenset({"salmon", "tuna", "anchovy"}),
        "dairy": frozenset({"milk", "cheese", "butter", "parmesan"}),
        "egg": frozenset({"egg", "eggs"}),
        "mushroom": frozenset({"mushroom", "shiitake", "portobello"}),
        "peanut": frozenset({"peanut", "peanuts"}),
        "gluten": frozenset({"wheat", "flour", "spaghetti", "bread"}),
    }


def make_recipe(
    recipe_id: str,
    name: str,
    ingredients: tuple[str, ...],
    calories: float,
    protein_g: float = 15.0,
    fat_g: float = 12.0,
    carbs_g: float = 60.0,
    fiber_g: float = 5.0,
    sugar_g: float = 6.0,
    sodium_mg: float = 500.0,
    prep_time_min: int = 30,
    rating: float = 4.2,
    rating_count: int = 100,
    seasonal: bool = False,
    cuisine: str | None = None,
) -> Recipe:
    return Recipe(
        id=recipe_id,
        name=name,
        ingredients=ingredients,
        nutrition=NutritionFacts(
            calories=calories,
            protein_g=protein_g,
            fat_g=fat_g,
            carbs_g=carbs_g,
            fiber_g=fiber_g,
            sugar_g=sugar_g,
            sodium_mg=sodium_mg,
        ),
        prep_time_min=prep_time_min,
        rating=rating,
        rating_count=rating_count,
        seasonal=seasonal,
        cuisine=cuisine,
    )


@pytest.fixture
def small_catalog() -> list[Recipe]:
    """Lunch-budget-friendly mix: vegetarian passes plus rule-violating recipes.

    The reference profile's lunch budget is 1401.5 * 1.2 * 0.35 = 588.63 kcal,
    so the tolerance band at 0.25 is roughly [441.5, 735.8].
    """
    return [
        make_recipe(
            "r-lentil",
            "Lentil Soup",
            ("lentils", "carrot", "onion", "olive oil"),
            calories=520.0,
            protein_g=18.0,
            fat_g=8.0,
            fiber_g=12.0,
            rating=4.6,
        ),
        make_recipe(
            "r-panzanella",
            "Tomato Panzanella",
            ("bread", "tomato", "basil", "olive oil"),
            calories=610.0,
            protein_g=10.0,
            fat_g=14.0,
            fiber_g=6.0,
            rating=4.1,
        ),
        make_recipe(
            "r-risotto",
            "Mushroom Risotto",
            ("rice", "mushroom", "parmesan", "butter"),
            calories=630.0,
            rating=4.8,
        ),
        make_recipe(
            "r-carbonara",
            "Spaghetti Carbonara",
            ("spaghetti", "pancetta", "egg", "parmesan"),
            calories=650.0,
            protein_g=24.0,
            rating=4.6,
        ),
        make_recipe(
            "r-salmon",
            "Seared Salmon Bowl",
            ("salmon", "rice", "avocado"),
            calories=580.0,
            protein_g=32.0,
            rating=4.7,
        ),
        make_recipe(
            "r-falafel",
            "Falafel Wrap",
            ("chickpeas", "flour", "tahini", "lettuce"),
            calories=560.0,
            protein_g=16.0,
            fiber_g=9.0,
            rating=4.3,
        ),
        make_recipe(
            "r-feast",
            "Holiday Feast Platter",
            ("potato", "gravy", "stuffing"),
            calories=1800.0,
            rating=4.9,
        ),
    ]


@pytest.fixture
def rules_config() -> RulesConfig:
    return RulesConfig()
