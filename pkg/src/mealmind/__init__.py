"""mealmind: explainable food recommendation with exact Shapley attributions."""

__version__ = "0.1.0"

from .domain import (
    ActivityLevel,
    Diet,
    EnergyNeeds,
    Feature,
    FeatureKind,
    FeatureSchema,
    HealthGoal,
    MealSlot,
    NutritionFacts,
    Recipe,
    Sex,
    UserProfile,
    decode,
    encode,
    validate_profile,
)
from .rules import Recommendation, RecommendResult, RulesConfig, apply_rules, bmr, energy_needs, recommend
from .shapley import BackgroundSet, FeatureAttribution, rank_features, shap_bruteforce, shap_tree
from .tree import DecisionTree, TrainConfig, fidelity, fit

__all__ = [
    "ActivityLevel",
    "BackgroundSet",
    "DecisionTree",
    "Diet",
    "EnergyNeeds",
    "Feature",
    "FeatureAttribution",
    "FeatureKind",
    "FeatureSchema",
    "HealthGoal",
    "MealSlot",
    "NutritionFacts",
    "Recipe",
    "Recommendation",
    "RecommendResult",
    "RulesConfig",
    "Sex",
    "TrainConfig",
    "UserProfile",
    "apply_rules",
    "bmr",
    "decode",
    "encode",
    "energy_needs",
    "fidelity",
    "fit",
    "rank_features",
    "recommend",
    "shap_bruteforce",
    "shap_tree",
    "validate_profile",
    "__version__",
]
