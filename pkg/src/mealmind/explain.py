"""Hybrid explanation payloads: merged attributions, prompts, generated text.

Prompts are pure string assembly over (recipe names, ordered feature pairs)
and are locked by golden tests; numbers render as shortest round-trip
decimals with no trailing zeros.
"""

from __future__ import annotations

import time
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from .domain import FeatureSchema
from .gateway import DETERMINISTIC_BACKEND_ID, Gateway, GatewayError
from .shapley import FeatureAttribution, rank_features, shap_tree

STYLE_PLAIN = "plain"
STYLE_CONTRASTIVE = "contrastive"


class ExplainError(ValueError):
    """Carries a machine-readable code for API error mapping."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class ExplanationRequest:
    profile_id: str
    recipe_id: str
    style: str = STYLE_PLAIN
    contrast_recipe_id: str | None = None
    top_k: int = 3
    backend_id: str = DETERMINISTIC_BACKEND_ID

    def __post_init__(self) -> None:
        if self.style not in (STYLE_PLAIN, STYLE_CONTRASTIVE):
            raise ExplainError("invalid_style", f"unknown explanation style {self.style!r}")
        if (self.style == STYLE_CONTRASTIVE) != (self.contrast_recipe_id is not None):
            raise ExplainError(
                "style_contrast_mismatch",
                "contrastive requests need contrast_recipe_id and plain requests must omit it",
            )
        if self.top_k < 1:
            raise ExplainError("invalid_top_k", "top_k must be at least 1")


@dataclass(frozen=True)
class HybridEntry:
    origin: str  # user | recipe
    feature: str
    raw_value: Any
    phi: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "origin": self.origin,
            "feature": self.feature,
            "raw_value": self.raw_value,
            "phi": self.phi,
        }


@dataclass(frozen=True)
class ExplanationResult:
    text: str
    prompt: str
    backend_id: str
    user_features: dict[str, Any]
    recipe_features: dict[str, Any]
    latency_ms: int
    deterministic_fallback: bool
    contrast_user_features: dict[str, Any] | None = None
    contrast_recipe_features: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "prompt": self.prompt,
            "backend_id": self.backend_id,
            "user_features": self.user_features,
            "recipe_features": self.recipe_features,
            "contrast_user_features": self.contrast_user_features,
            "contrast_recipe_features": self.contrast_recipe_features,
            "latency_ms": self.latency_ms,
            "deterministic_fallback": self.deterministic_fallback,
        }


def render_value(raw: Any) -> str:
    """Shortest decimal without trailing zeros; strings pass through."""
    if isinstance(raw, bool):
        return "true" if raw else "false"
    if isinstance(raw, (int, float)):
        value = float(raw)
        if value == int(value):
            return str(int(value))
        return repr(value)
    return str(raw)


def hybrid_features(
    user_attr: FeatureAttribution,
    recipe_attr: FeatureAttribution,
    user_schema: FeatureSchema,
    recipe_schema: FeatureSchema,
    k: int,
) -> list[HybridEntry]:
    """Top-k user-centric entries first, then top-k recipe-centric ones."""
    if k < 1:
        raise ExplainError("invalid_top_k", "k must be at least 1")
    merged = [
        HybridEntry("user", name, raw, phi)
        for name, raw, phi in rank_features(user_attr, user_schema, k)
    ]
    merged += [
        HybridEntry("recipe", name, raw, phi)
        for name, raw, phi in rank_features(recipe_attr, recipe_schema, k)
    ]
    return merged


def _render_pairs(features: Sequence[tuple[str, Any]]) -> str:
    return ", ".join(f"{name}: {render_value(value)}" for name, value in features)


def build_plain_prompt(recipe_name: str, features: Sequence[tuple[str, Any]]) -> str:
    """The fixed persuasion prompt over one recipe's feature pairs."""
    if not features:
        raise ExplainError("empty_features", "plain prompt needs at least one feature")
    return f"Convince me that '{recipe_name}' is better for me, given {_render_pairs(features)}"


def build_contrastive_prompt(
    recipe_a: str,
    recipe_b: str,
    features_a: Sequence[tuple[str, Any]],
    features_b: Sequence[tuple[str, Any]],
) -> str:
    """The fixed two-recipe comparison prompt; the scaffold never varies."""
    if recipe_a == recipe_b:
        raise ExplainError("same_recipe", "contrastive prompt needs two distinct recipes")
    if not features_a or not features_b:
        raise ExplainError("empty_features", "contrastive prompt needs features for both recipes")
    return (
        f"Convince me that '{recipe_a}' is better for me than '{recipe_b}', "
        f"given for '{recipe_a}' — {_render_pairs(features_a)}; "
        f"and for '{recipe_b}' — {_render_pairs(features_b)}"
    )


def _attribution_payload(
    attr: FeatureAttribution, entries: Sequence[HybridEntry], origin: str
) -> dict[str, Any]:
    return {
        "base_value": attr.base_value,
        "model_output": attr.model_output,
        "target_class": attr.target_class,
        "entries": [e.to_dict() for e in entries if e.origin == origin],
    }


def explain(request: ExplanationRequest, session, gateway: Gateway) -> ExplanationResult:
    """Attribute, merge, build the prompt, and generate text for one request.

    Remote backend failures fall back to the deterministic backend after the
    gateway's own retries are spent.
    """
    try:
        gateway.get(request.backend_id)
    except GatewayError as exc:
        raise ExplainError("unknown_backend", str(exc)) from None

    recipe = session.candidate(request.recipe_id)
    if recipe is None:
        raise ExplainError(
            "unknown_recipe",
            f"recipe {request.recipe_id!r} is not among this session's recommendations",
        )

    user_attr = shap_tree(
        session.user_tree, session.user_vector, session.user_background, request.recipe_id
    )
    recipe_attr = shap_tree(
        session.recipe_tree,
        session.candidate_vectors[request.recipe_id],
        session.recipe_background,
        1,
    )
    merged = hybrid_features(
        user_attr, recipe_attr, session.user_schema, session.recipe_schema, request.top_k
    )
    pairs = [(e.feature, e.raw_value) for e in merged]

    contrast_user_payload = None
    contrast_recipe_payload = None
    if request.style == STYLE_CONTRASTIVE:
        contrast = session.candidate(request.contrast_recipe_id)
        if contrast is None:
            raise ExplainError(
                "unknown_recipe",
                f"recipe {request.contrast_recipe_id!r} is not among this session's recommendations",
            )
        contrast_user_attr = shap_tree(
            session.user_tree,
            session.user_vector,
            session.user_background,
            request.contrast_recipe_id,
        )
        contrast_recipe_attr = shap_tree(
            session.recipe_tree,
            session.candidate_vectors[request.contrast_recipe_id],
            session.recipe_background,
            1,
        )
        contrast_merged = hybrid_features(
            contrast_user_attr,
            contrast_recipe_attr,
            session.user_schema,
            session.recipe_schema,
            request.top_k,
        )
        contrast_pairs = [(e.feature, e.raw_value) for e in contrast_merged]
        prompt = build_contrastive_prompt(recipe.name, contrast.name, pairs, contrast_pairs)
        contrast_user_payload = _attribution_payload(contrast_user_attr, contrast_merged, "user")
        contrast_recipe_payload = _attribution_payload(
            contrast_recipe_attr, contrast_merged, "recipe"
        )
    else:
        prompt = build_plain_prompt(recipe.name, pairs)

    fallback = False
    backend_id = request.backend_id
    started = time.monotonic()
    try:
        text = gateway.generate(backend_id, prompt)
    except GatewayError:
        if backend_id == DETERMINISTIC_BACKEND_ID:
            raise
        text = gateway.generate(DETERMINISTIC_BACKEND_ID, prompt)
        fallback = True
    from_deterministic = fallback or backend_id == DETERMINISTIC_BACKEND_ID
    # The deterministic path is pure, so its latency is reported as 0 to keep
    # end-to-end responses byte-reproducible.
    latency_ms = 0 if from_deterministic else int((time.monotonic() - started) * 1000)

    return ExplanationResult(
        text=text,
        prompt=prompt,
        backend_id=backend_id,
        user_features=_attribution_payload(user_attr, merged, "user"),
        recipe_features=_attribution_payload(recipe_attr, merged, "recipe"),
        contrast_user_features=contrast_user_payload,
        contrast_recipe_features=contrast_recipe_payload,
        latency_ms=latency_ms,
        deterministic_fallback=fallback,
    )
