"""HTTP service exposing the full pipeline; owns session state and persistence.

Every error body is machine-readable: {code, message, details}. With the
deterministic backend the profile -> recommendation -> explanation sequence
is byte-reproducible for a fixed catalog, config, and seeds.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__
from .config import ServiceConfig
from .domain import MealSlot, Recipe, UserProfile, validate_profile
from .explain import ExplainError, ExplanationRequest, explain
from .gateway import Gateway, GatewayError
from .ingest import DEFAULT_TAXONOMY, Taxonomy, load_catalog, load_taxonomy
from .session import NoRecommendationError, Session, build_session
from .store import KeyValueStore

PROFILES = "profiles"
SESSIONS = "sessions"
LATEST_SESSION = "latest_session"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: Any = None) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details


@dataclass
class AppState:
    catalog: list[Recipe]
    taxonomy: Taxonomy
    config: ServiceConfig
    store: KeyValueStore
    gateway: Gateway

    def __post_init__(self) -> None:
        self.recipes_by_id = {r.id: r for r in self.catalog}

    def profile(self, profile_id: str) -> UserProfile:
        record = self.store.get(PROFILES, profile_id)
        if record is None:
            raise ApiError(404, "not_found", f"unknown profile {profile_id!r}")
        return validate_profile(record).profile

    def session(self, session_id: str) -> Session:
        record = self.store.get(SESSIONS, session_id)
        if record is None:
            raise ApiError(404, "not_found", f"unknown session {session_id!r}")
        return Session.from_dict(record)

    def stored_profiles(self) -> list[UserProfile]:
        return [
            validate_profile(self.store.get(PROFILES, key)).profile
            for key in self.store.keys(PROFILES)
        ]


def _profile_id_for(body: dict[str, Any]) -> str:
    canonical = json.dumps(
        {k: sorted(v) if isinstance(v, list) else v for k, v in sorted(body.items()) if k != "id"},
        sort_keys=True,
    )
    return "p-" + hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]


def _recommendation_payload(state: AppState, session: Session, session_id: str) -> dict[str, Any]:
    entries = []
    for rec in session.recommendations:
        recipe = state.recipes_by_id[rec.recipe_id]
        entries.append(
            {
                "recipe_id": rec.recipe_id,
                "name": recipe.name,
                "score": rec.score,
                "rank": rec.rank,
                "passed_rules": list(rec.passed_rules),
                "meal_budget_kcal": rec.meal_budget_kcal,
                "calories": recipe.nutrition.calories,
                "rating": recipe.rating,
                "prep_time_min": recipe.prep_time_min,
            }
        )
    return {
        "session_id": session_id,
        "profile_id": session.profile.id,
        "meal_slot": session.meal_slot.value,
        "meal_budget_kcal": session.meal_budget_kcal,
        "recommendations": entries,
    }


def create_app(config: ServiceConfig) -> FastAPI:
    if config.catalog_path is None:
        raise ValueError("service needs a catalog_path in its configuration")
    catalog, _stats = load_catalog(config.catalog_path)
    taxonomy = (
        load_taxonomy(config.taxonomy_path)
        if config.taxonomy_path
        else dict(DEFAULT_TAXONOMY)
    )
    state = AppState(
        catalog=catalog,
        taxonomy=taxonomy,
        config=config,
        store=KeyValueStore(config.store_path),
        gateway=Gateway(config.backends),
    )

    app = FastAPI(title="mealmind", version=__version__)
    app.state.mealmind = state

    @app.exception_handler(ApiError)
    async def handle_api_error(_: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(
            status_code=422,
            content={
                "code": "invalid_request",
                "message": "request body failed validation",
                "details": [str(e.get("msg", e)) for e in exc.errors()],
            },
        )

    @app.post("/profiles", status_code=201)
    async def create_profile(body: dict) -> dict[str, Any]:
        if "id" not in body or not str(body.get("id") or "").strip():
            body = {**body, "id": _profile_id_for(body)}
        report = validate_profile(body)
        if not report.ok:
            raise ApiError(
                422,
                "invalid_profile",
                "profile validation failed",
                details={"errors": list(report.errors)},
            )
        profile = report.profile
        state.store.put(PROFILES, profile.id, profile.to_dict())
        return {"profile_id": profile.id}

    @app.get("/profiles/{profile_id}")
    async def get_profile(profile_id: str) -> dict[str, Any]:
        return state.profile(profile_id).to_dict()

    @app.post("/recommendations")
    async def create_recommendation(body: dict) -> dict[str, Any]:
        profile_id = body.get("profile_id")
        if not profile_id:
            raise ApiError(422, "invalid_request", "profile_id is required")
        profile = state.profile(profile_id)
        meal_slot = None
        if body.get("meal_slot") is not None:
            try:
                meal_slot = MealSlot(str(body["meal_slot"]).lower())
            except ValueError:
                raise ApiError(
                    422, "invalid_request", f"unknown meal_slot {body['meal_slot']!r}"
                ) from None
        top_k = int(body["top_k"]) if body.get("top_k") is not None else None
        if top_k is not None and top_k < 1:
            raise ApiError(422, "invalid_request", "top_k must be at least 1")

        stored = state.stored_profiles() if state.config.session.global_tree else ()
        try:
            session = build_session(
                profile,
                state.catalog,
                state.taxonomy,
                state.config.rules,
                train_config=state.config.train,
                session_config=state.config.session,
                meal_slot=meal_slot,
                top_k=top_k,
                stored_profiles=stored,
            )
        except NoRecommendationError:
            raise ApiError(
                409,
                "no_recipe_satisfies_rules",
                "no recipe in the catalog satisfies the rules for this profile",
            ) from None

        session_id = f"s-{state.store.next_id('session'):06d}"
        state.store.put(SESSIONS, session_id, session.to_dict())
        state.store.put(LATEST_SESSION, profile_id, {"session_id": session_id})
        return _recommendation_payload(state, session, session_id)

    @app.get("/recommendations/{session_id}")
    async def get_recommendation(session_id: str) -> dict[str, Any]:
        return _recommendation_payload(state, state.session(session_id), session_id)

    @app.post("/explanations")
    async def create_explanation(body: dict) -> dict[str, Any]:
        session_id = body.get("session_id")
        if session_id is None:
            profile_id = body.get("profile_id")
            if not profile_id:
                raise ApiError(422, "invalid_request", "profile_id or session_id is required")
            latest = state.store.get(LATEST_SESSION, profile_id)
            if latest is None:
                raise ApiError(
                    404, "not_found", f"no recommendation session for profile {profile_id!r}"
                )
            session_id = latest["session_id"]
        session = state.session(session_id)

        try:
            top_k = int(body.get("top_k") or 3)
        except (TypeError, ValueError):
            raise ApiError(422, "invalid_request", "top_k must be an integer") from None
        try:
            request = ExplanationRequest(
                profile_id=session.profile.id,
                recipe_id=str(body.get("recipe_id") or ""),
                style=body.get("style", "plain"),
                contrast_recipe_id=body.get("contrast_recipe_id"),
                top_k=top_k,
                backend_id=body.get("backend_id", "deterministic"),
            )
            result = explain(request, session, state.gateway)
        except ExplainError as exc:
            status = 404 if exc.code == "unknown_recipe" else 400
            raise ApiError(status, exc.code, str(exc)) from None
        except GatewayError as exc:
            raise ApiError(502, "generation_failed", str(exc)) from None
        return result.to_dict()

    @app.get("/recipes/{recipe_id}")
    async def get_recipe(recipe_id: str) -> dict[str, Any]:
        recipe = state.recipes_by_id.get(recipe_id)
        if recipe is None:
            raise ApiError(404, "not_found", f"unknown recipe {recipe_id!r}")
        return recipe.to_dict()

    @app.get("/backends")
    async def get_backends() -> dict[str, Any]:
        return {"backends": state.gateway.list_backends()}

    @app.get("/health")
    async def health() -> dict[str, Any]:
        return {
            "status": "ok",
            "version": __version__,
            "recipes": len(state.catalog),
            "backends": state.gateway.backend_ids(),
        }

    if config.static_dir:
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="console")

    return app
