"""Service and CLI configuration document (JSON), with section parsing."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .domain import ActivityLevel, MealSlot
from .gateway import BackendConfig
from .rules import RulesConfig
from .session import SessionConfig
from .tree import TrainConfig


class ConfigError(ValueError):
    """Unreadable or invalid configuration document."""


@dataclass(frozen=True)
class ServiceConfig:
    catalog_path: str | None = None
    taxonomy_path: str | None = None
    rules: RulesConfig = field(default_factory=RulesConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    session: SessionConfig = field(default_factory=SessionConfig)
    backends: tuple[BackendConfig, ...] = ()
    listen_addr: str = "127.0.0.1:8000"
    store_path: str = "mealmind.db"
    static_dir: str | None = None


def _rules_from_dict(data: Mapping[str, Any]) -> RulesConfig:
    kwargs: dict[str, Any] = {}
    if "activity_multipliers" in data:
        kwargs["activity_multipliers"] = {
            ActivityLevel(level): float(mult)
            for level, mult in data["activity_multipliers"].items()
        }
    if "meal_fractions" in data:
        kwargs["meal_fractions"] = {
            MealSlot(slot): float(fraction)
            for slot, fraction in data["meal_fractions"].items()
        }
    if "calorie_tolerance" in data:
        kwargs["calorie_tolerance"] = float(data["calorie_tolerance"])
    weights = data.get("score_weights", {})
    for name in ("rating_w", "goal_w", "calorie_fit_w"):
        if name in weights:
            kwargs[name] = float(weights[name])
    if "top_k" in data:
        kwargs["top_k"] = int(data["top_k"])
    return RulesConfig(**kwargs)


def _train_from_dict(data: Mapping[str, Any]) -> TrainConfig:
    kwargs: dict[str, Any] = {}
    for name in ("max_depth", "min_samples_split", "seed"):
        if name in data:
            kwargs[name] = data[name] if data[name] is None else int(data[name])
    if "min_gain" in data:
        kwargs["min_gain"] = float(data["min_gain"])
    if "subsample" in data and data["subsample"] is not None:
        kwargs["subsample"] = float(data["subsample"])
    return TrainConfig(**kwargs)


def _session_from_dict(train: Mapping[str, Any], shap: Mapping[str, Any], global_tree: bool) -> SessionConfig:
    kwargs: dict[str, Any] = {"global_tree": global_tree}
    if "neighborhood_size" in train:
        kwargs["neighborhood_size"] = int(train["neighborhood_size"])
    if "negatives_per_profile" in train:
        kwargs["negatives_per_profile"] = int(train["negatives_per_profile"])
    if "background_size" in shap:
        kwargs["background_size"] = int(shap["background_size"])
    if "seed" in shap:
        kwargs["seed"] = int(shap["seed"])
    return SessionConfig(**kwargs)


def config_from_dict(data: Mapping[str, Any], base_dir: Path | None = None) -> ServiceConfig:
    def resolve(path: str | None) -> str | None:
        if path is None or base_dir is None:
            return path
        return str((base_dir / path).resolve()) if not Path(path).is_absolute() else path

    try:
        backends = tuple(
            BackendConfig(
                backend_id=entry["backend_id"],
                kind=entry.get("kind", "remote_chat"),
                endpoint_url=entry.get("endpoint_url"),
                model_name=entry.get("model_name"),
                timeout_ms=int(entry.get("timeout_ms", 30_000)),
                max_retries=int(entry.get("max_retries", 2)),
                temperature=float(entry.get("temperature", 0.7)),
            )
            for entry in data.get("backends", [])
        )
        return ServiceConfig(
            catalog_path=resolve(data.get("catalog_path")),
            taxonomy_path=resolve(data.get("taxonomy_path")),
            rules=_rules_from_dict(data.get("rules", {})),
            train=_train_from_dict(data.get("train", {})),
            session=_session_from_dict(
                data.get("train", {}), data.get("shap", {}), bool(data.get("global_tree", False))
            ),
            backends=backends,
            listen_addr=str(data.get("listen_addr", "127.0.0.1:8000")),
            store_path=resolve(data.get("store_path")) or "mealmind.db",
            static_dir=resolve(data.get("static_dir")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    return config_from_dict(data, base_dir=path.parent)
