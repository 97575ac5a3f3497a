"""Operator command line: ingest, annotate, recommend, explain, train, shap,
aggregate, serve. Each subcommand is a thin adapter over one module operation.

Exit codes: 0 success, 1 validation error, 2 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path
from typing import Any

from . import __version__, ingest, rules
from .config import ConfigError, ServiceConfig, load_config
from .domain import FeatureSchema, FeatureVector, MealSlot, validate_profile
from .evalagg import RatingsError, format_report, load_ratings, mean_ratings, preference_shares
from .explain import ExplanationRequest, explain
from .gateway import Gateway, GatewayError
from .session import NoRecommendationError, build_session
from .shapley import shap_bruteforce, shap_tree
from .tree import DecisionTree, TrainConfig, fidelity, fit


class CliValidationError(ValueError):
    pass


def _emit(payload: dict[str, Any], text: str, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _load_single_profile(path: str):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ingest.IngestError(f"cannot read profile file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ingest.IngestError(f"profile file is not valid JSON: {exc}") from exc
    report = validate_profile(data)
    if not report.ok:
        raise CliValidationError("invalid profile: " + "; ".join(report.errors))
    return report.profile


def _taxonomy_from(args: argparse.Namespace, config: ServiceConfig | None = None):
    if getattr(args, "taxonomy", None):
        return ingest.load_taxonomy(args.taxonomy)
    if config and config.taxonomy_path:
        return ingest.load_taxonomy(config.taxonomy_path)
    return dict(ingest.DEFAULT_TAXONOMY)


def _read_vectors(path: str, schema: FeatureSchema) -> list[FeatureVector]:
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ingest.IngestError(f"cannot read vector file: {exc}") from exc
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != schema.names():
            raise ingest.IngestError(
                f"vector file header must match the tree schema: {','.join(schema.names())}"
            )
        vectors = []
        for line_no, row in enumerate(reader, start=2):
            try:
                vector = tuple(float(v) for v in row)
            except ValueError:
                raise ingest.IngestError(f"vector file line {line_no}: non-numeric value") from None
            schema.validate_vector(vector)
            vectors.append(vector)
    if not vectors:
        raise ingest.IngestError("vector file has no data rows")
    return vectors


def cmd_ingest(args: argparse.Namespace) -> None:
    if args.taxonomy:
        ingest.load_taxonomy(args.taxonomy)  # fail early on a bad taxonomy
    recipes, stats = ingest.load_catalog(args.catalog)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    catalog_path = out_dir / "catalog_clean.csv"
    ingest.write_catalog(recipes, catalog_path)
    (out_dir / "stats.json").write_text(json.dumps(stats.to_dict(), indent=2), encoding="utf-8")
    payload = {**stats.to_dict(), "output": str(catalog_path)}
    text = (
        f"read {stats.rows_read} rows, kept {stats.rows_kept}\n"
        + "\n".join(f"  dropped {count}: {reason}" for reason, count in sorted(stats.drop_reasons.items()))
    ).rstrip()
    _emit(payload, text, args.format)


def cmd_annotate(args: argparse.Namespace) -> None:
    config = load_config(args.config) if args.config else ServiceConfig()
    taxonomy = _taxonomy_from(args, config)
    profiles = ingest.load_profiles(args.profiles)
    recipes, _ = ingest.load_catalog(args.catalog)
    dataset = ingest.annotate(
        profiles,
        recipes,
        taxonomy,
        config.rules,
        negatives_per_profile=args.negatives,
        seed=args.seed,
    )
    ingest.save_dataset(dataset, args.out)
    positives = sum(1 for _, _, label in dataset.rows if label == 1)
    payload = {
        "rows": len(dataset.rows),
        "positives": positives,
        "negatives": len(dataset.rows) - positives,
        "output": str(args.out),
    }
    _emit(payload, f"wrote {len(dataset.rows)} rows ({positives} positive) to {args.out}", args.format)


def cmd_recommend(args: argparse.Namespace) -> None:
    config = load_config(args.config)
    if not config.catalog_path:
        raise ConfigError("config needs catalog_path for recommend")
    profile = _load_single_profile(args.profile)
    taxonomy = _taxonomy_from(args, config)
    recipes, _ = ingest.load_catalog(config.catalog_path)
    slot = MealSlot(args.slot) if args.slot else None
    result = rules.recommend(
        profile, recipes, taxonomy, config.rules, meal_slot=slot, top_k=args.top_k
    )
    payload = {
        "status": result.status,
        "meal_budget_kcal": result.meal_budget_kcal,
        "recommendations": [r.to_dict() for r in result.recommendations],
    }
    by_id = {r.id: r for r in recipes}
    lines = [f"meal budget: {result.meal_budget_kcal:.1f} kcal  status: {result.status}"]
    for rec in result.recommendations:
        lines.append(
            f"  #{rec.rank} {by_id[rec.recipe_id].name} ({rec.recipe_id}) score={rec.score:.4f}"
        )
    _emit(payload, "\n".join(lines), args.format)


def cmd_explain(args: argparse.Namespace) -> None:
    config = load_config(args.config)
    if not config.catalog_path:
        raise ConfigError("config needs catalog_path for explain")
    profile = _load_single_profile(args.profile)
    taxonomy = _taxonomy_from(args, config)
    recipes, _ = ingest.load_catalog(config.catalog_path)
    session = build_session(
        profile,
        recipes,
        taxonomy,
        config.rules,
        train_config=config.train,
        session_config=config.session,
        meal_slot=MealSlot(args.slot) if args.slot else None,
    )
    gateway = Gateway(config.backends)
    request = ExplanationRequest(
        profile_id=profile.id,
        recipe_id=args.recipe,
        style="contrastive" if args.contrast else "plain",
        contrast_recipe_id=args.contrast,
        top_k=args.top_k,
        backend_id=args.backend,
    )
    result = explain(request, session, gateway)
    _emit(result.to_dict(), f"{result.prompt}\n\n{result.text}", args.format)


def cmd_train_surrogate(args: argparse.Namespace) -> None:
    dataset = ingest.load_dataset(args.dataset)
    combined_schema = FeatureSchema(
        dataset.user_schema.features + dataset.recipe_schema.features
    )
    rows = [u + r for u, r, _ in dataset.rows]
    labels = [label for _, _, label in dataset.rows]
    config = TrainConfig(
        max_depth=args.max_depth,
        min_samples_split=args.min_samples_split,
        min_gain=args.min_gain,
        seed=args.seed,
    )
    model = fit(rows, labels, combined_schema, config)
    model.save(args.out)
    train_fidelity = fidelity(model, rows, labels)
    payload = {
        "fidelity": train_fidelity,
        "nodes": len(model.nodes),
        "classes": list(model.classes),
        "output": str(args.out),
    }
    _emit(payload, f"fidelity {train_fidelity:.4f} over {len(rows)} rows -> {args.out}", args.format)


def cmd_shap(args: argparse.Namespace) -> None:
    model = DecisionTree.load(args.tree)
    instance = _read_vectors(args.instance, model.schema)[0]
    background = _read_vectors(args.background, model.schema)
    if args.target_class is not None:
        target: Any = args.target_class
        if all(isinstance(c, int) for c in model.classes):
            target = int(target)
    else:
        target = model.predict_class(instance)
    compute = shap_bruteforce if args.bruteforce else shap_tree
    attribution = compute(model, instance, background, target)
    payload = attribution.to_dict(model.schema)
    lines = [
        f"target class: {target}  base: {attribution.base_value:.6f}  "
        f"output: {attribution.model_output:.6f}"
    ]
    for entry in payload["entries"]:
        lines.append(f"  {entry['feature']:<20} {entry['raw_value']!s:<14} phi={entry['phi']:+.6f}")
    _emit(payload, "\n".join(lines), args.format)


def cmd_aggregate(args: argparse.Namespace) -> None:
    records = load_ratings(args.ratings)
    means = mean_ratings(records)
    payload: dict[str, Any] = {
        "means": {f"{model}|{style}": value for (model, style), value in sorted(means.items())},
        "shares": {},
    }
    for style in ("plain", "contrastive", "combined"):
        try:
            shares = preference_shares(records, style)
        except ValueError:
            continue
        payload["shares"][style] = {model: float(share) for model, share in shares.items()}
    _emit(payload, format_report(records), args.format)


def cmd_serve(args: argparse.Namespace) -> None:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    app = create_app(config)
    host, _, port = config.listen_addr.partition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mealmind", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mealmind {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("ingest", help="clean a recipe catalog and report drop stats")
    p.add_argument("--catalog", required=True)
    p.add_argument("--taxonomy")
    p.add_argument("--out", required=True)
    add_format(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("annotate", help="build the labeled surrogate training set")
    p.add_argument("--catalog", required=True)
    p.add_argument("--profiles", required=True)
    p.add_argument("--taxonomy")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--negatives", type=int, default=ingest.DEFAULT_NEGATIVES_PER_PROFILE)
    p.add_argument("--seed", type=int, default=42)
    add_format(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("recommend", help="rank recipes for one profile")
    p.add_argument("--config", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--slot", choices=[s.value for s in MealSlot])
    p.add_argument("--top-k", type=int, default=None)
    add_format(p)
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("explain", help="recommend, attribute, and generate one explanation")
    p.add_argument("--config", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--recipe", required=True)
    p.add_argument("--contrast")
    p.add_argument("--backend", default="deterministic")
    p.add_argument("--slot", choices=[s.value for s in MealSlot])
    p.add_argument("--top-k", type=int, default=3)
    add_format(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("train-surrogate", help="fit a tree on an annotated dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-depth", type=int, default=5)
    p.add_argument("--min-samples-split", type=int, default=4)
    p.add_argument("--min-gain", type=float, default=1e-7)
    p.add_argument("--seed", type=int, default=42)
    add_format(p)
    p.set_defaults(func=cmd_train_surrogate)

    p = sub.add_parser("shap", help="attribute one prediction of a persisted tree")
    p.add_argument("--tree", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--background", required=True)
    p.add_argument("--target-class")
    p.add_argument("--bruteforce", action="store_true")
    add_format(p)
    p.set_defaults(func=cmd_shap)

    p = sub.add_parser("aggregate", help="mean ratings and preference shares")
    p.add_argument("--ratings", required=True)
    add_format(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ingest.IngestError, RatingsError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, GatewayError, NoRecommendationError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
