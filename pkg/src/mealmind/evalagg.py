"""Analysis over explanation rating files: mean Likert scores and preferences.

Unlike catalog ingestion, rating files are rejected fail-fast with line
numbers: evaluation data must be trustworthy, not merely cleaned.
"""

from __future__ import annotations

import csv
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

STYLES = ("plain", "contrastive")
COMBINED = "combined"
RATINGS_COLUMNS = ["participant_id", "item_id", "model_id", "style", "rating", "preferred_model_id"]


class RatingsError(ValueError):
    """Malformed ratings file; message carries the offending line number."""


@dataclass(frozen=True)
class RatingRecord:
    participant_id: str
    item_id: str
    model_id: str
    style: str
    rating: int
    preferred_model_id: str | None = None

    def __post_init__(self) -> None:
        if self.style not in STYLES:
            raise ValueError(f"style must be one of {STYLES}, got {self.style!r}")
        if not 1 <= self.rating <= 5:
            raise ValueError(f"rating must lie in [1, 5], got {self.rating}")


def load_ratings(path: str | Path) -> list[RatingRecord]:
    try:
        handle = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise RatingsError(f"cannot read ratings file: {exc}") from exc

    records: list[RatingRecord] = []
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != RATINGS_COLUMNS:
            raise RatingsError(
                f"line 1: expected header {','.join(RATINGS_COLUMNS)}"
            )
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(RATINGS_COLUMNS):
                raise RatingsError(f"line {line_no}: expected {len(RATINGS_COLUMNS)} columns")
            try:
                records.append(
                    RatingRecord(
                        participant_id=row[0],
                        item_id=row[1],
                        model_id=row[2],
                        style=row[3],
                        rating=int(row[4]),
                        preferred_model_id=row[5] or None,
                    )
                )
            except ValueError as exc:
                raise RatingsError(f"line {line_no}: {exc}") from None
    return records


def mean_ratings(records: Sequence[RatingRecord]) -> dict[tuple[str, str], float]:
    """Mean rating per (model, style) and per model combined over styles."""
    if not records:
        raise ValueError("no rating records")
    sums: dict[tuple[str, str], int] = {}
    counts: dict[tuple[str, str], int] = {}
    for record in records:
        for style in (record.style, COMBINED):
            key = (record.model_id, style)
            sums[key] = sums.get(key, 0) + record.rating
            counts[key] = counts.get(key, 0) + 1
    return {key: sums[key] / counts[key] for key in sums}


def preference_shares(records: Sequence[RatingRecord], style: str) -> dict[str, Fraction]:
    """Percentage of preference records naming each model, for one style.

    Counted per preference record. Shares are exact rationals so the
    pre-rounding partition sums to exactly 100; render with float() and
    one decimal place in reports.
    """
    if style not in STYLES + (COMBINED,):
        raise ValueError(f"style must be one of {STYLES + (COMBINED,)}, got {style!r}")
    preferences = [
        r.preferred_model_id
        for r in records
        if r.preferred_model_id and (style == COMBINED or r.style == style)
    ]
    if not preferences:
        raise ValueError(f"no preference records for style {style!r}")
    counts: dict[str, int] = {}
    for model_id in preferences:
        counts[model_id] = counts.get(model_id, 0) + 1
    total = len(preferences)
    return {
        model_id: Fraction(count * 100, total)
        for model_id, count in sorted(counts.items())
    }


def format_report(records: Sequence[RatingRecord]) -> str:
    """Human-readable means and preference shares (shares to one decimal)."""
    lines = ["Mean ratings (model, style):"]
    means = mean_ratings(records)
    for (model_id, style), value in sorted(means.items()):
        lines.append(f"  {model_id:<12} {style:<12} {value:.3f}")
    for style in STYLES + (COMBINED,):
        try:
            shares = preference_shares(records, style)
        except ValueError:
            continue
        lines.append(f"Preference shares ({style}):")
        for model_id, share in sorted(shares.items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"  {model_id:<12} {float(share):.1f}%")
    return "\n".join(lines)
