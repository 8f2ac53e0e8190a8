"""Expected inference: the factuality label predicted by surface features alone.

For the embedded-event corpora the expected inference of a test item is the
mean gold label of training items sharing its surface features, backing off
through a fixed schedule of coarser feature combinations when the exact
combination is unseen. For the newswire corpora it is instead an externally
produced rule-based prediction, ingested from a file.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .core import Dataset, EventRecord, FormatError, validate_score
from .validation import check_fitted

FeatureSchema = tuple[tuple[str, ...], ...]

#: Backoff schedule for MegaVeridicality and RP: exact verb/polarity/frame
#: match, then verb-polarity, verb, and finally polarity alone.
VERB_POLARITY_FRAME_SCHEMA: FeatureSchema = (
    ("verb", "polarity", "frame"),
    ("verb", "polarity"),
    ("verb",),
    ("polarity",),
)

#: Backoff schedule for CB: verb with its entailment-canceling environment,
#: then verb, then environment.
VERB_ENVIRONMENT_SCHEMA: FeatureSchema = (
    ("verb", "environment"),
    ("verb",),
    ("environment",),
)

SCHEMAS: dict[str, FeatureSchema] = {
    "verb_polarity_frame": VERB_POLARITY_FRAME_SCHEMA,
    "verb_environment": VERB_ENVIRONMENT_SCHEMA,
}

_FEATURE_NAMES = ("verb", "polarity", "frame", "environment")


def validate_schema(schema: FeatureSchema) -> FeatureSchema:
    schema = tuple(tuple(tier) for tier in schema)
    if not schema:
        raise ValueError("schema must have at least one tier")
    for tier in schema:
        for name in tier:
            if name not in _FEATURE_NAMES:
                raise ValueError(f"unknown feature {name!r}; expected one of {_FEATURE_NAMES}")
    head = set(schema[0])
    lengths = [len(t) for t in schema]
    if any(b > a for a, b in zip(lengths, lengths[1:])):
        raise ValueError("backoff tiers must not grow finer")
    for tier in schema[1:]:
        if not set(tier) < head:
            raise ValueError(f"backoff tier {tier} is not coarser than {schema[0]}")
    return schema


def _feature_value(record: EventRecord, name: str):
    value = getattr(record, name)
    if value is None:
        return None
    return value.value if hasattr(value, "value") else value


def _key(record: EventRecord, tier: tuple[str, ...]) -> tuple:
    return tuple(_feature_value(record, name) for name in tier)


class ExpectedInference(NamedTuple):
    """A matched expected-inference label.

    ``tier`` is the index of the backoff tier that matched and ``support``
    the number of training items behind the mean.
    """

    score: float
    tier: int
    support: int


@dataclass(frozen=True)
class FeatureIndex:
    """Per-tier maps from feature tuples to (mean gold, count) over training items."""

    schema: FeatureSchema
    tiers: tuple[Mapping[tuple, tuple[float, int]], ...]


def build_feature_index(train: Sequence[EventRecord], schema: FeatureSchema) -> FeatureIndex:
    """Aggregate training golds under every tier of the backoff schedule."""
    schema = validate_schema(schema)
    if not train:
        raise ValueError("cannot build a feature index from an empty training set")
    needed = set(schema[0])
    missing = [r.id for r in train if any(_feature_value(r, n) is None for n in needed)]
    if missing:
        raise ValueError(
            f"{len(missing)} training items lack schema features: {', '.join(missing[:10])}"
        )
    tiers = []
    for tier in schema:
        sums: dict[tuple, list] = {}
        for record in train:
            acc = sums.setdefault(_key(record, tier), [0.0, 0])
            acc[0] += record.gold
            acc[1] += 1
        tiers.append({k: (s / c, c) for k, (s, c) in sums.items()})
    return FeatureIndex(schema=schema, tiers=tuple(tiers))


def expected_inference(item: EventRecord, index: FeatureIndex) -> ExpectedInference | None:
    """First-matching-tier mean for one item, or None when no tier matches."""
    needed = set(index.schema[0])
    missing = [n for n in needed if _feature_value(item, n) is None]
    if missing:
        raise ValueError(f"record {item.id} lacks schema features: {', '.join(missing)}")
    for tier_idx, tier in enumerate(index.schema):
        hit = index.tiers[tier_idx].get(_key(item, tier))
        if hit is not None:
            mean, count = hit
            return ExpectedInference(score=mean, tier=tier_idx, support=count)
    return None


class ExpectedInferenceOracle(BaseEstimator):
    """Estimator facade: fit on training records, predict feature-matched means.

    Parameters
    ----------
    schema : a named schema ("verb_polarity_frame", "verb_environment") or an
        explicit tuple of feature-name tuples, finest first.

    ``predict`` returns NaN for items no backoff tier covers; use
    ``predict_detail`` to get tier and support alongside the score.
    """

    def __init__(self, schema="verb_polarity_frame"):
        self.schema = schema

    def _resolved_schema(self) -> FeatureSchema:
        if isinstance(self.schema, str):
            try:
                return SCHEMAS[self.schema]
            except KeyError:
                raise ValueError(
                    f"unknown schema {self.schema!r}; expected one of {sorted(SCHEMAS)}"
                ) from None
        return validate_schema(self.schema)

    def fit(self, X: Sequence[EventRecord], y=None) -> "ExpectedInferenceOracle":
        self.index_ = build_feature_index(list(X), self._resolved_schema())
        return self

    def predict_detail(self, records: Iterable[EventRecord]) -> list[ExpectedInference | None]:
        check_fitted(self, "index_")
        return [expected_inference(r, self.index_) for r in records]

    def predict(self, records: Iterable[EventRecord]) -> np.ndarray:
        detail = self.predict_detail(records)
        return np.array([np.nan if e is None else e.score for e in detail])


def ingest_rule_predictions(
    path: str | Path, items: Sequence[EventRecord]
) -> dict[str, float]:
    """Read externally produced rule-based predictions (TSV ``id<TAB>score``).

    Every id in the file must belong to a known item; scores must lie in
    [-3, 3]. UDS-IH2 items are excluded with a warning, since no rule-based
    predictions exist for that corpus and analyses that consume this map
    leave it out. The result covers exactly the ids present in both the file
    and ``items`` (minus the UDS-IH2 exclusions).
    """
    by_id = {r.id: r for r in items}
    out: dict[str, float] = {}
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected `id<TAB>score`")
            item_id, score_text = parts[0].strip(), parts[1].strip()
            record = by_id.get(item_id)
            if record is None:
                raise FormatError(f"{path}:{lineno}: unknown item id {item_id!r}")
            try:
                score = validate_score(float(score_text), "prediction")
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            if item_id in seen:
                raise FormatError(f"{path}:{lineno}: duplicate id {item_id!r}")
            seen.add(item_id)
            if record.dataset is Dataset.UDSIH2:
                warnings.warn(
                    f"{path}:{lineno}: UDS-IH2 item {item_id} excluded from rule predictions",
                    UserWarning,
                    stacklevel=2,
                )
                continue
            out[item_id] = score
    return out
