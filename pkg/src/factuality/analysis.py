"""Evaluation tables and error analyses over unified items plus predictions.

All analyses consume :class:`EventRecord` lists and externally produced
prediction files; nothing here asserts any particular model's scores.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import Dataset, EventRecord, FormatError, validate_score
from .signatures import packaged_data_path
from .stats import MixedLinearModel, mae, pearson


@dataclass(frozen=True)
class PredictionSet:
    """One model's scores keyed by item id (e.g. one seed of one training run)."""

    model_name: str
    entries: Mapping[str, float]
    provenance: str = ""

    def __post_init__(self) -> None:
        for item_id, score in self.entries.items():
            validate_score(score, f"prediction for {item_id}")


def read_predictions(path: str | Path, model_name: str | None = None) -> PredictionSet:
    """Read a prediction TSV (``id<TAB>score``) into a PredictionSet."""
    entries: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise FormatError(f"{path}:{lineno}: expected `id<TAB>score`")
            item_id = parts[0].strip()
            if item_id in entries:
                raise FormatError(f"{path}:{lineno}: duplicate id {item_id!r}")
            try:
                entries[item_id] = validate_score(float(parts[1]), "prediction")
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return PredictionSet(model_name=model_name or Path(path).stem, entries=entries)


def mean_predictions(sets: Sequence[PredictionSet]) -> PredictionSet:
    """Per-item mean over every set that scores the item.

    Used to average runs over initializations and splits before analysis;
    with differing test splits, each item is averaged over the runs that
    actually predicted it.
    """
    if not sets:
        raise ValueError("no prediction sets given")
    if len(sets) == 1:
        return sets[0]
    sums: dict[str, list] = {}
    for pset in sets:
        for item_id, score in pset.entries.items():
            acc = sums.setdefault(item_id, [0.0, 0])
            acc[0] += score
            acc[1] += 1
    entries = {item_id: s / c for item_id, (s, c) in sums.items()}
    name = "mean(" + ", ".join(p.model_name for p in sets) + ")"
    return PredictionSet(model_name=name, entries=entries)


def _as_single_set(preds: PredictionSet | Sequence[PredictionSet]) -> PredictionSet:
    if isinstance(preds, PredictionSet):
        return preds
    return mean_predictions(list(preds))


def _require_coverage(items: Sequence[EventRecord], pset: PredictionSet) -> None:
    missing = [r.id for r in items if r.id not in pset.entries]
    if missing:
        raise ValueError(
            f"{len(missing)} items have no prediction: {', '.join(missing[:10])}"
            + (" ..." if len(missing) > 10 else "")
        )


@dataclass(frozen=True)
class DatasetScore:
    n: int
    mae: float
    pearson: float | None


@dataclass(frozen=True)
class EvaluationReport:
    model_name: str
    per_dataset: dict[str, DatasetScore]

    def to_dict(self) -> dict:
        return {
            "model": self.model_name,
            "datasets": {
                name: {"n": s.n, "mae": s.mae, "pearson": s.pearson}
                for name, s in self.per_dataset.items()
            },
        }

    def to_text(self) -> str:
        lines = [f"{'dataset':<18}{'n':>7}{'MAE':>9}{'r':>9}"]
        for name, s in self.per_dataset.items():
            r = "n/a" if s.pearson is None else f"{s.pearson:.3f}"
            lines.append(f"{name:<18}{s.n:>7}{s.mae:>9.3f}{r:>9}")
        return "\n".join(lines)


def evaluate(
    items: Sequence[EventRecord], preds: PredictionSet | Sequence[PredictionSet]
) -> EvaluationReport:
    """Per-dataset MAE and Pearson r of predictions against gold labels.

    With several prediction sets, per-item means are taken first. Every item
    must be covered by at least one set. Pearson is None on datasets where
    either side is constant.
    """
    pset = _as_single_set(preds)
    _require_coverage(items, pset)
    report: dict[str, DatasetScore] = {}
    for dataset, group in _by_dataset(items).items():
        golds = [r.gold for r in group]
        scores = [pset.entries[r.id] for r in group]
        r = pearson(scores, golds) if len(group) >= 2 else None
        report[dataset] = DatasetScore(n=len(group), mae=mae(scores, golds), pearson=r)
    return EvaluationReport(model_name=pset.model_name, per_dataset=report)


def _by_dataset(items: Iterable[EventRecord]) -> dict[str, list[EventRecord]]:
    grouped: dict[str, list[EventRecord]] = {}
    for record in items:
        grouped.setdefault(record.dataset.value, []).append(record)
    return grouped


@dataclass(frozen=True)
class StudyRow:
    item_id: str
    dataset: str
    expected_error: float
    prediction_error: float


@dataclass(frozen=True)
class ExpectedInferenceStudy:
    """Regression of model errors on expected-inference errors, by dataset."""

    rows: list[StudyRow]
    model: MixedLinearModel
    per_dataset: dict[str, dict]
    all_slopes_positive: bool

    def to_dict(self) -> dict:
        return {
            "n": len(self.rows),
            "fixed_intercept": self.model.fixed_intercept_,
            "fixed_slope": self.model.fixed_slope_,
            "per_dataset": self.per_dataset,
            "all_slopes_positive": self.all_slopes_positive,
            "model": self.model.to_dict(),
        }


def expected_inference_study(
    items: Sequence[EventRecord],
    preds: PredictionSet | Sequence[PredictionSet],
    expected: Mapping[str, float],
    **model_params,
) -> ExpectedInferenceStudy:
    """Fit |prediction - gold| on |expected - gold| with per-dataset slopes.

    Items must appear in both the prediction set and the expected-inference
    map; others are dropped (no imputation). UDS-IH2 items are excluded, with
    a warning when any are present.
    """
    pset = _as_single_set(preds)
    uds = [r for r in items if r.dataset is Dataset.UDSIH2]
    if uds:
        warnings.warn(
            f"excluding {len(uds)} UDS-IH2 items from the expected-inference study",
            UserWarning,
            stacklevel=2,
        )
    rows = [
        StudyRow(
            item_id=r.id,
            dataset=r.dataset.value,
            expected_error=abs(expected[r.id] - r.gold),
            prediction_error=abs(pset.entries[r.id] - r.gold),
        )
        for r in items
        if r.dataset is not Dataset.UDSIH2 and r.id in expected and r.id in pset.entries
    ]
    if not rows:
        raise ValueError("no items shared between predictions and expected inference")

    model = MixedLinearModel(**model_params).fit(
        [row.expected_error for row in rows],
        [row.prediction_error for row in rows],
        [row.dataset for row in rows],
    )
    coefficients = model.group_coefficients()
    counts: dict[str, int] = {}
    for row in rows:
        counts[row.dataset] = counts.get(row.dataset, 0) + 1
    per_dataset = {
        name: {"alpha": alpha, "beta": beta, "n": counts[name]}
        for name, (alpha, beta) in coefficients.items()
    }
    return ExpectedInferenceStudy(
        rows=rows,
        model=model,
        per_dataset=per_dataset,
        all_slopes_positive=all(v["beta"] > 0 for v in per_dataset.values()),
    )


@dataclass(frozen=True)
class RankedError:
    record: EventRecord
    prediction: float
    abs_error: float


def rank_errors(
    items: Sequence[EventRecord],
    preds: PredictionSet | Sequence[PredictionSet],
    frac: float = 0.1,
) -> list[RankedError]:
    """The top ``frac`` of items by absolute error, largest first.

    Ties break on item id so reports are reproducible.
    """
    if not 0.0 < frac <= 1.0:
        raise ValueError(f"frac must be in (0, 1], got {frac}")
    pset = _as_single_set(preds)
    _require_coverage(items, pset)
    ranked = sorted(
        (
            RankedError(
                record=r,
                prediction=pset.entries[r.id],
                abs_error=abs(pset.entries[r.id] - r.gold),
            )
            for r in items
        ),
        key=lambda e: (-e.abs_error, e.record.id),
    )
    top = math.ceil(frac * len(ranked))
    return ranked[:top]


@dataclass(frozen=True)
class DispersionReport:
    mean_prediction_variance: float
    mean_gold_variance: float
    n_groups: int
    n_skipped_singletons: int

    def to_dict(self) -> dict:
        return {
            "mean_prediction_variance": self.mean_prediction_variance,
            "mean_gold_variance": self.mean_gold_variance,
            "n_groups": self.n_groups,
            "n_skipped_singletons": self.n_skipped_singletons,
        }


def group_dispersion(
    items: Sequence[EventRecord],
    preds: PredictionSet | Sequence[PredictionSet],
    keys: tuple[str, ...] = ("verb", "frame", "polarity"),
    ddof: int = 1,
) -> DispersionReport:
    """Mean within-group variance of predictions and of gold labels.

    Groups items by the given feature keys, skips singleton groups, and
    averages the per-group variances (sample variance by default;
    ``ddof=0`` for population variance).
    """
    pset = _as_single_set(preds)
    _require_coverage(items, pset)
    missing = [r.id for r in items if any(getattr(r, k) is None for k in keys)]
    if missing:
        raise ValueError(
            f"{len(missing)} items lack grouping features {keys}: {', '.join(missing[:10])}"
        )
    groups: dict[tuple, list[EventRecord]] = {}
    for record in items:
        key = tuple(
            v.value if isinstance(v := getattr(record, k), Enum) else v for k in keys
        )
        groups.setdefault(key, []).append(record)

    pred_vars, gold_vars = [], []
    skipped = 0
    for members in groups.values():
        if len(members) < 2:
            skipped += 1
            continue
        pred_vars.append(_variance([pset.entries[r.id] for r in members], ddof))
        gold_vars.append(_variance([r.gold for r in members], ddof))
    if not pred_vars:
        raise ValueError("no group has at least 2 items")
    return DispersionReport(
        mean_prediction_variance=sum(pred_vars) / len(pred_vars),
        mean_gold_variance=sum(gold_vars) / len(gold_vars),
        n_groups=len(pred_vars),
        n_skipped_singletons=skipped,
    )


def _variance(values: Sequence[float], ddof: int) -> float:
    n = len(values)
    mean = sum(values) / n
    return sum((v - mean) ** 2 for v in values) / (n - ddof)


def read_verb_list(path: str | Path) -> frozenset[str]:
    verbs = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                verbs.add(line.lower())
    return frozenset(verbs)


@dataclass(frozen=True)
class ScatterTable:
    """Plot-ready rows; the diagonal marks perfect prediction."""

    header: tuple[str, ...]
    rows: list[tuple]
    diagonal: tuple[tuple[float, float], tuple[float, float]] = ((-3.0, -3.0), (3.0, 3.0))

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.header)
            writer.writerows(self.rows)


def scatter_export(
    items: Sequence[EventRecord],
    preds: PredictionSet | Sequence[PredictionSet],
    facet: str | tuple[str, ...] = "environment",
    factive_verbs: frozenset[str] | None = None,
    neg_raising_verbs: frozenset[str] | None = None,
) -> ScatterTable:
    """Prediction-vs-gold rows faceted by a feature, for external plotting.

    Each row carries verb-class flags (factive, neg-raising) from editable
    word lists so plots can distinguish those items.
    """
    pset = _as_single_set(preds)
    _require_coverage(items, pset)
    keys = (facet,) if isinstance(facet, str) else tuple(facet)
    missing = [r.id for r in items if any(getattr(r, k) is None for k in keys)]
    if missing:
        raise ValueError(
            f"{len(missing)} items lack facet feature {keys}: {', '.join(missing[:10])}"
        )
    if factive_verbs is None:
        factive_verbs = read_verb_list(packaged_data_path("factive_verbs.txt"))
    if neg_raising_verbs is None:
        neg_raising_verbs = read_verb_list(packaged_data_path("neg_raising_verbs.txt"))

    rows = []
    for record in items:
        parts = [
            v.value if isinstance(v := getattr(record, k), Enum) else str(v) for k in keys
        ]
        verb = (record.verb or "").lower()
        rows.append(
            (
                record.id,
                record.gold,
                pset.entries[record.id],
                "|".join(parts),
                verb in factive_verbs,
                verb in neg_raising_verbs,
            )
        )
    return ScatterTable(
        header=("id", "gold", "prediction", "facet", "factive", "neg_raising"), rows=rows
    )


class ErrorCategory(Enum):
    """Closed vocabulary of reasons a gold label diverges from surface patterns."""

    PRIOR_PROBABILITY = "prior_probability"
    CONTEXT_SUGGESTS = "context_suggests"
    QUD = "qud"
    TENSE_ASPECT = "tense_aspect"
    SUBJECT_AUTHORITY = "subject_authority"
    SUBJECT_COMPLEMENT_INTERACTION = "subject_complement_interaction"
    LEXICAL_INFERENCE = "lexical_inference"
    ANNOTATION_ERROR = "annotation_error"


def read_error_annotations(
    path: str | Path,
) -> dict[str, dict[str, ErrorCategory]]:
    """Read category annotations (TSV ``id<TAB>category<TAB>annotator``)."""
    out: dict[str, dict[str, ErrorCategory]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected `id<TAB>category<TAB>annotator`")
            item_id, category_text, annotator = (p.strip() for p in parts)
            try:
                category = ErrorCategory(category_text)
            except ValueError:
                raise FormatError(
                    f"{path}:{lineno}: unknown category {category_text!r}"
                ) from None
            per_item = out.setdefault(item_id, {})
            if annotator in per_item:
                raise FormatError(
                    f"{path}:{lineno}: duplicate annotation by {annotator!r} for {item_id!r}"
                )
            per_item[annotator] = category
    return out


@dataclass(frozen=True)
class CategoryReport:
    """Per-dataset category counts/percentages and raw annotator agreement."""

    per_dataset: dict[str, dict[str, dict]]
    agreement: dict[str, dict]

    def to_dict(self) -> dict:
        return {"per_dataset": self.per_dataset, "agreement": self.agreement}

    def to_text(self) -> str:
        lines = []
        for dataset, table in self.per_dataset.items():
            total = sum(cell["count"] for cell in table.values())
            lines.append(f"{dataset} ({total} items)")
            for name, cell in table.items():
                lines.append(f"  {name:<32}{cell['count']:>5}{cell['percent']:>8.1f}%")
            stats = self.agreement.get(dataset)
            if stats and stats["shared"]:
                lines.append(
                    f"  agreement: {stats['agreed']}/{stats['shared']}"
                    f" = {stats['percent']:.1f}%"
                )
        return "\n".join(lines)


def error_category_report(
    ranked: Sequence[RankedError],
    annotations: Mapping[str, Mapping[str, ErrorCategory]],
) -> CategoryReport:
    """Aggregate human error categorizations over a ranked error list.

    Each item counts once per dataset; when two annotators disagree, the
    annotator first in sorted order wins (deterministic, and reported via the
    agreement statistics). Annotations for ids outside the ranked list are
    skipped with a warning.
    """
    by_id = {e.record.id: e.record for e in ranked}
    extraneous = [item_id for item_id in annotations if item_id not in by_id]
    if extraneous:
        warnings.warn(
            f"{len(extraneous)} annotated ids are not in the ranked list: "
            + ", ".join(extraneous[:5]),
            UserWarning,
            stacklevel=2,
        )

    counts: dict[str, dict[ErrorCategory, int]] = {}
    shared: dict[str, list[bool]] = {}
    for item_id, per_annotator in annotations.items():
        record = by_id.get(item_id)
        if record is None:
            continue
        dataset = record.dataset.value
        chosen = per_annotator[sorted(per_annotator)[0]]
        table = counts.setdefault(dataset, {})
        table[chosen] = table.get(chosen, 0) + 1
        if len(per_annotator) >= 2:
            values = list(per_annotator.values())
            shared.setdefault(dataset, []).append(all(v == values[0] for v in values))

    per_dataset = {}
    for dataset, table in counts.items():
        total = sum(table.values())
        per_dataset[dataset] = {
            category.value: {
                "count": table.get(category, 0),
                "percent": 100.0 * table.get(category, 0) / total,
            }
            for category in ErrorCategory
            if table.get(category, 0)
        }
    agreement = {
        dataset: {
            "shared": len(flags),
            "agreed": sum(flags),
            "percent": 100.0 * sum(flags) / len(flags),
        }
        for dataset, flags in shared.items()
    }
    return CategoryReport(per_dataset=per_dataset, agreement=agreement)
