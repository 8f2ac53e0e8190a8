"""Shared domain types for event-factuality data.

Every corpus is harmonized into :class:`EventRecord` items carrying a gold
factuality score on the unified [-3, +3] scale, optional raw annotations,
and the linguistic features (verb, frame, polarity, environment) that the
prediction and analysis code keys on.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable

SCORE_MIN = -3.0
SCORE_MAX = 3.0

#: Mean-score consistency tolerance for records that carry raw annotations.
GOLD_MEAN_TOL = 1e-9

#: Syntactic frames of clause-embedding verbs. The nine entries cover
#: MegaVeridicality (four argument structures crossed with voice and an
#: eventive/stative complement where applicable); ``V_to_VP`` is the
#: untyped infinitive frame used by corpora that do not mark eventivity.
KNOWN_FRAMES = frozenset(
    {
        "V_that_S",
        "was_Ved_that_S",
        "V_for_NP_to_VP",
        "V_NP_to_VP_ev",
        "V_NP_to_VP_st",
        "NP_was_Ved_to_VP_ev",
        "NP_was_Ved_to_VP_st",
        "V_to_VP_ev",
        "V_to_VP_st",
        "V_to_VP",
    }
)


class FactualityError(Exception):
    """Base class for errors raised by this package."""


class FormatError(FactualityError):
    """A source file does not follow its documented format."""


class Dataset(Enum):
    """The seven supported factuality corpora."""

    MV = "MV"
    CB = "CB"
    RP = "RP"
    FACTBANK = "FactBank"
    MEANTIME = "MEANTIME"
    UW = "UW"
    UDSIH2 = "UDS-IH2"

    @property
    def key(self) -> str:
        """Short lowercase key used in record ids (``fb:test:0``)."""
        return _DATASET_KEYS[self]

    @classmethod
    def parse(cls, text: str) -> "Dataset":
        t = text.strip().lower()
        for ds in cls:
            if t in (ds.value.lower(), ds.name.lower(), ds.key):
                return ds
        raise ValueError(f"unknown dataset {text!r}")


_DATASET_KEYS = {
    Dataset.MV: "mv",
    Dataset.CB: "cb",
    Dataset.RP: "rp",
    Dataset.FACTBANK: "fb",
    Dataset.MEANTIME: "mt",
    Dataset.UW: "uw",
    Dataset.UDSIH2: "uds",
}

#: Datasets whose items are single events embedded under a clause-embedding
#: verb, annotated with per-rater judgments.
EMBEDDED_DATASETS = frozenset({Dataset.MV, Dataset.CB, Dataset.RP})


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"
    UNASSIGNED = "unassigned"


class Category(IntEnum):
    """Three-way factuality category, totally ordered MINUS < NEUTRAL < PLUS."""

    MINUS = 0
    NEUTRAL = 1
    PLUS = 2

    @property
    def symbol(self) -> str:
        return "-o+"[self.value]

    @classmethod
    def from_symbol(cls, symbol: str) -> "Category":
        try:
            return _SYMBOL_TO_CATEGORY[symbol]
        except KeyError:
            raise ValueError(f"unknown category symbol {symbol!r}; expected one of + o -") from None


_SYMBOL_TO_CATEGORY = {"-": Category.MINUS, "o": Category.NEUTRAL, "+": Category.PLUS}


class Polarity(Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Environment(Enum):
    """Entailment-canceling environment embedding the clause-embedding verb.

    ``NONE`` means the verb sits in a plain positive-polarity matrix clause.
    """

    NONE = "none"
    NEGATION = "negation"
    MODAL = "modal"
    QUESTION = "question"
    CONDITIONAL = "conditional"


def validate_score(value: float, what: str = "score") -> float:
    value = float(value)
    if math.isnan(value) or not SCORE_MIN <= value <= SCORE_MAX:
        raise ValueError(f"{what} {value} outside [{SCORE_MIN}, {SCORE_MAX}]")
    return value


def category_to_score(category: Category) -> float:
    """Map a factuality category to its scale anchor: +3, 0 or -3."""
    return {Category.PLUS: 3.0, Category.NEUTRAL: 0.0, Category.MINUS: -3.0}[category]


def score_to_category(score: float, lo: float = -0.5, hi: float = 0.5) -> Category:
    """Bin a mean score into a category.

    Scores below ``lo`` are MINUS, above ``hi`` PLUS, and anything in the
    closed interval [lo, hi] NEUTRAL — boundary values are deliberately
    neutral. The defaults sit midway between the 0 and +/-1 responses of the
    integer annotation scales.
    """
    if lo >= hi:
        raise ValueError(f"thresholds must satisfy lo < hi, got lo={lo}, hi={hi}")
    score = validate_score(score)
    if score < lo:
        return Category.MINUS
    if score > hi:
        return Category.PLUS
    return Category.NEUTRAL


@dataclass(frozen=True)
class EventRecord:
    """One annotated event.

    ``event_span`` is a half-open ``[start, end)`` range into ``tokens``.
    ``annotations`` are the raw per-rater scores after scale conversion; when
    present, ``gold`` must equal their mean to within ``GOLD_MEAN_TOL``.
    """

    id: str
    dataset: Dataset
    sentence: str
    tokens: tuple[str, ...]
    event_span: tuple[int, int]
    gold: float
    split: Split = Split.UNASSIGNED
    annotations: tuple[float, ...] = ()
    verb: str | None = None
    frame: str | None = None
    polarity: Polarity | None = None
    environment: Environment | None = None
    genre: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "annotations", tuple(float(a) for a in self.annotations))
        object.__setattr__(self, "event_span", tuple(self.event_span))
        start, end = self.event_span
        if not (0 <= start < end <= len(self.tokens)):
            raise ValueError(
                f"record {self.id}: span [{start}, {end}) invalid for {len(self.tokens)} tokens"
            )
        validate_score(self.gold, f"record {self.id}: gold")
        for a in self.annotations:
            validate_score(a, f"record {self.id}: annotation")
        if self.annotations:
            mean = sum(self.annotations) / len(self.annotations)
            if abs(self.gold - mean) > GOLD_MEAN_TOL:
                raise ValueError(
                    f"record {self.id}: gold {self.gold} != mean of annotations {mean}"
                )

    @property
    def event_tokens(self) -> tuple[str, ...]:
        start, end = self.event_span
        return self.tokens[start:end]


_OPTIONAL_FIELDS = ("verb", "frame", "polarity", "environment", "genre")


def record_to_dict(record: EventRecord) -> dict:
    """Serialize to the unified item format (optional fields omitted)."""
    out: dict = {
        "id": record.id,
        "dataset": record.dataset.value,
        "split": record.split.value,
        "sentence": record.sentence,
        "tokens": list(record.tokens),
        "event_span": list(record.event_span),
        "gold": record.gold,
        "annotations": list(record.annotations),
    }
    for name in _OPTIONAL_FIELDS:
        value = getattr(record, name)
        if value is not None:
            out[name] = value.value if isinstance(value, Enum) else value
    return out


def record_from_dict(data: dict) -> EventRecord:
    try:
        return EventRecord(
            id=data["id"],
            dataset=Dataset(data["dataset"]),
            split=Split(data.get("split", "unassigned")),
            sentence=data["sentence"],
            tokens=tuple(data["tokens"]),
            event_span=(data["event_span"][0], data["event_span"][1]),
            gold=float(data["gold"]),
            annotations=tuple(data.get("annotations", ())),
            verb=data.get("verb"),
            frame=data.get("frame"),
            polarity=Polarity(data["polarity"]) if "polarity" in data else None,
            environment=Environment(data["environment"]) if "environment" in data else None,
            genre=data.get("genre"),
        )
    except KeyError as exc:
        raise FormatError(f"unified record missing field {exc}") from None


def write_records(path: str | Path, records: Iterable[EventRecord]) -> int:
    """Write records as JSON Lines; returns the number written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def read_records(path: str | Path) -> list[EventRecord]:
    """Read unified JSON Lines records, validating every item."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_dict(json.loads(line)))
            except (json.JSONDecodeError, ValueError, FormatError) as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return records
