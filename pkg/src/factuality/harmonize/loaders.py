"""Corpus loaders: native distribution formats to unified EventRecords.

Each loader applies the scale conversion and exclusion rules appropriate to
its corpus and is a pure, order-stable function of the file contents:

* MegaVeridicality: per-rater yes/maybe/no responses mapped to +3/0/-3,
  gold = mean per item.
* RP: three integer ratings in [-2, 2] scaled by 1.5; items with
  mixed-sign ratings or on the single-span exclusion list are dropped.
* CB: >= 8 integer ratings in [-3, 3]; items kept only when at least 80%
  of ratings fall into one of the bins [-3, -1], {0}, [1, 3].
* FactBank / MEANTIME / UW / UDS-IH2: token-indexed events with one
  pre-unified real-valued score, read verbatim.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Collection, Iterable

from ..core import (
    KNOWN_FRAMES,
    Dataset,
    Environment,
    EventRecord,
    FormatError,
    Polarity,
    Split,
)

_TOKEN_RE = re.compile(r"[\w'-]+|[^\w\s]")

#: MegaVeridicality's source frame/voice pairs mapped to canonical frames.
MV_FRAME_VOICE = {
    ("that_S", "active"): "V_that_S",
    ("that_S", "passive"): "was_Ved_that_S",
    ("for_NP_to_VP", "active"): "V_for_NP_to_VP",
    ("NP_to_VPeventive", "active"): "V_NP_to_VP_ev",
    ("NP_to_VPstative", "active"): "V_NP_to_VP_st",
    ("NP_to_VPeventive", "passive"): "NP_was_Ved_to_VP_ev",
    ("NP_to_VPstative", "passive"): "NP_was_Ved_to_VP_st",
    ("to_VPeventive", "active"): "V_to_VP_ev",
    ("to_VPstative", "active"): "V_to_VP_st",
}

_MV_RESPONSES = {"yes": 3.0, "maybe": 0.0, "no": -3.0}

#: Embedded predicates of the semantically bleached templates.
_MV_PREDICATES = ("happened", "happen", "do", "have")


@dataclass
class FilterReport:
    """Outcome of one exclusion rule: kept + removed equals the rule's input."""

    rule: str
    kept: int
    removed: int
    removed_ids: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "kept": self.kept,
            "removed": self.removed,
            "removed_ids": list(self.removed_ids),
            "warnings": list(self.warnings),
        }


def tokenize(sentence: str) -> tuple[str, ...]:
    """Whitespace/punctuation split used when a corpus ships raw sentences."""
    return tuple(_TOKEN_RE.findall(sentence))


def read_id_list(path: str | Path) -> list[str]:
    """Read one id per line; blank lines and # comments are skipped."""
    ids = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                ids.append(line)
    return ids


def _open_csv(path: str | Path, required: Iterable[str]):
    fh = open(path, encoding="utf-8", newline="")
    reader = csv.DictReader(fh)
    fields = [f.strip().lower() for f in reader.fieldnames or []]
    reader.fieldnames = fields
    missing = [c for c in required if c not in fields]
    if missing:
        fh.close()
        raise FormatError(f"{path}: missing required columns: {', '.join(missing)}")
    return fh, reader


def _cell(row: dict, column: str) -> str:
    return (row.get(column) or "").strip()


def _parse_polarity(value: str, where: str) -> Polarity:
    try:
        return Polarity(value.lower())
    except ValueError:
        raise FormatError(f"{where}: unknown polarity {value!r}") from None


def _mv_event_span(tokens: tuple[str, ...]) -> tuple[int, int]:
    for i in range(len(tokens) - 1, -1, -1):
        if tokens[i].lower() in _MV_PREDICATES:
            return (i, i + 1)
    # no template predicate: fall back to the last word token
    for i in range(len(tokens) - 1, -1, -1):
        if tokens[i][0].isalnum():
            return (i, i + 1)
    return (len(tokens) - 1, len(tokens))


def load_megaveridicality(path: str | Path) -> list[EventRecord]:
    """Load MegaVeridicality-format CSV (one row per rater response).

    Required columns: verb, frame, polarity, sentence, veridicality
    (yes/maybe/no), plus voice (active/passive) unless the frame column
    already holds canonical frame identifiers. Optional: genre.
    Rows sharing (verb, canonical frame, polarity, sentence) are one item;
    gold is the mean of the mapped responses.
    """
    stem = Path(path).stem
    fh, reader = _open_csv(path, ("verb", "frame", "polarity", "sentence", "veridicality"))
    has_voice = "voice" in reader.fieldnames
    items: dict[tuple, dict] = {}
    with fh:
        for row in reader:
            where = f"{path}:{reader.line_num}"
            verb = _cell(row, "verb").lower()
            sentence = _cell(row, "sentence")
            if not verb or not sentence:
                raise FormatError(f"{where}: empty verb or sentence")
            if has_voice:
                voice = _cell(row, "voice").lower()
                frame_key = (_cell(row, "frame"), voice)
                frame = MV_FRAME_VOICE.get(frame_key)
                if frame is None:
                    raise FormatError(f"{where}: unknown frame/voice combination {frame_key}")
            else:
                frame = _cell(row, "frame")
                if frame not in KNOWN_FRAMES:
                    raise FormatError(f"{where}: unknown frame {frame!r}")
            polarity = _parse_polarity(_cell(row, "polarity"), where)
            response = _cell(row, "veridicality").lower()
            if response not in _MV_RESPONSES:
                raise FormatError(f"{where}: unknown response {response!r} (expected yes/maybe/no)")
            key = (verb, frame, polarity, sentence)
            item = items.setdefault(
                key, {"responses": [], "genre": _cell(row, "genre") or None}
            )
            item["responses"].append(_MV_RESPONSES[response])

    records = []
    for ordinal, ((verb, frame, polarity, sentence), item) in enumerate(items.items()):
        tokens = tokenize(sentence)
        responses = item["responses"]
        records.append(
            EventRecord(
                id=f"mv:{stem}:{ordinal}",
                dataset=Dataset.MV,
                sentence=sentence,
                tokens=tokens,
                event_span=_mv_event_span(tokens),
                gold=sum(responses) / len(responses),
                annotations=tuple(responses),
                verb=verb,
                frame=frame,
                polarity=polarity,
                environment=Environment.NEGATION
                if polarity is Polarity.NEGATIVE
                else Environment.NONE,
                genre=item["genre"],
            )
        )
    return records


def _parse_int_annotation(text: str, lo: int, hi: int, where: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise FormatError(f"{where}: annotation {text!r} is not an integer") from None
    if not lo <= value <= hi:
        raise FormatError(f"{where}: annotation {value} outside [{lo}, {hi}]")
    return value


def load_rp(
    path: str | Path, exclude_ids: Collection[str] | str | Path | None = None
) -> tuple[list[EventRecord], list[FilterReport]]:
    """Load RP-format CSV (one row per item, three integer ratings).

    Required columns: sentence, verb, frame, polarity, ann1, ann2, ann3 with
    ratings in [-2, 2]; optional genre. Ratings are scaled by 1.5 onto the
    unified range and gold is their mean. Two exclusion rules run in order,
    each with its own FilterReport: the supplied single-span exclusion list
    (ids use the source ordinal, so they are stable under re-runs), then
    removal of items whose ratings disagree in sign (zeros are compatible
    with either sign).
    """
    stem = Path(path).stem
    if exclude_ids is None:
        excluded = set()
    elif isinstance(exclude_ids, (str, Path)):
        excluded = set(read_id_list(exclude_ids))
    else:
        excluded = set(exclude_ids)

    fh, reader = _open_csv(
        path, ("sentence", "verb", "frame", "polarity", "ann1", "ann2", "ann3")
    )
    loaded: list[EventRecord] = []
    with fh:
        for ordinal, row in enumerate(reader):
            where = f"{path}:{reader.line_num}"
            sentence = _cell(row, "sentence")
            verb = _cell(row, "verb").lower()
            frame = _cell(row, "frame")
            if frame not in KNOWN_FRAMES:
                raise FormatError(f"{where}: unknown frame {frame!r}")
            polarity = _parse_polarity(_cell(row, "polarity"), where)
            raw = [
                _parse_int_annotation(_cell(row, col), -2, 2, where)
                for col in ("ann1", "ann2", "ann3")
            ]
            converted = tuple(1.5 * a for a in raw)
            tokens = tokenize(sentence)
            loaded.append(
                EventRecord(
                    id=f"rp:{stem}:{ordinal}",
                    dataset=Dataset.RP,
                    sentence=sentence,
                    tokens=tokens,
                    event_span=(0, len(tokens)),
                    gold=sum(converted) / len(converted),
                    annotations=converted,
                    verb=verb,
                    frame=frame,
                    polarity=polarity,
                    environment=Environment.NEGATION
                    if polarity is Polarity.NEGATIVE
                    else Environment.NONE,
                    genre=_cell(row, "genre") or None,
                )
            )

    after_span = [r for r in loaded if r.id not in excluded]
    span_report = FilterReport(
        rule="single-span exclusion list",
        kept=len(after_span),
        removed=len(loaded) - len(after_span),
        removed_ids=[r.id for r in loaded if r.id in excluded],
    )

    def sign_disagrees(record: EventRecord) -> bool:
        signs = {a > 0 for a in record.annotations if a != 0}
        return len(signs) > 1

    kept = [r for r in after_span if not sign_disagrees(r)]
    sign_report = FilterReport(
        rule="mixed-sign annotations",
        kept=len(kept),
        removed=len(after_span) - len(kept),
        removed_ids=[r.id for r in after_span if sign_disagrees(r)],
    )
    return kept, [span_report, sign_report]


_CB_BINS = ((-3, -1), (0, 0), (1, 3))


def _cb_high_agreement(annotations: list[int]) -> bool:
    counts = [sum(1 for a in annotations if lo <= a <= hi) for lo, hi in _CB_BINS]
    # integer comparison: max_count / total >= 0.8
    return max(counts) * 5 >= len(annotations) * 4


def load_cb(path: str | Path) -> tuple[list[EventRecord], list[FilterReport]]:
    """Load CB-format CSV (one row per rater response).

    Required columns: item, verb, environment (negation/modal/question/
    conditional), sentence, answer (integer in [-3, 3]); optional genre and
    context. Items where fewer than 80% of the answers share a bin among
    [-3, -1], {0}, [1, 3] are discarded; items with fewer than 8 answers are
    kept but flagged in the report warnings. Gold is the mean over all
    answers of a kept item. The event span initially covers the whole
    sentence; pass a dependency parse to ``resolve_event_span`` to narrow it.
    """
    stem = Path(path).stem
    fh, reader = _open_csv(path, ("item", "verb", "environment", "sentence", "answer"))
    items: dict[str, dict] = {}
    with fh:
        for row in reader:
            where = f"{path}:{reader.line_num}"
            key = _cell(row, "item")
            if not key:
                raise FormatError(f"{where}: empty item id")
            env_text = _cell(row, "environment").lower()
            try:
                environment = Environment(env_text)
            except ValueError:
                raise FormatError(f"{where}: unknown environment {env_text!r}") from None
            answer = _parse_int_annotation(_cell(row, "answer"), -3, 3, where)
            item = items.setdefault(
                key,
                {
                    "verb": _cell(row, "verb").lower(),
                    "environment": environment,
                    "sentence": _cell(row, "sentence"),
                    "genre": _cell(row, "genre") or None,
                    "answers": [],
                },
            )
            item["answers"].append(answer)

    records: list[EventRecord] = []
    removed_ids: list[str] = []
    warnings: list[str] = []
    for ordinal, (key, item) in enumerate(items.items()):
        record_id = f"cb:{stem}:{ordinal}"
        answers = item["answers"]
        if len(answers) < 8:
            warnings.append(f"{record_id} (source item {key}) has only {len(answers)} annotations")
        if not _cb_high_agreement(answers):
            removed_ids.append(record_id)
            continue
        tokens = tokenize(item["sentence"])
        records.append(
            EventRecord(
                id=record_id,
                dataset=Dataset.CB,
                sentence=item["sentence"],
                tokens=tokens,
                event_span=(0, len(tokens)),
                gold=sum(answers) / len(answers),
                annotations=tuple(float(a) for a in answers),
                verb=item["verb"],
                frame="V_that_S",
                polarity=Polarity.NEGATIVE
                if item["environment"] is Environment.NEGATION
                else Polarity.POSITIVE,
                environment=item["environment"],
                genre=item["genre"],
            )
        )
    report = FilterReport(
        rule="80% same-bin agreement",
        kept=len(records),
        removed=len(removed_ids),
        removed_ids=removed_ids,
        warnings=warnings,
    )
    return records, [report]


def load_unified(
    path: str | Path, dataset: Dataset, split: Split = Split.UNASSIGNED
) -> list[EventRecord]:
    """Load a pre-unified corpus file (FactBank, MEANTIME, UW, UDS-IH2).

    Format: one token per line as ``index<TAB>token<TAB>label`` with 1-based
    indices, label ``_`` for unannotated tokens or a real score in [-3, 3];
    sentences are separated by blank lines. Every labeled token becomes one
    record with a single-token span; linguistic-feature fields stay unset.
    """
    stem = Path(path).stem
    records: list[EventRecord] = []
    sentence_tokens: list[str] = []
    sentence_labels: list[tuple[int, float]] = []
    ordinal = 0

    def flush(where: str) -> None:
        nonlocal ordinal, sentence_tokens, sentence_labels
        if not sentence_tokens:
            return
        sentence = " ".join(sentence_tokens)
        for index, score in sentence_labels:
            if index >= len(sentence_tokens):
                raise FormatError(f"{where}: event index {index + 1} outside sentence")
            records.append(
                EventRecord(
                    id=f"{dataset.key}:{stem}:{ordinal}",
                    dataset=dataset,
                    split=split,
                    sentence=sentence,
                    tokens=tuple(sentence_tokens),
                    event_span=(index, index + 1),
                    gold=score,
                )
            )
            ordinal += 1
        sentence_tokens = []
        sentence_labels = []

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            where = f"{path}:{lineno}"
            if not line.strip():
                flush(where)
                continue
            if line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 3:
                raise FormatError(f"{where}: expected `index<TAB>token<TAB>label`")
            try:
                index = int(cols[0]) - 1
            except ValueError:
                raise FormatError(f"{where}: non-integer token index {cols[0]!r}") from None
            if index != len(sentence_tokens):
                raise FormatError(
                    f"{where}: token index {cols[0]} out of sequence (expected {len(sentence_tokens) + 1})"
                )
            sentence_tokens.append(cols[1])
            label = cols[2].strip()
            if label != "_":
                try:
                    score = float(label)
                except ValueError:
                    raise FormatError(f"{where}: malformed score {label!r}") from None
                if not -3.0 <= score <= 3.0:
                    raise FormatError(f"{where}: score {score} outside [-3, 3]")
                sentence_labels.append((index, score))
        flush(f"{path}:{lineno + 1}")
    return records
