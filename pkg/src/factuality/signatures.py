"""Lexicalist factuality prediction from verb-frame entailment signatures.

A signature ``X/Y`` states what a clause-embedding verb, in a given syntactic
frame, entails about its complement: ``X`` under positive polarity and ``Y``
under matrix negation (``manage to`` is ``+/-``: "managed to stay" entails
staying, "didn't manage to stay" entails not staying). Projection through the
other entailment-canceling environments (modal, question, conditional) is
governed by a policy, because the literature disagrees on whether they all
behave like negation.
"""

from __future__ import annotations

from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .core import (
    KNOWN_FRAMES,
    Category,
    Environment,
    EventRecord,
    FormatError,
    Polarity,
    category_to_score,
)
from .validation import check_fitted


class Signature(NamedTuple):
    """Complement entailment under positive polarity (`pos`) and negation (`neg`)."""

    pos: Category
    neg: Category

    def __str__(self) -> str:
        return f"{self.pos.symbol}/{self.neg.symbol}"


class EnvironmentPolicy(Enum):
    """How non-negation canceling environments project a signature.

    UNIFORM treats modal/question/conditional like negation; NEGATION_ONLY
    neutralizes them, reflecting the observation that e.g. factives keep
    their complement factual under negation but not under questions.
    """

    UNIFORM = "uniform"
    NEGATION_ONLY = "negation-only"


#: Lookup fallbacks, tried in order when a verb has no entry for the exact
#: frame: passive frames inherit from their active counterpart, and the
#: untyped infinitive (corpora that do not mark eventivity) inherits from the
#: typed infinitive entries.
FRAME_FALLBACKS = {
    "was_Ved_that_S": ("V_that_S",),
    "NP_was_Ved_to_VP_ev": ("V_NP_to_VP_ev",),
    "NP_was_Ved_to_VP_st": ("V_NP_to_VP_st",),
    "V_to_VP": ("V_to_VP_ev", "V_to_VP_st"),
}

SignatureLexicon = dict[tuple[str, str], Signature]


def packaged_data_path(name: str) -> Path:
    """Location of a data file shipped with the package."""
    return Path(str(resources.files("factuality") / "data" / name))


def packaged_lexicon_path() -> Path:
    """Location of the curated starter lexicon shipped with the package."""
    return packaged_data_path("signatures.tsv")


def load_lexicon(path: str | Path) -> SignatureLexicon:
    """Read a signature lexicon from TSV rows ``verb<TAB>frame<TAB>X<TAB>Y``.

    X and Y use the symbols ``+``, ``o``, ``-``. Verbs are case-normalized;
    frames must come from the registered frame vocabulary; duplicate
    (verb, frame) keys are rejected.
    """
    lexicon: SignatureLexicon = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected 4 tab-separated fields")
            verb, frame, pos_sym, neg_sym = (p.strip() for p in parts)
            if frame not in KNOWN_FRAMES:
                raise FormatError(f"{path}:{lineno}: unknown frame {frame!r}")
            try:
                sig = Signature(Category.from_symbol(pos_sym), Category.from_symbol(neg_sym))
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
            key = (verb.lower(), frame)
            if key in lexicon:
                raise FormatError(f"{path}:{lineno}: duplicate entry for {key}")
            lexicon[key] = sig
    return lexicon


def project(sig: Signature, env: Environment, policy: EnvironmentPolicy) -> Category:
    """Category of the complement given the embedding environment."""
    if env is Environment.NONE:
        return sig.pos
    if env is Environment.NEGATION:
        return sig.neg
    if policy is EnvironmentPolicy.UNIFORM:
        return sig.neg
    return Category.NEUTRAL


def lookup_signature(lexicon: Mapping[tuple[str, str], Signature], verb: str | None, frame: str | None) -> Signature | None:
    """Exact (verb, frame) lookup with frame fallbacks (passive, untyped)."""
    if verb is None or frame is None:
        return None
    verb = verb.lower()
    for candidate in (frame, *FRAME_FALLBACKS.get(frame, ())):
        sig = lexicon.get((verb, candidate))
        if sig is not None:
            return sig
    return None


class SignaturePrediction(NamedTuple):
    score: float
    category: Category


def predict_item(
    item: EventRecord,
    lexicon: Mapping[tuple[str, str], Signature],
    policy: EnvironmentPolicy = EnvironmentPolicy.UNIFORM,
) -> SignaturePrediction | None:
    """Signature-based prediction for one item, or None when no rule applies.

    The None outcome ("no signature") is distinct from an error: downstream
    analyses must be able to tell "no rule" from "rule says neutral". Items
    without an explicit environment project through NONE or NEGATION
    according to their polarity.
    """
    if item.verb is None:
        raise ValueError(f"record {item.id} has no verb; cannot apply signatures")
    sig = lookup_signature(lexicon, item.verb, item.frame)
    if sig is None:
        return None
    env = item.environment
    if env is None:
        env = Environment.NEGATION if item.polarity is Polarity.NEGATIVE else Environment.NONE
    category = project(sig, env, policy)
    return SignaturePrediction(category_to_score(category), category)


class SignaturePredictor(BaseEstimator):
    """Estimator facade over the signature lexicon.

    Parameters
    ----------
    lexicon : mapping, path to a lexicon TSV, or None for the packaged one.
    policy : "uniform" or "negation-only" (or an EnvironmentPolicy).

    ``predict`` maps records to scores in {-3, 0, +3}, with NaN marking items
    whose verb-frame pair has no signature.
    """

    def __init__(self, lexicon=None, policy="uniform"):
        self.lexicon = lexicon
        self.policy = policy

    def fit(self, X: Sequence[EventRecord] | None = None, y=None) -> "SignaturePredictor":
        if self.lexicon is None:
            self.lexicon_ = load_lexicon(packaged_lexicon_path())
        elif isinstance(self.lexicon, (str, Path)):
            self.lexicon_ = load_lexicon(self.lexicon)
        else:
            self.lexicon_ = dict(self.lexicon)
        self.policy_ = (
            self.policy
            if isinstance(self.policy, EnvironmentPolicy)
            else EnvironmentPolicy(self.policy)
        )
        return self

    def predict_detail(self, records: Iterable[EventRecord]) -> list[SignaturePrediction | None]:
        check_fitted(self, "lexicon_")
        return [predict_item(r, self.lexicon_, self.policy_) for r in records]

    def predict(self, records: Iterable[EventRecord]) -> np.ndarray:
        detail = self.predict_detail(records)
        return np.array([np.nan if p is None else p.score for p in detail])

    def coverage(self, records: Sequence[EventRecord]) -> float:
        """Fraction of records with an applicable signature."""
        detail = self.predict_detail(records)
        return sum(p is not None for p in detail) / len(detail) if detail else 0.0
