"""Event-span resolution for embedded-clause items.

CB and RP annotators rated the content of a complement clause, which may
itself carry polarity or modality operators; the newswire corpora annotate a
single event word, implicitly stripping such operators. To keep annotations
comparable, an embedded-clause item keeps the whole complement clause as its
span when the complement contains a negation, a modal, or an adverb (the
operators would be lost by narrowing), and otherwise narrows to the clause's
root token. Each decision is flagged so a human can audit the outcome.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..core import EventRecord, FactualityError
from .conllu import DependencyParse

#: Modal operators that force whole-clause spans; "have to" is detected as a
#: lemma bigram.
MODAL_WORDS = frozenset(
    {"should", "could", "can", "must", "perhaps", "might", "maybe", "may", "shall", "would"}
)

_COMPLEMENT_RELATIONS = ("ccomp", "xcomp")


class SpanResolutionError(FactualityError):
    """The parse does not support resolving the item's event span."""


@dataclass(frozen=True)
class SpanDecision:
    """Audit record of one span-resolution outcome."""

    item_id: str
    branch: str  # "negation" | "modal" | "adverb" | "root"
    trigger: str | None  # token that fired the whole-clause branch
    clause_span: tuple[int, int]

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "branch": self.branch,
            "trigger": self.trigger,
            "clause_span": list(self.clause_span),
        }


def _is_negation(token) -> bool:
    # UD v1 used the dedicated `neg` relation; v2 marks Polarity=Neg instead
    return token.deprel == "neg" or (
        token.deprel == "advmod" and "Polarity=Neg" in token.feats
    )


def _find_complement_root(parse: DependencyParse, verb: str) -> int:
    verb = verb.lower()
    candidates = [
        t.index
        for t in parse.tokens
        if t.deprel in _COMPLEMENT_RELATIONS
        and t.head >= 0
        and parse.tokens[t.head].lemma.lower() == verb
    ]
    if not candidates:
        raise SpanResolutionError(f"no clausal complement of {verb!r} found in parse")
    return candidates[0]


def resolve_event_span(
    item: EventRecord, parse: DependencyParse
) -> tuple[EventRecord, SpanDecision]:
    """Narrow an embedded-clause item's span using its dependency parse.

    Returns the updated record and a decision flag recording which branch
    fired, for manual verification.
    """
    if len(parse) != len(item.tokens):
        raise SpanResolutionError(
            f"record {item.id}: parse has {len(parse)} tokens, item has {len(item.tokens)}"
        )
    if item.verb is None:
        raise SpanResolutionError(f"record {item.id} has no embedding verb")

    root = _find_complement_root(parse, item.verb)
    subtree = parse.subtree(root)
    # the leading complementizer/infinitive marker is not rated content;
    # clause-internal marks (e.g. the "to" of "have to") must stay
    content = list(subtree)
    while len(content) > 1 and parse.tokens[content[0]].deprel == "mark":
        content.pop(0)
    clause_span = (content[0], content[-1] + 1)

    branch, trigger = "root", None
    in_clause = set(content)
    for i in content:
        tok = parse.tokens[i]
        if _is_negation(tok):
            branch, trigger = "negation", tok.form
            break
    if branch == "root":
        for i in content:
            tok = parse.tokens[i]
            form = tok.form.lower()
            if form in MODAL_WORDS:
                branch, trigger = "modal", tok.form
                break
            if tok.lemma.lower() == "have" and (i + 1) in in_clause and parse.tokens[
                i + 1
            ].form.lower() == "to":
                branch, trigger = "modal", f"{tok.form} to"
                break
    if branch == "root":
        for i in content:
            if parse.tokens[i].upos == "ADV":
                branch, trigger = "adverb", parse.tokens[i].form
                break

    span = clause_span if branch != "root" else (root, root + 1)
    decision = SpanDecision(
        item_id=item.id, branch=branch, trigger=trigger, clause_span=clause_span
    )
    return replace(item, event_span=span), decision
