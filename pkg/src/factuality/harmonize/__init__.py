"""Corpus harmonization: loaders, span resolution, and split assignment."""

from .conllu import DependencyParse, ParseToken, read_conllu
from .loaders import (
    FilterReport,
    load_cb,
    load_megaveridicality,
    load_rp,
    load_unified,
    read_id_list,
    tokenize,
)
from .spans import MODAL_WORDS, SpanDecision, SpanResolutionError, resolve_event_span
from .splitting import SplitSpec, allocate_counts, stratified_split

__all__ = [
    "DependencyParse",
    "FilterReport",
    "MODAL_WORDS",
    "ParseToken",
    "SpanDecision",
    "SpanResolutionError",
    "SplitSpec",
    "allocate_counts",
    "load_cb",
    "load_megaveridicality",
    "load_rp",
    "load_unified",
    "read_conllu",
    "read_id_list",
    "resolve_event_span",
    "stratified_split",
    "tokenize",
]
