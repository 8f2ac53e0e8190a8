"""Minimal CoNLL-U reader for the dependency parses consumed at ingest time.

Only the columns the span-resolution rules need are kept: form, lemma, UPOS,
morphological features, head and relation. Multiword-token ranges and empty
nodes are skipped so token indices line up with the plain token sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..core import FormatError


@dataclass(frozen=True)
class ParseToken:
    index: int  # 0-based position in the sentence
    form: str
    lemma: str
    upos: str
    feats: str
    head: int  # 0-based head position, -1 for the sentence root
    deprel: str


@dataclass(frozen=True)
class DependencyParse:
    sent_id: str | None
    tokens: tuple[ParseToken, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def children(self, index: int) -> list[int]:
        return [t.index for t in self.tokens if t.head == index]

    def subtree(self, index: int) -> list[int]:
        """Indices of the subtree rooted at ``index`` (inclusive), sorted."""
        seen = {index}
        frontier = [index]
        while frontier:
            nxt = [t.index for t in self.tokens if t.head in frontier and t.index not in seen]
            seen.update(nxt)
            frontier = nxt
        return sorted(seen)


def read_conllu(path: str | Path) -> list[DependencyParse]:
    """Parse a CoNLL-U file into one DependencyParse per sentence."""
    parses: list[DependencyParse] = []
    tokens: list[ParseToken] = []
    sent_id: str | None = None

    def flush(lineno: int) -> None:
        nonlocal tokens, sent_id
        if tokens:
            for t in tokens:
                if t.head >= len(tokens):
                    raise FormatError(f"{path}:{lineno}: head {t.head + 1} out of range")
            parses.append(DependencyParse(sent_id=sent_id, tokens=tuple(tokens)))
        tokens = []
        sent_id = None

    with open(path, encoding="utf-8") as fh:
        lineno = 0
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                flush(lineno)
                continue
            if line.startswith("#"):
                if line[1:].strip().startswith("sent_id"):
                    _, _, value = line.partition("=")
                    sent_id = value.strip()
                continue
            cols = line.split("\t")
            if len(cols) < 8:
                raise FormatError(f"{path}:{lineno}: expected >= 8 tab-separated columns")
            tok_id = cols[0]
            if "-" in tok_id or "." in tok_id:
                continue  # multiword-token range / empty node
            try:
                index = int(tok_id) - 1
                head = int(cols[6]) - 1
            except ValueError:
                raise FormatError(f"{path}:{lineno}: non-integer token or head id") from None
            if index != len(tokens):
                raise FormatError(
                    f"{path}:{lineno}: token id {tok_id} out of sequence (expected {len(tokens) + 1})"
                )
            tokens.append(
                ParseToken(
                    index=index,
                    form=cols[1],
                    lemma=cols[2],
                    upos=cols[3],
                    feats=cols[5],
                    head=head,
                    deprel=cols[7],
                )
            )
        flush(lineno + 1)
    return parses
