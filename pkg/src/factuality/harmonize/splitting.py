"""Deterministic stratified train/dev/test assignment.

Items are grouped by the stratification key (the clause-embedding verb),
shuffled with a seeded generator inside each group, and allocated to splits
by largest-remainder rounding, so every group's split shares track the
global ratios to within one item and identical inputs reproduce identical
assignments.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, replace
from typing import Sequence

from ..core import EventRecord, Split

_SPLIT_ORDER = (Split.TRAIN, Split.DEV, Split.TEST)


@dataclass(frozen=True)
class SplitSpec:
    """Ratios must be nonnegative and sum to 1 (tolerance 1e-9)."""

    ratios: tuple[float, float, float]
    seed: int
    stratify: str | None = "verb"

    def __post_init__(self) -> None:
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        if len(self.ratios) != 3:
            raise ValueError("ratios must be a (train, dev, test) triple")
        if any(r < 0 for r in self.ratios):
            raise ValueError(f"ratios must be nonnegative, got {self.ratios}")
        if abs(sum(self.ratios) - 1.0) > 1e-9:
            raise ValueError(f"ratios must sum to 1, got {sum(self.ratios)}")
        if self.stratify not in (None, "verb"):
            raise ValueError(f"unsupported stratification key {self.stratify!r}")


def allocate_counts(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder apportionment of ``n`` items across the ratios.

    Ties on the fractional remainder are resolved in split order
    (train, dev, test), keeping allocation deterministic.
    """
    quotas = [n * r for r in ratios]
    counts = [math.floor(q) for q in quotas]
    leftovers = n - sum(counts)
    by_remainder = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in by_remainder[:leftovers]:
        counts[i] += 1
    return counts


def stratified_split(items: Sequence[EventRecord], spec: SplitSpec) -> list[EventRecord]:
    """Assign splits; returns new records in the original item order."""
    if spec.stratify == "verb":
        missing = [r.id for r in items if r.verb is None]
        if missing:
            raise ValueError(
                f"{len(missing)} items lack a verb for stratification: {', '.join(missing[:10])}"
            )
        groups: dict[str, list[int]] = {}
        for i, record in enumerate(items):
            groups.setdefault(record.verb, []).append(i)
    else:
        groups = {"": list(range(len(items)))}

    rng = random.Random(spec.seed)
    assignment: dict[int, Split] = {}
    for key in sorted(groups):
        indices = list(groups[key])
        rng.shuffle(indices)
        counts = allocate_counts(len(indices), spec.ratios)
        cursor = 0
        for split, count in zip(_SPLIT_ORDER, counts):
            for i in indices[cursor : cursor + count]:
                assignment[i] = split
            cursor += count
    return [replace(record, split=assignment[i]) for i, record in enumerate(items)]
