"""Ranked-retrieval metrics: P@k, R@k, F1@k, AP@k.

Conventions (documented because @k metrics vary across the literature):

  * P@k divides by k itself, not by the number retrieved, so threshold-induced
    short lists are penalized rather than hidden.
  * AP@k normalizes by min(|relevant|, k), keeping a perfect truncated ranking
    at exactly 1.0.
  * Only the first occurrence of an id in `retrieved` counts.
"""

from __future__ import annotations

from typing import Iterable, Sequence


def _first_occurrences(retrieved: Sequence[str], k: int) -> list[str]:
    seen: set[str] = set()
    unique = []
    for item in retrieved[:k]:
        if item not in seen:
            seen.add(item)
            unique.append(item)
    return unique


def precision_at_k(retrieved: Sequence[str], relevant: Iterable[str], k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    relevant = set(relevant)
    hits = sum(1 for item in _first_occurrences(retrieved, k) if item in relevant)
    return hits / k


def recall_at_k(retrieved: Sequence[str], relevant: Iterable[str], k: int) -> float:
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    hits = sum(1 for item in _first_occurrences(retrieved, k) if item in relevant)
    return hits / len(relevant)


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def average_precision_at_k(retrieved: Sequence[str], relevant: Iterable[str],
                           k: int) -> float:
    relevant = set(relevant)
    if not relevant:
        raise ValueError("relevant set must be non-empty")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    # ranks stay positional: a duplicate consumes its rank but scores nothing
    seen: set[str] = set()
    hits = 0
    total = 0.0
    for rank, item in enumerate(retrieved[:k], start=1):
        if item in seen:
            continue
        seen.add(item)
        if item in relevant:
            hits += 1
            total += hits / rank
    return total / min(len(relevant), k)


def mean(values: Sequence[float]) -> float:
    if not values:
        raise ValueError("cannot average zero values")
    return sum(values) / len(values)
