from __future__ import annotations

from typing import Iterable, TypeVar

T = TypeVar("T")


def pack_by_weight(
    items: Iterable[T],
    weights: Iterable[int],
    capacity: int
) -> list[tuple[list[T], int]]:
    """
    Groups consecutive items into batches whose total weight stays
    within capacity. Returns (batch, weight) pairs in input order.
    An item heavier than capacity gets a batch of its own.
    """
    batches: list[tuple[list[T], int]] = []
    current: list[T] = []
    current_weight = 0
    for item, weight in zip(items, weights):
        if current and current_weight + weight > capacity:
            batches.append((current, current_weight))
            current, current_weight = [], 0
        current.append(item)
        current_weight += weight
    if current:
        batches.append((current, current_weight))
    return batches
