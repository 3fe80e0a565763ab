"""
Separable set functions: f(A) = f(f(B), f(A \\ B)) for every split of A.
A tag is one of SEPARABLE_TAGS, or a tuple of them applied
componentwise to tuple values.
"""
from __future__ import annotations

import operator
from functools import reduce
from typing import Any, Callable, Iterable, Union

from mpclib.constants import SEPARABLE_TAGS
from mpclib.errors import NotSeparableError

Tag = Union[str, tuple]


COMBINERS: dict[str, Callable[[Any, Any], Any]] = {
    "sum": operator.add,
    "max": max,
    "min": min,
    "or": lambda a, b: bool(a) or bool(b),
    "and": lambda a, b: bool(a) and bool(b),
}


def check_separable(tag: Tag) -> Tag:
    if isinstance(tag, tuple):
        if not tag:
            raise NotSeparableError("empty tuple of aggregation tags")
        for sub_tag in tag:
            check_separable(sub_tag)
        return tag
    if tag not in SEPARABLE_TAGS:
        raise NotSeparableError(
            f"{tag!r} is not separable; choose one of {', '.join(SEPARABLE_TAGS)}"
        )
    return tag


def combine(tag: Tag, a: Any, b: Any) -> Any:
    if isinstance(tag, tuple):
        return tuple(
            combine(sub_tag, x, y)
            for sub_tag, x, y in zip(tag, a, b)
        )
    return COMBINERS[tag](a, b)


def fold(tag: Tag, values: Iterable[Any]) -> Any:
    """Folds values with tag; None when there is nothing to fold."""
    iterator = iter(values)
    try:
        first = next(iterator)
    except StopIteration:
        return None
    if tag in ("or", "and"):
        first = bool(first)
    return reduce(lambda a, b: combine(tag, a, b), iterator, first)
