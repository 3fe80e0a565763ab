from __future__ import annotations

import copy
import itertools as it
from typing import Any

from mpclib.errors import ConfigurationError


def merge_dicts_recursively(*dicts: dict) -> dict:
    """
    Creates a dict whose keyset is the union of all the
    input dictionaries. Dicts later in the list have higher
    priority, and values that are dicts on both sides are
    merged rather than replaced.
    """
    result: dict = dict()
    for key, value in it.chain(*[d.items() for d in dicts]):
        current = result.get(key)
        if isinstance(current, dict) and isinstance(value, dict):
            result[key] = merge_dicts_recursively(current, value)
        else:
            result[key] = value
    return result


def class_configs(cls: type) -> list[dict]:
    # Base classes first, so subclasses win when merged
    return [
        klass.__dict__["CONFIG"]
        for klass in reversed(cls.__mro__)
        if "CONFIG" in klass.__dict__
    ]


def digest_config(obj: Any, kwargs: dict) -> None:
    """
    Sets every CONFIG entry found along the class hierarchy of
    obj as an attribute, with explicit kwargs taking priority.

    Keys that no CONFIG in the hierarchy declares are rejected,
    so a misspelled option in a YAML file fails loudly instead of
    being ignored.
    """
    configs = class_configs(type(obj))
    known = set(it.chain(*[config.keys() for config in configs]))
    unknown = sorted(set(kwargs) - known)
    if unknown:
        raise ConfigurationError(
            f"{type(obj).__name__} got unknown option(s): {', '.join(unknown)}"
        )
    merged = merge_dicts_recursively(*configs, kwargs)
    for key, value in merged.items():
        setattr(obj, key, copy.copy(value))
