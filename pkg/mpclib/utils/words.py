"""
Word accounting. A word is ceil(log2 n) bits, enough for one node id;
every payload, state and ball is measured in words.
"""
from __future__ import annotations

import dataclasses
from typing import Any


def int_words(value: int, word_bits: int) -> int:
    bits = abs(int(value)).bit_length() + (1 if value < 0 else 0)
    return max(1, -(-bits // word_bits))


def payload_words(payload: Any, word_bits: int) -> int:
    """
    Words needed to ship payload: one word per flag or small integer,
    ceil(bits / word_bits) per large integer, summed over tuples.
    """
    if payload is None:
        return 0
    if isinstance(payload, bool):
        return 1
    if isinstance(payload, int):
        return int_words(payload, word_bits)
    if isinstance(payload, float):
        return 1
    if isinstance(payload, (tuple, list, frozenset, set)):
        return sum(payload_words(item, word_bits) for item in payload)
    if dataclasses.is_dataclass(payload):
        return state_words(payload, word_bits)
    raise TypeError(f"cannot measure payload of type {type(payload).__name__}")


def state_words(state: Any, word_bits: int) -> int:
    """
    Words occupied by a node state. Dataclass fields are measured one
    by one, with all boolean fields sharing a single flags word.
    """
    if not dataclasses.is_dataclass(state):
        return payload_words(state, word_bits)
    total = 0
    has_flags = False
    for field in dataclasses.fields(state):
        value = getattr(state, field.name)
        if isinstance(value, bool):
            has_flags = True
        else:
            total += payload_words(value, word_bits)
    return total + int(has_flags)
