"""
Sparsification parameters for the ruling-set pipelines. Stage i of a
beta-ruling set sparsifies with f_i = 2^((log2 Delta)^delta_i); the
schedules below only differ in how the exponents delta_i are chosen.
"""
from __future__ import annotations

import math

from mpclib.constants import INPUT_LINEAR
from mpclib.constants import SCHEDULE_BOUNDED
from mpclib.constants import SCHEDULE_INPUT_LINEAR
from mpclib.constants import SCHEDULE_UNRESTRICTED
from mpclib.constants import SCHEDULES
from mpclib.errors import ConfigurationError
from mpclib.utils.simple_functions import log2

__all__ = [
    "schedule_for_memory",
    "stage_exponents",
    "f_schedule",
    "auto_beta",
    "predicted_rounds",
]


def schedule_for_memory(memory_mode: str) -> str:
    if memory_mode == INPUT_LINEAR:
        return SCHEDULE_INPUT_LINEAR
    return SCHEDULE_UNRESTRICTED


def stage_exponents(beta: int, schedule: str) -> list[float]:
    """delta_1, ..., delta_{beta-1}."""
    if beta < 2:
        raise ConfigurationError(f"ruling sets need beta >= 2, got {beta}")
    if schedule not in SCHEDULES:
        raise ConfigurationError(
            f"unknown schedule {schedule!r}; choose one of {', '.join(SCHEDULES)}"
        )
    stages = beta - 1
    if schedule == SCHEDULE_INPUT_LINEAR:
        return [1 - i / beta for i in range(1, beta)]
    if schedule == SCHEDULE_BOUNDED:
        return [1 - 1 / 2 ** (beta - i) for i in range(1, beta)]
    offset = 0.5 + 1 / (2 ** (beta + 1) - 2)
    exponents = [offset]
    # Filled from the last stage backwards
    for _ in range(stages - 1):
        exponents.append(offset + exponents[-1] / 2)
    return exponents[::-1]


def f_schedule(max_degree: int, beta: int, schedule: str) -> list[float]:
    log_delta = log2(max_degree) if max_degree > 1 else 0.0
    return [2.0 ** (log_delta ** delta) for delta in stage_exponents(beta, schedule)]


def auto_beta(max_degree: int) -> int:
    """max(2, ceil(log2 log2 log2 Delta)), with small degrees mapping to 2."""
    value = float(max_degree)
    for _ in range(3):
        if value <= 1:
            return 2
        value = math.log2(value)
    return max(2, math.ceil(value))


def predicted_rounds(algorithm: str, max_degree: int, beta: int = 2, schedule: str = SCHEDULE_UNRESTRICTED) -> float | None:
    """Unitless leading term of the round complexity, for trend reports."""
    log_delta = max(1.0, log2(max_degree))
    if algorithm == "2rs":
        if schedule == SCHEDULE_INPUT_LINEAR:
            return log_delta ** 0.25 * max(1.0, log2(log_delta))
        return log_delta ** (1 / 6)
    if algorithm == "brs":
        if schedule == SCHEDULE_INPUT_LINEAR:
            return log_delta ** (1 / (2 * beta)) * max(1.0, log2(log_delta))
        return log_delta ** (1 / (2 ** (beta + 1) - 2))
    if algorithm in ("mis", "luby", "shatter"):
        return log_delta
    return None
