"""
Phase planners. A plan cuts the rounds 1..R of a program into phases
of length ell, each compressed into O(log ell) MPC rounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from mpclib.errors import ConfigurationError
from mpclib.utils.simple_functions import log2
from mpclib.utils.simple_functions import safe_log2

__all__ = [
    "PhasePlan",
    "halving_partition",
    "validate_halving",
    "v1_phase_length",
    "v2_phase_length",
    "plan_phases_v1",
    "plan_phases_v2",
]

V1 = "v1"
V2 = "v2"


@dataclass(frozen=True)
class PhasePlan:
    # Rounds completed before the phase; it covers start+1 .. start+length
    start: int
    length: int
    alpha: float
    version: str = V1
    alpha_prime: float | None = None
    stage: int | None = None
    case: str | None = None

    @property
    def end(self) -> int:
        return self.start + self.length

    @property
    def rounds(self) -> range:
        return range(self.start + 1, self.end + 1)

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "length": self.length,
            "alpha": self.alpha,
            "alpha_prime": self.alpha_prime,
            "stage": self.stage,
            "version": self.version,
            "case": self.case,
        }


def _floor_sqrt(x: float) -> int:
    if x <= 0:
        return 0
    # Guard exact squares against float noise
    return int(math.floor(math.sqrt(x) + 1e-9))


def _check_alpha(alpha: float) -> None:
    if alpha < 2:
        raise ConfigurationError(f"sparsity alpha must be at least 2, got {alpha}")


def v1_phase_length(alpha: float, n: int, epsilon: float) -> int:
    """ell = max(1, floor(sqrt(epsilon / 8 * log_alpha n)))."""
    _check_alpha(alpha)
    return max(1, _floor_sqrt(epsilon / 8 * safe_log2(n) / log2(alpha)))


def v2_phase_length(stage: int, alpha: float, max_degree: int, n: int, epsilon: float) -> tuple[int, str, float]:
    """
    Phase length for stage i of a degree-ordered program, with the
    case that produced it and alpha' = alpha * log^2 n.
    Case (i) applies while Delta^(1/2^i) >= n^(epsilon/2).
    """
    _check_alpha(alpha)
    alpha_prime = alpha * safe_log2(n) ** 2
    log_degree = log2(max_degree) if max_degree > 0 else 0.0
    if log_degree / 2 ** stage >= epsilon / 2 * safe_log2(n):
        return v1_phase_length(alpha, n, epsilon), "i", alpha_prime
    exponent = log_degree / 2 ** (stage + 1)
    return max(1, _floor_sqrt(exponent / log2(alpha_prime) / 2)), "ii", alpha_prime


def halving_partition(total_rounds: int) -> list[int]:
    """
    Stage lengths R_1 >= 2 R_2 >= 4 R_3 ... summing to total_rounds,
    built from the last stage as 1, 2, 4, ... with the remainder given
    to the first stage: 12 -> [9, 2, 1].
    """
    lengths: list[int] = []
    size, remaining = 1, total_rounds
    while remaining >= size:
        lengths.append(size)
        remaining -= size
        size *= 2
    lengths.reverse()
    if lengths:
        lengths[0] += remaining
    return lengths


def validate_halving(stage_lengths: Sequence[int]) -> None:
    for i in range(1, len(stage_lengths)):
        if 2 * stage_lengths[i] > stage_lengths[i - 1]:
            raise ConfigurationError(
                f"stage {i + 1} has {stage_lengths[i]} rounds, more than half "
                f"of the {stage_lengths[i - 1]} rounds of stage {i}"
            )
    if any(length < 1 for length in stage_lengths):
        raise ConfigurationError("stage lengths must be positive")


def _cut(start: int, rounds: int, length: int, **kwargs) -> list[PhasePlan]:
    plans = []
    end = start + rounds
    while start < end:
        plans.append(PhasePlan(start=start, length=min(length, end - start), **kwargs))
        start = plans[-1].end
    return plans


def plan_phases_v1(
    total_rounds: int,
    alpha: float,
    n: int,
    epsilon: float,
    force_ell: int | None = None,
) -> list[PhasePlan]:
    ell = v1_phase_length(alpha, n, epsilon)
    if force_ell is not None:
        ell = max(1, int(force_ell))
    return _cut(0, total_rounds, ell, alpha=alpha, version=V1)


def plan_phases_v2(
    stage_lengths: Sequence[int],
    alpha: float,
    max_degree: int,
    n: int,
    epsilon: float,
    force_ell: int | None = None,
) -> list[PhasePlan]:
    validate_halving(stage_lengths)
    plans = []
    start = 0
    for stage, rounds in enumerate(stage_lengths, start=1):
        ell, case, alpha_prime = v2_phase_length(stage, alpha, max_degree, n, epsilon)
        if force_ell is not None:
            ell = max(1, int(force_ell))
        plans.extend(_cut(
            start, rounds, ell,
            alpha=alpha, version=V2, alpha_prime=alpha_prime,
            stage=stage, case=case,
        ))
        start += rounds
    return plans
