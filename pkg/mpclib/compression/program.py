from __future__ import annotations

from typing import Any

from mpclib.congest.program import NodeProgram
from mpclib.compression.planner import halving_partition

__all__ = [
    "SparseProgram",
]


class SparseProgram(NodeProgram):
    """
    A node program that can be compressed: besides its transitions it
    declares, for every future round, an upper bound on the probability
    that a node sends, computed from the node's state at a phase start.
    """
    CONFIG = {
        # Bound on the growth of estimated activity from one round to the next
        "alpha": 2,
    }

    def estimate_activation(self, state: Any, t: int, tau: int) -> float:
        """
        Upper bound on the probability that the node holding `state`
        after round t sends in round tau > t. For tau = t + 1 this is
        the exact probability the message on the wire was sent with.
        """
        raise NotImplementedError()

    def activation_address(self, tau: int) -> int:
        """Tape round whose real decides whether a node sends in round tau."""
        return tau

    def sampling_round(self, tau: int) -> bool:
        """
        Whether round tau is decided by a coin flip. Deterministic
        rounds are left out of the activity growth check.
        """
        return True

    def stage_lengths(self, total_rounds: int) -> list[int]:
        return halving_partition(total_rounds)
