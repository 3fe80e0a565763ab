from __future__ import annotations

from typing import Any, Sequence


class MpcLibError(Exception):
    pass


class GraphFormatError(MpcLibError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphParameterError(MpcLibError):
    pass


class ConfigurationError(MpcLibError):
    pass


class UsageError(MpcLibError):
    pass


class NotSeparableError(ConfigurationError):
    pass


class ProgramError(MpcLibError):
    """
    A node program broke the model: it addressed a non-neighbor,
    sent an oversized payload, or emitted something other than a
    broadcast in a round it declared foldable.
    """

    def __init__(self, message: str, node: int, round: int):
        self.node = node
        self.round = round
        super().__init__(f"node {node}, round {round}: {message}")


class ResourceError(MpcLibError):
    pass


class BallOverflowError(ResourceError):
    def __init__(self, center: int, words: int, capacity: int):
        self.center = center
        self.words = words
        self.capacity = capacity
        super().__init__(
            f"phase length too aggressive: ball around node {center} "
            f"holds {words} words, machine capacity is {capacity}"
        )


class EstimatorError(MpcLibError):
    def __init__(self, estimator: str, node: int, round: int, value: Any):
        self.estimator = estimator
        self.node = node
        self.round = round
        self.value = value
        super().__init__(
            f"{estimator} returned activation estimate {value!r} "
            f"outside [0, 1] for node {node}, round {round}"
        )


class EstimatorUnsoundError(MpcLibError):
    def __init__(self, estimator: str, node: int, round: int):
        self.estimator = estimator
        self.node = node
        self.round = round
        super().__init__(
            f"{estimator} is unsound: unmarked node {node} "
            f"sends in round {round}"
        )


class FinishOffError(MpcLibError):
    def __init__(self, members: Sequence[int], words: int, capacity: int):
        self.members = tuple(members)
        self.words = words
        self.capacity = capacity
        preview = ", ".join(map(str, self.members[:8]))
        if len(self.members) > 8:
            preview += ", ..."
        super().__init__(
            f"residual component of {len(self.members)} nodes ({preview}) "
            f"needs {words} words, machine capacity is {capacity}"
        )
