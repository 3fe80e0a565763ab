import numpy as np
import pytest

from mpclib.errors import NotSeparableError
from mpclib.randomness import RandomTape
from mpclib.separable import check_separable
from mpclib.separable import fold


def test_values_are_addressable():
    tape = RandomTape(1, 1000)
    assert tape.round_real(17, 3) == RandomTape(1, 1000).round_real(17, 3)
    assert tape.round_real(0, 1) != tape.round_real(0, 2)
    assert tape.round_real(0, 1) != RandomTape(2, 1000).round_real(0, 1)


def test_vectorized_matches_scalar():
    tape = RandomTape(9, 10000)
    nodes = [0, 5, 4095, 4096, 9999]
    expected = [tape.round_real(v, 4) for v in nodes]
    assert tape.round_reals(nodes, 4).tolist() == expected


def test_precision():
    tape = RandomTape(1, 1024)
    assert tape.word_bits == 10
    assert tape.precision_bits == 20
    value = tape.round_integer(3, 1)
    assert 0 <= value < 2 ** 20
    assert tape.round_real(3, 1) == value / 2 ** 20


def test_mean_and_range():
    tape = RandomTape(5, 100000)
    values = tape.round_reals(np.arange(100000), 1)
    assert values.min() >= 0 and values.max() < 1
    assert abs(values.mean() - 0.5) < 0.01


def test_acceptance_fraction():
    tape = RandomTape(3, 100000)
    accepted = tape.round_reals(np.arange(100000), 1) <= 0.25
    assert abs(accepted.mean() - 0.25) < 0.005


def test_sample_extremes():
    tape = RandomTape(1, 64)
    assert not any(tape.sample_event(v, 1, 0.0) for v in range(64))
    assert all(tape.sample_event(v, 1, 1.0) for v in range(64))


def test_rounds_start_at_one():
    with pytest.raises(ValueError):
        RandomTape(1, 10).round_real(0, 0)


def test_derived_tapes():
    tape = RandomTape(1, 500)
    a = tape.derive("sparsify1")
    assert a.n == 500
    assert a.round_real(7, 1) == tape.derive("sparsify1").round_real(7, 1)
    assert a.round_real(7, 1) != tape.derive("sparsify2").round_real(7, 1)


def test_fold():
    assert fold("sum", [1, 2, 3]) == 6
    assert fold("max", [5, 1, 9]) == 9
    assert fold("or", [0, 0, 1]) is True
    assert fold("and", []) is None
    assert fold(("sum", "min"), [(1, 4), (2, 3)]) == (3, 3)


def test_fold_is_split_invariant():
    rng = np.random.default_rng(0)
    values = rng.integers(0, 100, size=40).tolist()
    for tag in ("sum", "max", "min"):
        whole = fold(tag, values)
        assert fold(tag, [fold(tag, values[:13]), fold(tag, values[13:])]) == whole


def test_not_separable():
    with pytest.raises(NotSeparableError):
        check_separable("median")
    with pytest.raises(NotSeparableError):
        check_separable(("sum", "mode"))
