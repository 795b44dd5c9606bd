import numpy as np
import pytest

from porousrad.seeding import SHARD_SIZE, shard_plan, shard_rng, shard_sizes


def test_shard_sizes_partition():
    assert shard_sizes(0) == []
    assert shard_sizes(10, shard_size=4) == [4, 4, 2]
    assert shard_sizes(8, shard_size=4) == [4, 4]
    assert sum(shard_sizes(1_000_001)) == 1_000_001
    with pytest.raises(ValueError):
        shard_sizes(-1)


def test_shard_rng_is_a_pure_function_of_seed_and_index():
    a = shard_rng(123, 5).random(8)
    b = shard_rng(123, 5).random(8)
    c = shard_rng(123, 6).random(8)
    d = shard_rng(124, 5).random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_shard_plan_enumerates_in_order():
    plan = list(shard_plan(3 * SHARD_SIZE + 7, 99))
    assert [i for i, _, _ in plan] == [0, 1, 2, 3]
    assert [m for _, m, _ in plan] == [SHARD_SIZE] * 3 + [7]
    # each shard's stream matches a fresh shard_rng for the same index
    for i, _, rng in plan:
        assert rng.random() == shard_rng(99, i).random()
