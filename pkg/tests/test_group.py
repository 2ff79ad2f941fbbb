from collections import deque

import pytest

from conftest import random_element
from group import (
    ball_size,
    cayley_neighbors,
    get_group,
    inverse,
    multiply,
    word_ball,
)
from shared import ResourceError, UsageError

A = (1,)


def test_multiply_examples(z2, f2, rng):
    assert multiply(z2, (1, 2), (3, -1)) == (4, 1)
    assert multiply(f2, (1, 2), (-2, 1)) == (1, 1)
    for spec in (z2, f2):
        g = random_element(spec, rng)
        assert multiply(spec, g, spec.identity) == g


def test_inverse_examples(z2, f2):
    assert inverse(z2, (2, -3)) == (-2, 3)
    assert inverse(f2, (1, 2)) == (-2, -1)
    assert inverse(f2, ()) == ()
    assert inverse(z2, (0, 0)) == (0, 0)


def test_mismatched_spec_is_usage_error(z2, f2):
    with pytest.raises(UsageError):
        multiply(z2, (1, 2), (1,))
    with pytest.raises(UsageError):
        multiply(f2, (1, -1), (2,))  # not reduced
    with pytest.raises(UsageError):
        inverse(f2, (1, 2, 3))


def test_cayley_neighbors(z1, z2, f2):
    assert set(cayley_neighbors(z2, (0, 0))) == {(1, 0), (-1, 0), (0, 1), (0, -1)}
    assert cayley_neighbors(z2, (0, 0)) == [(1, 0), (-1, 0), (0, 1), (0, -1)]
    assert set(cayley_neighbors(f2, A)) == {(1, 1), (), (2, 1), (-2, 1)}
    assert cayley_neighbors(z1, (5,)) == [(6,), (4,)]


def test_neighbors_satisfy_edge_rule(f2, rng):
    for _ in range(100):
        g = random_element(f2, rng, 6)
        for h in cayley_neighbors(f2, g):
            assert f2.mul(h, f2.inv(g)) in f2.generators


@pytest.mark.parametrize("group_id,r,expected", [
    ("z2", 0, 1),
    ("z2", 1, 5),
    ("z2", 2, 13),
    ("f2", 1, 5),
    ("f2", 2, 17),
    ("z1", 3, 7),
])
def test_word_ball_sizes(group_id, r, expected):
    spec = get_group(group_id)
    assert len(word_ball(spec, r)) == expected
    assert ball_size(spec, r) == expected


def _bfs_count(spec, r):
    seen = {spec.identity: 0}
    queue = deque([spec.identity])
    while queue:
        g = queue.popleft()
        if seen[g] == r:
            continue
        for s in spec.generators:
            h = spec.mul(s, g)
            if h not in seen:
                seen[h] = seen[g] + 1
                queue.append(h)
    return len(seen)


@pytest.mark.parametrize("group_id", ["z1", "z2", "f2"])
def test_word_ball_nested_and_matches_recount(group_id):
    spec = get_group(group_id)
    previous = set()
    for r in range(7):
        current = set(word_ball(spec, r))
        assert previous <= current
        assert len(current) == _bfs_count(spec, r) == ball_size(spec, r)
        assert all(spec.length(g) <= r for g in current)
        previous = current


def test_word_ball_is_ordered_by_length(f2):
    lengths = [f2.length(g) for g in word_ball(f2, 4)]
    assert lengths == sorted(lengths)


def test_word_ball_guard(f2, monkeypatch):
    import group
    monkeypatch.setattr(group, "MAX_BALL", 100)
    word_ball.cache_clear()
    try:
        with pytest.raises(ResourceError):
            word_ball(f2, 4)
    finally:
        word_ball.cache_clear()


@pytest.mark.parametrize("group_id", ["z1", "z2", "f2"])
def test_group_laws(group_id, rng):
    spec = get_group(group_id)
    for _ in range(1000):
        g, h, k = (random_element(spec, rng, rng.randint(0, 6)) for _ in range(3))
        assert spec.inverse(spec.inverse(g)) == g
        assert spec.multiply(g, spec.inverse(g)) == spec.identity
        assert spec.multiply(spec.multiply(g, h), k) == spec.multiply(g, spec.multiply(h, k))


@pytest.mark.parametrize("group_id", ["z1", "z2", "f2"])
def test_generating_set_is_symmetric(group_id):
    spec = get_group(group_id)
    assert spec.identity not in spec.generators
    for i, s in enumerate(spec.generators):
        assert spec.inv(s) in spec.generators
        assert spec.generators[spec.inverse_index[i]] == spec.inv(s)
    assert len(spec.positive) * 2 == len(spec.generators)
    for s in spec.positive:
        assert spec.inv(s) not in spec.positive


def test_distance_is_right_invariant(f2, rng):
    for _ in range(200):
        a, b, g = (random_element(f2, rng, 5) for _ in range(3))
        assert f2.distance(a, b) == f2.distance(f2.mul(a, g), f2.mul(b, g))
        assert f2.distance(a, b) == f2.distance(b, a)


def test_format_and_parse(f2, z2):
    assert f2.format((1, -2)) == "aB"
    assert f2.format(()) == "e"
    assert f2.parse(["aB"]) == (1, -2)
    assert f2.parse(["e"]) == ()
    assert z2.parse(["3", "-1"]) == (3, -1)
    with pytest.raises(UsageError):
        f2.parse(["aA"])
    with pytest.raises(UsageError):
        z2.parse(["x", "1"])


def test_unknown_group():
    with pytest.raises(UsageError):
        get_group("z3")
