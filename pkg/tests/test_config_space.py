import pytest

from conftest import random_element
from config_space import (
    Configuration,
    EdgeId,
    canonical_edge,
    cylinder_contains,
    dump_configuration,
    edge_endpoints,
    exhaustion,
    insert,
    load_configuration,
    orbit_related,
    restrict,
    shift,
    translate_edges,
    window_edges,
)
from group import get_group
from shared import ResourceError, UsageError

X, Y = 0, 1


def random_config(window, rng, density=0.5):
    return Configuration(window, frozenset(e for e in window.edges if rng.random() < density))


def test_canonical_edge_examples(z2):
    assert canonical_edge(z2, (0, 0), (1, 0)) == EdgeId((0, 0), X)
    assert canonical_edge(z2, (2, 3), (2, 2)) == EdgeId((2, 2), Y)
    with pytest.raises(UsageError):
        canonical_edge(z2, (0, 0), (1, 1))


@pytest.mark.parametrize("group_id", ["z1", "z2", "f2"])
def test_canonical_edge_ignores_order(group_id):
    spec = get_group(group_id)
    for e in window_edges(spec, 3).edges:
        a, b = edge_endpoints(spec, e)
        assert canonical_edge(spec, a, b) == canonical_edge(spec, b, a) == e


@pytest.mark.parametrize("group_id,radius,expected", [
    ("z2", 1, 4),
    ("z2", 0, 0),
    ("z1", 2, 4),
    ("z2", 2, 16),
    ("f2", 2, 16),
])
def test_window_edge_counts(group_id, radius, expected):
    assert len(window_edges(get_group(group_id), radius).edges) == expected


def test_window_edges_have_both_endpoints_inside(f2):
    window = window_edges(f2, 3)
    for e in window.edges:
        a, b = edge_endpoints(f2, e)
        assert f2.length(a) <= 3 and f2.length(b) <= 3
    assert len(set(window.edges)) == len(window.edges)


def test_window_guard(f2, monkeypatch):
    import group
    monkeypatch.setattr(group, "MAX_BALL", 10)
    group.word_ball.cache_clear()
    try:
        with pytest.raises(ResourceError):
            window_edges(f2, 7)
    finally:
        group.word_ball.cache_clear()


def test_shift_examples(z2):
    window = window_edges(z2, 2)
    w = Configuration.from_edges(window, [EdgeId((0, 0), X)])
    shifted = shift(w, (1, 0))
    assert shifted.open == {EdgeId((-1, 0), X)}
    assert shifted.window.center == (-1, 0)

    full = Configuration.full(window)
    moved = shift(full, (2, -1))
    assert moved.open == frozenset(moved.window.edges)
    assert moved.window.edges != window.edges


@pytest.mark.parametrize("group_id", ["z2", "f2"])
def test_shift_action_law(group_id, rng):
    spec = get_group(group_id)
    window = window_edges(spec, 3)
    for _ in range(1000):
        w = random_config(window, rng)
        g = random_element(spec, rng, rng.randint(0, 4))
        h = random_element(spec, rng, rng.randint(0, 4))
        assert shift(shift(w, g), h) == shift(w, spec.multiply(h, g))
        assert len(shift(w, g).open) == len(w.open)
    assert shift(w, spec.identity) == w


def test_insert(z2, rng):
    window = window_edges(z2, 2)
    e = EdgeId((0, 0), X)
    assert insert(Configuration.empty(window), {e}).open == {e}
    for _ in range(200):
        w = random_config(window, rng)
        F = {f for f in window.edges if rng.random() < 0.2}
        once = insert(w, F)
        assert w.open <= once.open
        assert insert(once, F) == once
        assert cylinder_contains(once, F)


def test_insert_outside_window(z2):
    window = window_edges(z2, 1)
    with pytest.raises(UsageError):
        insert(Configuration.empty(window), {EdgeId((5, 5), X)})


def test_cylinder_contains(z2):
    window = window_edges(z2, 1)
    e = EdgeId((0, 0), X)
    assert cylinder_contains(Configuration.empty(window), set())
    assert cylinder_contains(Configuration.full(window), set(window.edges))
    assert not cylinder_contains(Configuration.empty(window), {e})


def test_exhaustion_collapses_to_full_configuration(z2):
    window = window_edges(z2, 2)
    stages = exhaustion(window)
    assert [len(f) for f in stages] == [0, 4, 16]
    assert all(a <= b for a, b in zip(stages, stages[1:]))
    survivors = [mask for mask in range(1 << len(window.edges))
                 if all(cylinder_contains(Configuration.from_mask(window, mask), f) for f in stages)]
    assert survivors == [(1 << len(window.edges)) - 1]


def test_mask_reading(z2, rng):
    window = window_edges(z2, 2)
    w = random_config(window, rng)
    assert Configuration.from_mask(window, w.to_mask()) == w
    assert Configuration.from_mask(window, 0) == Configuration.empty(window)


def test_restrict(z2):
    full = Configuration.full(window_edges(z2, 3))
    small = restrict(full, 1)
    assert small.open == frozenset(window_edges(z2, 1).edges)
    with pytest.raises(UsageError):
        restrict(small, 2)


def test_translate_edges(f2):
    F = {EdgeId((), 0)}
    assert translate_edges(f2, F, (2,)) == {EdgeId((2,), 0)}


def test_orbit_related(f2, rng):
    window = window_edges(f2, 2)
    w = random_config(window, rng)
    g = (1, -2)
    related, found = orbit_related(w, shift(w, g))
    assert related and found == g
    full = Configuration.full(window)
    assert orbit_related(w, full) == (w.open == full.open, f2.identity)
    assert orbit_related(w, Configuration.empty(window_edges(f2, 1)))[0] is False


@pytest.mark.parametrize("group_id", ["z2", "f2"])
def test_dump_and_load(group_id, tmp_path, rng):
    spec = get_group(group_id)
    w = shift(random_config(window_edges(spec, 2), rng), random_element(spec, rng, 2))
    path = tmp_path / "config.txt"
    dump_configuration(w, path)
    assert load_configuration(path) == w
    text = path.read_text()
    assert text.startswith(f"# group {group_id} radius 2")
    assert len(text.splitlines()) == len(w.open) + 1
