import math

import pytest

from cluster import RootedGraph, ball, cluster_of
from config_space import Configuration, EdgeId, window_edges
from repetitive import (
    HORIZONTAL,
    VERTICAL,
    FullModel,
    PeriodicModel,
    SturmianFence,
    even_rows,
    factor_counts,
    fib_fence,
    floor_times_alpha,
    in_closure,
    is_proper,
    is_repetitive,
    load_library,
    local_ball,
    model_is_connected,
    model_window,
    parse_model,
    patterns,
    save_library,
    sturmian_letters,
)
from shared import HorizonError, UsageError

PHI_INV = (math.sqrt(5) - 1) / 2


def test_local_ball_examples(z2):
    plus = local_ball(FullModel(), (3, -7), 1)
    assert len(plus.vertices) == 5 and len(plus.edges) == 4

    model = even_rows()
    at_even = local_ball(model, (0, 0), 1)
    assert len(at_even.vertices) == 5 and len(at_even.edges) == 4
    at_odd = local_ball(model, (0, 1), 1)
    assert at_odd.vertices == {(0, -1), (0, 0), (0, 1)}
    assert len(at_odd.edges) == 2
    assert at_odd.truncation == 1


def test_local_ball_is_translated(z2):
    model = even_rows()
    assert local_ball(model, (5, 2), 3) == local_ball(model, (0, 0), 3)
    assert local_ball(model, (5, 3), 3) == local_ball(model, (0, 1), 3)


def test_patterns_full_model():
    assert len(patterns(FullModel(), 2, 8)) == 1


def test_patterns_even_rows():
    library = patterns(even_rows(), 1, 8)
    assert len(library) == 2
    assert library.stable
    sizes = sorted(len(p.vertices) for p in library.patterns)
    assert sizes == [3, 5]
    assert all(c >= 2 for c in library.counts)


@pytest.mark.parametrize("r", [0, 1, 2, 3, 4])
def test_periodic_patterns_bounded_by_index(r):
    model = even_rows()
    assert model.period_index == 2
    assert len(patterns(model, r, 8)) <= model.period_index


def test_patterns_fib_fence_small():
    library = patterns(fib_fence(), 1, 64)
    assert 1 <= len(library) <= 4
    assert library.stable


@pytest.mark.slow
@pytest.mark.parametrize("r", [1, 2, 3, 4])
def test_patterns_fib_fence_complexity(r):
    library = patterns(fib_fence(), r, 64)
    assert len(library) <= 2 * r + 2
    assert library.stable


def test_patterns_radius_check():
    with pytest.raises(UsageError):
        patterns(even_rows(), 5, 3)


def test_truncation_coherence():
    model = even_rows()
    for r in range(3):
        lower = patterns(model, r, 8)
        for pattern in patterns(model, r + 1, 8).patterns:
            assert ball(pattern, r).key() in lower.keys


def test_is_repetitive_even_rows():
    model = even_rows()
    assert is_repetitive(model, 1, 3, 8) == (True, None)
    ok, (pattern, center) = is_repetitive(model, 1, 0, 8)
    assert not ok
    assert center == (0, 0)
    assert pattern == local_ball(model, (0, 1), 1)


def test_is_repetitive_scan_check():
    with pytest.raises(UsageError):
        is_repetitive(even_rows(), 1, 10, 8)


@pytest.mark.slow
def test_is_repetitive_fib_fence():
    ok, witness = is_repetitive(fib_fence(), 1, 20, 200)
    assert ok and witness is None


def test_in_closure(z2):
    full_cluster = cluster_of(Configuration.full(window_edges(z2, 4)), (0, 0))
    assert in_closure(full_cluster, patterns(FullModel(), 3, 8))

    model = even_rows()
    library = patterns(model, 2, 8)
    assert in_closure(local_ball(model, (4, 1), 2), library)

    single = RootedGraph(z2, frozenset({(0, 0)}), frozenset(), 1)
    assert not in_closure(single, patterns(fib_fence(), 1, 64))

    with pytest.raises(HorizonError):
        in_closure(ball(full_cluster, 1), library)


def test_is_proper():
    assert not is_proper(FullModel(), 8)
    assert is_proper(even_rows(), 8)
    assert is_proper(fib_fence(), 8)


def test_models_are_connected():
    for model in (FullModel(), even_rows(), fib_fence()):
        assert model_is_connected(model, 6)
    lines = PeriodicModel("rows-only", ((1, 0), (0, 1)), frozenset({((0, 0), HORIZONTAL)}))
    assert not model_is_connected(lines, 3)


def test_even_rows_edge_oracle():
    model = even_rows()
    assert model.is_edge(EdgeId((3, 0), HORIZONTAL))
    assert not model.is_edge(EdgeId((3, 1), HORIZONTAL))
    assert not model.is_edge(EdgeId((-2, -3), HORIZONTAL))
    assert model.is_edge(EdgeId((7, -5), VERTICAL))


def test_periodic_model_validation():
    with pytest.raises(UsageError):
        PeriodicModel("flat", ((1, 0), (2, 0)))
    with pytest.raises(UsageError):
        PeriodicModel("bad", ((1, 0), (0, 2)), frozenset({((0, 5), VERTICAL)}))


def test_periodic_reduce_skew_basis():
    model = PeriodicModel("skew", ((2, 1), (0, 3)))
    assert model.period_index == 6
    for v in [(0, 0), (5, -4), (-3, 7)]:
        for shift in [(2, 1), (0, 3), (-4, 1)]:
            moved = (v[0] + shift[0], v[1] + shift[1])
            assert model.reduce(moved) == model.reduce(v)


def test_periodic_from_file(tmp_path):
    motif = tmp_path / "motif.txt"
    motif.write_text("# even rows\n0 0 1 0\n0 0 0 1\n0 1 0 2\n")
    model = parse_model(f"periodic:1,0;0,2;{motif}")
    assert model.motif == even_rows().motif
    assert patterns(model, 2, 8).keys == patterns(even_rows(), 2, 8).keys


@pytest.mark.parametrize("lines,basis", [
    ("0 0 1 0\n", "1,0;0,1"),
    ("0 0 0 1\n", "1,0;0,1"),
    ("0 0 1 0\n0 0 0 1\n", "2,0;0,2"),
])
def test_periodic_from_file_rejects_disconnected_motif(tmp_path, lines, basis):
    motif = tmp_path / "motif.txt"
    motif.write_text(lines)
    with pytest.raises(UsageError, match="connected"):
        parse_model(f"periodic:{basis};{motif}")


@pytest.mark.parametrize("model_id", ["bogus", "sturmian:1,2", "periodic:1,0;0,2"])
def test_parse_model_errors(model_id):
    with pytest.raises(UsageError):
        parse_model(model_id)


def test_floor_times_alpha_is_exact():
    for n in range(-2000, 2000):
        assert floor_times_alpha(n, -1, 1, 5, 2) == math.floor(n * PHI_INV)


def test_sturmian_fence_rows():
    fence = fib_fence()
    for y in range(-50, 50):
        assert fence.letter(y) in (0, 1)
        assert fence.is_edge(EdgeId((0, y), VERTICAL))
        assert fence.is_edge(EdgeId((4, y), HORIZONTAL)) == (fence.letter(y) == 1)


def test_sturmian_factor_complexity():
    counts = factor_counts(sturmian_letters(fib_fence(), 0, 10_000), 12)
    assert counts == {n: n + 1 for n in range(1, 13)}


def test_generalized_sturmian():
    silver = parse_model("sturmian:-1,1,2,1")  # sqrt2 - 1
    counts = factor_counts(sturmian_letters(silver, -500, 5000), 8)
    assert counts == {n: n + 1 for n in range(1, 9)}
    with pytest.raises(UsageError):
        SturmianFence("square", (1, 1, 4, 2))
    with pytest.raises(UsageError):
        SturmianFence("too-big", (1, 1, 5, 2))


def test_model_window(z2):
    config = model_window(even_rows(), 2)
    assert EdgeId((0, 0), HORIZONTAL) in config.open
    assert EdgeId((0, 1), HORIZONTAL) not in config.open
    assert len(config.open) < len(config.window.edges)


def test_library_directory(tmp_path):
    library = patterns(even_rows(), 2, 8)
    save_library(library, tmp_path / "lib")
    assert (tmp_path / "lib" / "manifest.json").exists()
    loaded = load_library(tmp_path / "lib")
    assert loaded.keys == library.keys
    assert (loaded.r, loaded.stable, loaded.counts) == (2, True, library.counts)
