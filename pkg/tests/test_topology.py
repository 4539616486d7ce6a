import random

import pytest
from hypothesis import given, strategies as st

from cohdasim.topology import (
    Overlay,
    ParameterError,
    complete,
    is_connected,
    ring,
    small_world,
)


def _ids(n):
    return [f"n{i:03d}" for i in range(n)]


def _assert_well_formed(overlay: Overlay):
    for node, neighbors in overlay.adjacency.items():
        assert node not in neighbors  # no self loops
        assert len(set(neighbors)) == len(neighbors)
        for nbr in neighbors:
            assert node in overlay.adjacency[nbr]  # symmetric


def test_ring_singleton():
    overlay = ring(["A"])
    assert overlay.edge_count() == 0
    assert is_connected(overlay)


def test_ring_three_nodes():
    overlay = ring(["A", "B", "C"])
    assert sorted(overlay.edges()) == [("A", "B"), ("A", "C"), ("B", "C")]


def test_ring_two_nodes_single_edge():
    overlay = ring(["A", "B"])
    assert overlay.edges() == [("A", "B")]
    assert overlay.edge_count() == 1


def test_ring_duplicate_ids():
    with pytest.raises(ParameterError):
        ring(["A", "A"])


def test_complete_counts():
    assert complete(_ids(3)).edge_count() == 3
    assert complete(_ids(1)).edge_count() == 0
    assert complete(_ids(5)).edge_count() == 10


def test_small_world_p_zero_is_ring_lattice():
    ids = _ids(8)
    overlay = small_world(ids, k=2, p=0.0, seed=1)
    assert sorted(overlay.edges()) == sorted(ring(ids).edges())
    overlay4 = small_world(ids, k=4, p=0.0, seed=1)
    expected = set()
    for i in range(8):
        for j in (1, 2):
            a, b = i, (i + j) % 8
            expected.add((min(a, b), max(a, b)))
    got = {(ids.index(a), ids.index(b)) for a, b in overlay4.edges()}
    assert {(min(a, b), max(a, b)) for a, b in got} == expected


def test_small_world_full_rewire_keeps_edge_count():
    # Rewiring replaces edges one for one; repair may only add.
    overlay = small_world(_ids(20), k=4, p=1.0, seed=42)
    assert overlay.edge_count() >= 40
    assert is_connected(overlay)
    _assert_well_formed(overlay)


def test_small_world_deterministic_under_seed():
    a = small_world(_ids(30), k=4, p=0.3, seed=9)
    b = small_world(_ids(30), k=4, p=0.3, seed=9)
    assert a.adjacency == b.adjacency
    c = small_world(_ids(30), k=4, p=0.3, seed=10)
    assert a.adjacency != c.adjacency  # overwhelmingly likely


def test_small_world_parameter_errors():
    with pytest.raises(ParameterError):
        small_world(_ids(5), k=3, p=0.1, seed=0)
    with pytest.raises(ParameterError):
        small_world(_ids(4), k=4, p=0.1, seed=0)
    with pytest.raises(ParameterError):
        small_world(_ids(6), k=2, p=1.5, seed=0)


@given(
    st.integers(3, 40),
    st.sampled_from([2, 4, 6]),
    st.floats(0.0, 1.0),
    st.integers(0, 10_000),
)
def test_generated_overlays_always_connected(n, k, p, seed):
    if k >= n:
        k = 2
    if k >= n:
        return
    overlay = small_world(_ids(n), k=k, p=p, seed=seed)
    _assert_well_formed(overlay)
    assert is_connected(overlay)


def test_ring_and_complete_connected_random_sizes():
    rng = random.Random(0)
    for _ in range(20):
        n = rng.randint(1, 30)
        for overlay in (ring(_ids(n)), complete(_ids(n))):
            _assert_well_formed(overlay)
            assert is_connected(overlay)
