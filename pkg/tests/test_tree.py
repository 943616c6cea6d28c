import random
from collections import deque
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cayleycontour.tree import (
    ROOT,
    CayleyTree,
    ball_offsets,
    ball_volume,
    connected_sets,
    distance,
    format_vertex,
    geodesic,
    ball_count_closed_form,
    ball_count_recurrence,
    multiply,
    parse_vertex,
    sphere_size,
    translate,
)


def bfs_distance(k, x, y):
    """Independent oracle: breadth-first search from x until y is reached."""
    tree = CayleyTree(k)
    seen = {x: 0}
    queue = deque([x])
    while queue:
        v = queue.popleft()
        if v == y:
            return seen[v]
        for u in tree.neighbors(v):
            if u not in seen:
                seen[u] = seen[v] + 1
                queue.append(u)


def words(k, max_len):
    return st.lists(st.integers(1, k + 1), max_size=max_len).map(lambda xs: reduce_word(xs))


def reduce_word(xs):
    out = ()
    for g in xs:
        out = multiply(out, g)
    return out


def test_parse_and_format_roundtrip():
    assert parse_vertex("-") == ROOT
    assert parse_vertex("1.2.1", 2) == (1, 2, 1)
    assert format_vertex((1, 2, 1)) == "1.2.1"
    assert format_vertex(()) == "-"


@pytest.mark.parametrize("text", ["1.1", "4", "0", "a.b", "1..2"])
def test_parse_rejects_bad_words(text):
    with pytest.raises(ValueError):
        parse_vertex(text, 2)


def test_neighbors_and_degree():
    tree = CayleyTree(2)
    assert tree.neighbors(ROOT) == [(1,), (2,), (3,)]
    assert sorted(tree.neighbors((1,))) == sorted([(), (1, 2), (1, 3)])
    for x in tree.volume(3):
        assert len(set(tree.neighbors(x))) == 3


@given(words(2, 6), words(2, 6))
@settings(max_examples=200, deadline=None)
def test_distance_matches_bfs(x, y):
    assert distance(x, y) == bfs_distance(2, x, y)


@given(words(3, 5), words(3, 5), words(3, 4))
@settings(max_examples=200, deadline=None)
def test_translation_is_an_isometry(x, y, g):
    assert distance(translate(x, g), translate(y, g)) == distance(x, y)


@given(words(2, 6), words(2, 6))
@settings(max_examples=100, deadline=None)
def test_geodesic_is_a_path(x, y):
    path = geodesic(x, y)
    assert path[0] == x and path[-1] == y
    assert len(path) == distance(x, y) + 1
    assert all(distance(a, b) == 1 for a, b in zip(path, path[1:]))


@pytest.mark.parametrize("k", [2, 3, 4])
@pytest.mark.parametrize("radius", [0, 1, 2, 3])
def test_ball_and_sphere_sizes(k, radius):
    tree = CayleyTree(k)
    vol = tree.volume(radius)
    assert len(vol) == ball_volume(k, radius)
    assert len(tree.sphere(radius)) == sphere_size(k, radius)
    assert len(tree.ball((1, 2), radius).members) == ball_volume(k, radius)


def test_ball_member_order_is_translation_invariant():
    tree = CayleyTree(2)
    b = tree.ball((1,), 1)
    assert b.members == ((1,), (), (1, 2), (1, 3))
    for center in tree.volume(2):
        ball = tree.ball(center, 2)
        assert ball.members[0] == center
        assert [distance(center, m) for m in ball.members] == [len(w) for w in ball_offsets(2, 2)]


def test_v3_size_for_binary_tree():
    assert len(CayleyTree(2).volume(3)) == 22


def multiplicity_oracle(k, A, r):
    """Double loop: every center in a large enough volume, every member of A."""
    rprime = (r + 1) // 2
    tree = CayleyTree(k)
    radius = max(len(a) for a in A) + rprime
    return sum(1 for c in tree.volume(radius) if all(bfs_distance(k, c, a) <= rprime for a in A))


@pytest.mark.parametrize(
    "A,r,expected",
    [
        ([()], 1, 4),
        ([(), (1,)], 1, 2),
        ([(), (1,)], 2, 2),
        ([(1,), (2,)], 2, 1),
        ([()], 3, 10),
    ],
)
def test_covering_multiplicity(A, r, expected):
    tree = CayleyTree(2)
    assert tree.covering_multiplicity(A, r) == expected
    assert multiplicity_oracle(2, A, r) == expected


def test_covering_multiplicity_rejects_wide_sets():
    with pytest.raises(ValueError):
        CayleyTree(2).covering_multiplicity([(1,), (2, 1)], 2)


@pytest.mark.parametrize("k", [2, 3])
def test_outer_boundary_of_connected_sets(k):
    tree = CayleyTree(k)
    rng = random.Random(7)
    for _ in range(200):
        n = rng.randint(1, 20)
        A = tree.random_connected(n, rng)
        assert tree.is_connected(A)
        assert len(A) == n
        assert len(tree.outer_boundary(A)) == (k - 1) * n + 2


def test_intersecting_balls_against_brute_force():
    tree = CayleyTree(2)
    rng = random.Random(3)
    for rprime in (1, 2):
        for _ in range(30):
            A = tree.random_connected(rng.randint(1, 6), rng)
            radius = max(len(a) for a in A) + rprime
            oracle = [c for c in tree.volume(radius) if any(distance(c, a) <= rprime for a in A)]
            assert sorted(b.center for b in tree.intersecting_balls(A, rprime)) == sorted(oracle)


def test_ball_count_recurrence_and_formula_disagree():
    # connected A: r'=1 gives kn+2 balls, the closed form gives (k-1)n+2
    tree = CayleyTree(2)
    assert len(tree.intersecting_balls([()], 1)) == 4
    assert ball_count_closed_form(1, 2, 1) == 3
    assert ball_count_recurrence(1, 2, 1) == [1, 3]
    A = tree.random_connected(5, random.Random(1))
    assert len(tree.intersecting_balls(A, 1)) == 2 * 5 + 2
    assert len(tree.intersecting_balls(A, 2)) == 2 * (2 * 5 + 2) + 2


def test_components_and_steiner():
    tree = CayleyTree(2)
    comps = tree.components([(1,), (1, 2), (2,), (3, 1)])
    assert comps == [((1,), (1, 2)), ((2,),), ((3, 1),)]
    assert tree.steiner_vertices([(1, 2), (2,)]) == ((), (1,), (2,), (1, 2))


def count_connected_oracle(k, size):
    """Connected vertex sets containing the root, by breadth-first growth of frozensets."""
    tree = CayleyTree(k)
    level = {frozenset([ROOT])}
    counts = [1]
    for _ in range(size - 1):
        nxt = set()
        for s in level:
            for x in s:
                for y in tree.neighbors(x):
                    if y not in s:
                        nxt.add(s | {y})
        counts.append(len(nxt))
        level = nxt
    return counts


@pytest.mark.parametrize("k", [2, 3])
def test_connected_sets_counts_each_set_once(k):
    tree = CayleyTree(k)
    sets = list(connected_sets(ROOT, 5, tree.neighbors))
    assert len(sets) == len(set(sets))
    by_size = [sum(1 for s in sets if len(s) == m) for m in range(1, 6)]
    assert by_size == count_connected_oracle(k, 5)
    assert all(tree.is_connected(s) for s in sets)


def test_connected_sets_respects_banned():
    tree = CayleyTree(2)
    banned = {(1,)}
    sets = list(connected_sets(ROOT, 4, tree.neighbors, banned))
    assert all(not (s & banned) for s in sets)
    oracle = [s for s in connected_sets(ROOT, 4, tree.neighbors) if not (s & banned)]
    assert set(sets) == set(oracle)


def test_pairs_within_ball_radius():
    tree = CayleyTree(2)
    vol = tree.volume(2)
    for x, y in combinations(vol, 2):
        assert distance(x, y) == bfs_distance(2, x, y)
