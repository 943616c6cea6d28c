"""Cayley tree of order k addressed by reduced group words.

A vertex is a tuple of generator indices in ``1..k+1`` with no two equal
neighbours; ``()`` is the root. Every generator is an involution, so the
neighbours of ``x`` are the words ``x * a_g`` and the tree is never
materialised beyond the vertices a caller asks for.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

Vertex = tuple  # tuple[int, ...]
Edge = tuple  # (parent, child) with child one letter longer

ROOT: Vertex = ()


def vertex_key(x: Vertex):
    """Length-lexicographic sort key."""
    return (len(x), x)


def sort_vertices(vertices: Iterable[Vertex]) -> tuple:
    return tuple(sorted(set(vertices), key=vertex_key))


def format_vertex(x: Vertex) -> str:
    return "-" if not x else ".".join(str(g) for g in x)


def parse_vertex(text: str, k: int | None = None) -> Vertex:
    text = text.strip()
    if text == "-":
        return ROOT
    try:
        word = tuple(int(part) for part in text.split("."))
    except ValueError:
        raise ValueError(f"malformed vertex {text!r}") from None
    check_word(word, k)
    return word


def check_word(word: Sequence[int], k: int | None = None) -> None:
    for pos, g in enumerate(word):
        if g < 1 or (k is not None and g > k + 1):
            raise ValueError(f"generator {g} out of range in {word}")
        if pos and word[pos - 1] == g:
            raise ValueError(f"word {word} is not reduced")


def multiply(x: Vertex, g: int) -> Vertex:
    """Right multiplication by a generator (a step along one edge)."""
    if x and x[-1] == g:
        return x[:-1]
    return x + (g,)


def translate(x: Vertex, g: Vertex) -> Vertex:
    """Left shift ``g x`` with cancellation at the junction."""
    p = 0
    n = min(len(g), len(x))
    while p < n and g[-1 - p] == x[p]:
        p += 1
    return g[: len(g) - p] + x[p:]


def inverse(x: Vertex) -> Vertex:
    return x[::-1]


def distance(x: Vertex, y: Vertex) -> int:
    p = 0
    n = min(len(x), len(y))
    while p < n and x[p] == y[p]:
        p += 1
    return len(x) + len(y) - 2 * p


def geodesic(x: Vertex, y: Vertex) -> list:
    """Vertices on the tree path from x to y, both ends included."""
    p = 0
    n = min(len(x), len(y))
    while p < n and x[p] == y[p]:
        p += 1
    up = [x[:m] for m in range(len(x), p - 1, -1)]
    down = [y[:m] for m in range(p + 1, len(y) + 1)]
    return up + down


def ball_volume(k: int, radius: int) -> int:
    """1 + (k+1)(k^r - 1)/(k - 1): vertices within ``radius`` of a point."""
    return 1 + (k + 1) * (k**radius - 1) // (k - 1)


def sphere_size(k: int, n: int) -> int:
    return 1 if n == 0 else (k + 1) * k ** (n - 1)


@dataclass(frozen=True)
class Ball:
    center: Vertex
    radius: int
    members: tuple

    def __contains__(self, x) -> bool:
        return distance(self.center, x) <= self.radius


@lru_cache(maxsize=None)
def ball_offsets(k: int, radius: int) -> tuple:
    """Reduced words of length <= radius in breadth-first generator order.

    The order fixes the canonical position of every ball member: the member
    at position p of the ball around x is ``translate(offsets[p], x)``.
    """
    out = [ROOT]
    frontier = [ROOT]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for g in range(1, k + 2):
                if not w or w[-1] != g:
                    nxt.append(w + (g,))
        out.extend(nxt)
        frontier = nxt
    return tuple(out)


@lru_cache(maxsize=None)
def _volume(k: int, n: int) -> tuple:
    return sort_vertices(ball_offsets(k, n))


class CayleyTree:
    """Operations on the Cayley tree of order ``k`` (every vertex has k+1 neighbours)."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("order k must be >= 1")
        self.k = k

    def __repr__(self):
        return f"CayleyTree(k={self.k})"

    @property
    def generators(self) -> range:
        return range(1, self.k + 2)

    def neighbors(self, x: Vertex) -> list:
        return [multiply(x, g) for g in self.generators]

    def check(self, x: Vertex) -> Vertex:
        check_word(x, self.k)
        return x

    def ball(self, x: Vertex, rprime: int) -> Ball:
        if rprime < 0:
            raise ValueError("ball radius must be nonnegative")
        members = tuple(translate(w, x) for w in ball_offsets(self.k, rprime))
        return Ball(x, rprime, members)

    def volume(self, n: int) -> tuple:
        """V_n in canonical order."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        return _volume(self.k, n)

    def sphere(self, n: int) -> tuple:
        """W_n in canonical order."""
        return tuple(x for x in self.volume(n) if len(x) == n)

    def neighborhood(self, A: Iterable[Vertex], radius: int) -> set:
        """All vertices within ``radius`` of the set A."""
        seen = set(A)
        frontier = list(seen)
        for _ in range(radius):
            nxt = []
            for x in frontier:
                for y in self.neighbors(x):
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen

    def outer_boundary(self, A: Iterable[Vertex]) -> tuple:
        """D(A): vertices outside A adjacent to some vertex of A."""
        A = set(A)
        if not A:
            raise ValueError("outer_boundary needs a nonempty set")
        out = {y for x in A for y in self.neighbors(x) if y not in A}
        return sort_vertices(out)

    def intersecting_balls(self, A: Iterable[Vertex], rprime: int) -> list:
        """C(A): the radius-r' balls meeting A, ordered by center."""
        A = set(A)
        if not A:
            raise ValueError("intersecting_balls needs a nonempty set")
        centers = sort_vertices(self.neighborhood(A, rprime))
        return [self.ball(c, rprime) for c in centers]

    def covering_multiplicity(self, A: Iterable[Vertex], r: int) -> int:
        """n(A): number of radius-r' balls containing A, with r' = (r+1)//2."""
        A = sort_vertices(A)
        if not A:
            raise ValueError("covering_multiplicity needs a nonempty set")
        if diameter(A) > r:
            raise ValueError(f"diam(A) = {diameter(A)} exceeds r = {r}")
        rprime = (r + 1) // 2
        candidates = self.neighborhood([A[0]], rprime)
        return sum(1 for c in candidates if all(distance(c, a) <= rprime for a in A))

    def is_connected(self, A: Iterable[Vertex]) -> bool:
        A = set(A)
        if not A:
            return False
        start = next(iter(A))
        seen = {start}
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y in self.neighbors(x):
                if y in A and y not in seen:
                    seen.add(y)
                    queue.append(y)
        return len(seen) == len(A)

    def components(self, A: Iterable[Vertex]) -> list:
        """Connected components of the subgraph induced by A, canonical order."""
        A = set(A)
        out = []
        for start in sort_vertices(A):
            if any(start in c for c in out):
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                x = queue.popleft()
                for y in self.neighbors(x):
                    if y in A and y not in comp:
                        comp.add(y)
                        queue.append(y)
            out.append(frozenset(comp))
        return [sort_vertices(c) for c in out]

    def steiner_vertices(self, A: Iterable[Vertex]) -> tuple:
        """Vertex set of the minimal connected subgraph containing A."""
        A = sort_vertices(A)
        if not A:
            return ()
        anchor = A[0]
        out = set()
        for x in A:
            out.update(geodesic(anchor, x))
        return sort_vertices(out)

    def random_connected(self, n: int, rng: random.Random, start: Vertex = ROOT) -> tuple:
        """Grow a connected n-vertex set by adjoining random outer-boundary vertices."""
        if n < 1:
            raise ValueError("n must be >= 1")
        A = {start}
        while len(A) < n:
            A.add(rng.choice(self.outer_boundary(A)))
        return sort_vertices(A)


def diameter(A: Sequence[Vertex]) -> int:
    A = list(A)
    return max((distance(x, y) for i, x in enumerate(A) for y in A[i:]), default=0)


def set_distance(A: Iterable[Vertex], B: Iterable[Vertex]) -> int:
    B = list(B)
    return min(distance(x, y) for x in A for y in B)


def boundary_size_formula(n: int, k: int) -> int:
    """Closed form (k-1)n + 2 for |D(A)| of a connected n-vertex set."""
    return (k - 1) * n + 2


def ball_count_recurrence(n: int, k: int, rprime: int) -> list:
    """Iterates u_0..u_{r'} of u_l = 2 + (k-1) * sum_{i<l} u_i with u_0 = n."""
    u = [n]
    for _ in range(rprime):
        u.append(2 + (k - 1) * sum(u))
    return u


def ball_count_closed_form(n: int, k: int, rprime: int) -> int:
    """Closed form k^(r'-1) ((k-1)n + 2) claimed for the number of balls meeting A."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return k ** (rprime - 1) * ((k - 1) * n + 2)


def connected_sets(
    seed: Vertex,
    size: int,
    neighbors,
    banned: Iterable[Vertex] = (),
) -> Iterator[frozenset]:
    """Each connected vertex set of at most ``size`` vertices containing ``seed``, once.

    ``neighbors`` maps a vertex to its adjacency list. Vertices in ``banned``
    never appear. Classic extension-set recursion: a candidate passed over
    in one branch is excluded from everything below it.
    """
    banned = set(banned)
    if seed in banned or size < 1:
        return

    def extend(current, ext, excluded):
        yield frozenset(current)
        if len(current) == size:
            return
        excluded = set(excluded)
        for idx, v in enumerate(ext):
            rest = ext[idx + 1 :]
            blocked = excluded | set(rest) | current
            new = [u for u in neighbors(v) if u not in blocked and u not in banned]
            # dedupe while keeping order
            seen = set()
            new = [u for u in new if not (u in seen or seen.add(u))]
            yield from extend(current | {v}, rest + new, excluded)
            excluded.add(v)

    first = [u for u in neighbors(seed) if u not in banned and u != seed]
    seen = set()
    first = [u for u in first if not (u in seen or seen.add(u))]
    yield from extend({seed}, first, {seed})
