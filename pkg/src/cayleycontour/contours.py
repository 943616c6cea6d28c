"""Edge boundaries, subcontours, contours, contour removal and contour counting.

Conventions fixed here (both are needed for contours of one window to own
disjoint sets of improper balls):

* the vertex set V(T) of a subcontour is the vertex set of its support
  edges, i.e. the interior together with its outer boundary D(Int T);
* a ball belongs to ``imp`` of a contour when it is improper and meets the
  contour's interior.
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path

from . import CapExceeded, enumeration_cap
from .ground_states import Boundary, improper_ball_ids, spectrum_cached
from .potentials import BallModel, ModelFileError, SpinWindow, _parse_header, config_index, layout
from .tree import (
    CayleyTree,
    ball_offsets,
    connected_sets,
    format_vertex,
    parse_vertex,
    set_distance,
    sort_vertices,
    translate,
)


def edge(x, y) -> tuple:
    return (x, y) if len(x) < len(y) else (y, x)


@dataclass(frozen=True)
class Subcontour:
    mark: int
    interior: tuple  # canonical vertex order
    support: frozenset  # edges with exactly one endpoint in the interior
    k: int

    @property
    def key(self) -> tuple:
        return (self.mark, self.interior)

    @property
    def vertices(self) -> tuple:
        """V(T): endpoints of the support edges (interior plus its outer boundary)."""
        return sort_vertices(v for e in self.support for v in e)


def make_subcontour(k: int, mark: int, interior) -> Subcontour:
    tree = CayleyTree(k)
    inside = set(interior)
    support = frozenset(edge(x, y) for x in inside for y in tree.neighbors(x) if y not in inside)
    return Subcontour(mark, sort_vertices(inside), support, k)


def subcontour_distance(t1: Subcontour, t2: Subcontour) -> int:
    return set_distance(t1.vertices, t2.vertices)


@dataclass(frozen=True)
class Contour:
    subcontours: tuple  # sorted by key

    @property
    def key(self) -> tuple:
        return tuple(t.key for t in self.subcontours)

    @property
    def interior(self) -> tuple:
        return sort_vertices(x for t in self.subcontours for x in t.interior)

    @property
    def vertices(self) -> tuple:
        return sort_vertices(x for t in self.subcontours for x in t.vertices)

    @property
    def k(self) -> int:
        return self.subcontours[0].k

    def marking(self) -> dict:
        return {x: t.mark for t in self.subcontours for x in t.interior}


def contour_from_marks(k: int, marks: dict) -> Contour:
    """Contour whose interior carries ``marks`` (vertex -> spin), split into monochrome components."""
    tree = CayleyTree(k)
    subs = []
    for mark in sorted(set(marks.values())):
        for comp in tree.components([x for x, s in marks.items() if s == mark]):
            subs.append(make_subcontour(k, mark, comp))
    return Contour(tuple(sorted(subs, key=lambda t: t.key)))


@dataclass(frozen=True)
class ContourDecomposition:
    window: SpinWindow
    rprime: int
    subcontours: tuple
    contours: tuple
    boundary: Boundary | None = None
    imp: tuple = ()  # per contour: improper ball ids meeting its interior

    def sizes(self) -> tuple:
        return tuple(len(b) for b in self.imp)

    def find(self, contour: Contour):
        for pos, c in enumerate(self.contours):
            if c.key == contour.key:
                return pos
        return None

    def imp_of(self, contour: Contour) -> tuple:
        pos = self.find(contour)
        if pos is None:
            raise ValueError("contour is not part of this decomposition")
        return self.imp[pos]


def edge_boundary(w: SpinWindow) -> tuple:
    """Edges of L_{n+1} whose endpoint spins differ (boundary mark outside V_n)."""
    out = []
    for x in CayleyTree(w.k).volume(w.n + 1):
        if x:
            parent = x[:-1]
            if w.spin(parent) != w.spin(x):
                out.append((parent, x))
    return tuple(out)


def subcontours(w: SpinWindow) -> list:
    """Maximal connected monochrome sets of non-boundary spins, with supports and marks."""
    lay = layout(w.k, w.n, 1)
    vals, i = w.values, w.boundary
    seen = [False] * len(vals)
    out = []
    for start, s in enumerate(vals):
        if s == i or seen[start]:
            continue
        comp = [start]
        seen[start] = True
        queue = deque([start])
        while queue:
            p = queue.popleft()
            for nb in lay.neighbors[p]:
                if not seen[nb] and vals[nb] == s:
                    seen[nb] = True
                    comp.append(nb)
                    queue.append(nb)
        out.append(make_subcontour(w.k, s, [lay.vertices[p] for p in comp]))
    return sorted(out, key=lambda t: t.key)


@lru_cache(maxsize=None)
def _power_neighbors(k: int, x, radius: int) -> tuple:
    near = CayleyTree(k).neighborhood([x], radius)
    near.discard(x)
    return sort_vertices(near)


def group_contours(subs, rprime: int) -> list:
    """Components of subcontours under adjacency dist(T1, T2) <= 2(r'-1).

    On a tree dist(V(T1), V(T2)) = max(d(Int T1, Int T2) - 2, 0), so the
    threshold is applied as interior distance <= 2r' through a vertex lookup.
    """
    subs = list(subs)
    if not subs:
        return []
    k = subs[0].k
    owner = {x: pos for pos, t in enumerate(subs) for x in t.interior}
    parent = list(range(len(subs)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for pos, t in enumerate(subs):
        for x in t.interior:
            for y in _power_neighbors(k, x, 2 * rprime):
                other = owner.get(y)
                if other is not None and other != pos:
                    ra, rb = find(pos), find(other)
                    if ra != rb:
                        parent[ra] = rb
    groups = {}
    for pos in range(len(subs)):
        groups.setdefault(find(pos), []).append(subs[pos])
    contours = [Contour(tuple(sorted(g, key=lambda t: t.key))) for g in groups.values()]
    return sorted(contours, key=lambda c: c.key)


def imp_ball_ids(contour: Contour, boundary: Boundary) -> tuple:
    """Improper balls of ``boundary`` meeting the contour's interior."""
    w = boundary.window
    lay = layout(w.k, w.n, boundary.rprime)
    improper = set(boundary.ball_ids)
    hit = set()
    for x in contour.interior:
        p = lay.index.get(x)
        if p is None:
            continue
        hit.update(b for b in lay.balls_of_vertex[p] if b in improper)
    return tuple(sorted(hit))


def imp_balls(contour: Contour, boundary: Boundary) -> list:
    lay = layout(boundary.window.k, boundary.window.n, boundary.rprime)
    tree = CayleyTree(boundary.window.k)
    return [tree.ball(lay.ball_centers[b], boundary.rprime) for b in imp_ball_ids(contour, boundary)]


def decompose(w: SpinWindow, model: BallModel | None = None, rprime: int | None = None) -> ContourDecomposition:
    """Subcontours, contours and (with a model) improper balls and imp sets of a window."""
    if model is not None:
        if model.k != w.k:
            raise ValueError(f"window has k={w.k} but model has k={model.k}")
        rprime = model.rprime
    if rprime is None:
        raise ValueError("decompose needs a model or rprime")
    subs = tuple(subcontours(w))
    contours = tuple(group_contours(subs, rprime))
    if model is None:
        return ContourDecomposition(w, rprime, subs, contours)
    boundary = Boundary(w, rprime, improper_ball_ids(model, w))
    imp = tuple(imp_ball_ids(c, boundary) for c in contours)
    return ContourDecomposition(w, rprime, subs, contours, boundary, imp)


def remove_contour(w: SpinWindow, contour: Contour, rprime: int) -> SpinWindow:
    """Reset the contour's interior to the boundary mark."""
    keys = {c.key for c in group_contours(subcontours(w), rprime)}
    if contour.key not in keys:
        raise ValueError("contour does not occur in this window")
    return w.with_spins({x: w.boundary for x in contour.interior})


# ---------------------------------------------------------------------------
# interior classification


@dataclass(frozen=True)
class InteriorClassification:
    m_minus: tuple
    m_zero: tuple
    m_plus: tuple
    y_gamma: tuple
    k_gamma: tuple


def _distance_to_outside(tree: CayleyTree, x, inside: set) -> int:
    seen = {x}
    frontier = [x]
    d = 0
    while True:
        d += 1
        nxt = []
        for v in frontier:
            for y in tree.neighbors(v):
                if y not in inside:
                    return d
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt


def classify_interior(contour: Contour, rprime: int) -> InteriorClassification:
    tree = CayleyTree(contour.k)
    inside = set(contour.interior)
    deep, shallow = [], []
    for x in contour.interior:
        (deep if _distance_to_outside(tree, x, inside) > rprime else shallow).append(x)
    plus = tree.neighborhood(inside, rprime) - inside
    k_gamma = tree.steiner_vertices(inside)
    closed = inside | set(tree.outer_boundary(inside))
    y_gamma = [x for x in k_gamma if x not in closed]
    return InteriorClassification(
        sort_vertices(deep), sort_vertices(shallow), sort_vertices(plus),
        sort_vertices(y_gamma), k_gamma,
    )


# ---------------------------------------------------------------------------
# counting


def contour_bound_constants(k: int, rprime: int) -> tuple:
    """(C0, log theta) with C0 = 1 + (k+1)/(k-1) (k^r' - 1) and theta = (2ek)^(2(k+1)(r'-1)k^(r'-1) + 2)."""
    c0 = 1 + Fraction(k + 1, k - 1) * (k**rprime - 1)
    exponent = 2 * (k + 1) * (rprime - 1) * k ** (rprime - 1) + 2
    return c0, exponent * math.log(2 * math.e * k)


def abstract_imp_size(model: BallModel, marks: dict, boundary: int, gs) -> int:
    """|imp| of the contour whose interior carries ``marks`` and everything else is ``boundary``."""
    tree = CayleyTree(model.k)
    offsets = ball_offsets(model.k, model.rprime)
    proper = {model.constant_index(g) for g in gs}
    count = 0
    for c in tree.neighborhood(marks, model.rprime):
        spins = [marks.get(translate(w, c), boundary) for w in offsets]
        if config_index(spins, model.q) not in proper:
            count += 1
    return count


def enumerate_contours(model: BallModel, x=(), l_max: int = 4, boundary: int | None = None, cap=None):
    """Every contour gamma with x in V(gamma) and |gamma| <= l_max, as (|gamma|, marks).

    The interior S of a contour is connected in the graph linking vertices at
    distance <= 2r', and every vertex of D(S) carries an improper ball, so
    (k-1)|S| + 2 <= |D(S)| <= |gamma| bounds the interiors to enumerate.
    """
    report = spectrum_cached(model)
    gs = report.ground_states
    boundary = gs[0] if boundary is None else boundary
    k, rprime = model.k, model.rprime
    s_max = max(0, (l_max - 2) // (k - 1))
    others = [s for s in range(1, model.q + 1) if s != boundary]
    tree = CayleyTree(k)
    seeds = sort_vertices(tree.neighborhood([x], 1))
    cap = enumeration_cap(cap)
    visited = 0

    def nbrs(v):
        return _power_neighbors(k, v, 2 * rprime)

    for pos, seed in enumerate(seeds):
        for S in connected_sets(seed, s_max, nbrs, banned=seeds[:pos]):
            S = sort_vertices(S)
            for marking in product(others, repeat=len(S)):
                visited += 1
                if visited > cap:
                    raise CapExceeded(f"contour enumeration up to l={l_max}", visited, cap)
                marks = dict(zip(S, marking))
                size = abstract_imp_size(model, marks, boundary, gs)
                if size <= l_max:
                    yield size, marks


@dataclass(frozen=True)
class ContourCount:
    l: int
    count: int
    c0: Fraction
    log_theta: float

    @property
    def log_bound(self) -> float:
        return math.log(self.c0) + self.l * self.log_theta

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound)

    @property
    def holds(self) -> bool:
        return self.count == 0 or math.log(self.count) <= self.log_bound

    @property
    def log_slack(self) -> float:
        return self.log_bound - (math.log(self.count) if self.count else float("-inf"))


def contour_size_histogram(model: BallModel, x=(), l_max: int = 4, boundary=None, cap=None) -> Counter:
    return Counter(size for size, _ in enumerate_contours(model, x, l_max, boundary, cap))


def count_contours(model: BallModel, l: int, x=(), boundary=None, cap=None) -> ContourCount:
    """N_l(x), the number of contours through x with |gamma| = l, against C0 theta^l."""
    if model.k < 2:
        raise ValueError("contour counting needs k >= 2")
    hist = contour_size_histogram(model, x, l, boundary, cap)
    c0, log_theta = contour_bound_constants(model.k, model.rprime)
    return ContourCount(l, hist.get(l, 0), c0, log_theta)


def count_connected_ball_subgraphs(k: int, n: int, cap=None) -> int:
    """Connected n-vertex subgraphs of the ball graph G(M_r) through a fixed ball.

    G(M_r) links balls with adjacent centers, so it is the Cayley tree itself.
    """
    tree = CayleyTree(k)
    cap = enumeration_cap(cap)
    count = 0
    seen = 0
    for S in connected_sets((), n, tree.neighbors):
        seen += 1
        if seen > cap:
            raise CapExceeded(f"ball-graph subgraphs of size {n}", seen, cap)
        if len(S) == n:
            count += 1
    return count


# ---------------------------------------------------------------------------
# contour files


def load_contour(path) -> tuple:
    """Read a contour file; returns (header dict, Contour)."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    body = [(no, ln.strip()) for no, ln in enumerate(lines, 1) if ln.strip() and not ln.startswith("#")]
    if not body:
        raise ModelFileError(path, 1, "empty contour file")
    head = _parse_header(body[0][1], path, body[0][0])
    for key in ("k", "r", "q", "boundary"):
        if key not in head:
            raise ModelFileError(path, body[0][0], f"header lacks {key}=")
    marks = {}
    mark = None
    for lineno, line in body[1:]:
        if line.startswith("mark="):
            try:
                mark = int(line[5:])
            except ValueError:
                raise ModelFileError(path, lineno, f"bad mark {line!r}") from None
            if mark == head["boundary"] or not 1 <= mark <= head["q"]:
                raise ModelFileError(path, lineno, f"mark {mark} invalid for boundary {head['boundary']}")
            continue
        if mark is None:
            raise ModelFileError(path, lineno, "vertex line before any mark= line")
        try:
            x = parse_vertex(line, head["k"])
        except ValueError as exc:
            raise ModelFileError(path, lineno, str(exc)) from None
        if x in marks:
            raise ModelFileError(path, lineno, f"vertex {line} listed twice")
        marks[x] = mark
    if not marks:
        raise ModelFileError(path, body[-1][0], "contour has no interior vertices")
    return head, contour_from_marks(head["k"], marks)


def dump_contour(contour: Contour, r: int, q: int, boundary: int) -> str:
    lines = [f"k={contour.k} r={r} q={q} boundary={boundary}"]
    for t in contour.subcontours:
        lines.append(f"mark={t.mark}")
        lines.extend(format_vertex(x) for x in t.interior)
    return "\n".join(lines) + "\n"
