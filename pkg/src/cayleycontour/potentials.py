"""Ball potentials, interaction compilation, spin windows and conditional energies.

Energies are exact ``Fraction`` values throughout. A ball configuration is
the tuple of spins read in canonical ball order (see ``tree.ball_offsets``);
its integer index is that tuple read as a base-q number with spin 1 as digit
0 and the center as the most significant digit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import CapExceeded, enumeration_cap
from .tree import (
    ROOT,
    Ball,
    CayleyTree,
    ball_offsets,
    diameter,
    format_vertex,
    parse_vertex,
    sort_vertices,
    translate,
    vertex_key,
)


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


def rprime_of(r: int) -> int:
    """Ball radius r' = floor((r + 1) / 2) for interaction radius r."""
    if r < 1:
        raise ValueError("interaction radius r must be >= 1")
    return (r + 1) // 2


def config_index(spins: Sequence[int], q: int) -> int:
    idx = 0
    for s in spins:
        idx = idx * q + (s - 1)
    return idx


def config_from_index(idx: int, q: int, size: int) -> tuple:
    out = [0] * size
    for pos in range(size - 1, -1, -1):
        idx, d = divmod(idx, q)
        out[pos] = d + 1
    return tuple(out)


class BallModel:
    """A translation-invariant ball potential U(sigma_b) on the Cayley tree of order k.

    ``evaluator`` receives the spins of a ball in canonical order and returns
    its energy. The dense table of all q^|b| values is built on first use and
    refused beyond the enumeration cap.
    """

    def __init__(
        self,
        k: int,
        q: int,
        r: int,
        evaluator: Callable[[tuple], Fraction],
        name: str = "custom",
        params: Mapping | None = None,
        cap: int | None = None,
    ):
        if k < 2:
            raise ValueError("branching order k must be >= 2")
        if q < 2:
            raise ValueError("alphabet size q must be >= 2")
        self.k = k
        self.q = q
        self.r = r
        self.rprime = rprime_of(r)
        self.evaluator = evaluator
        self.name = name
        self.params = dict(params or {})
        self.cap = cap
        self._cache = {}

    def __repr__(self):
        ps = ", ".join(f"{key}={val}" for key, val in self.params.items() if not isinstance(val, dict))
        return f"BallModel({self.name}, k={self.k}, q={self.q}, r={self.r}{', ' + ps if ps else ''})"

    @property
    def ball_size(self) -> int:
        return len(ball_offsets(self.k, self.rprime))

    @property
    def n_configs(self) -> int:
        return self.q**self.ball_size

    @cached_property
    def table(self) -> tuple:
        """Energy of every canonical ball configuration, indexed by ``config_index``."""
        cap = enumeration_cap(self.cap)
        if self.n_configs > cap:
            raise CapExceeded(f"ball spectrum of {self!r}", self.n_configs, cap)
        return tuple(
            as_fraction(self.evaluator(cfg))
            for cfg in product(range(1, self.q + 1), repeat=self.ball_size)
        )

    @cached_property
    def float_table(self) -> tuple:
        return tuple(float(u) for u in self.table)

    def energy(self, spins: Sequence[int]) -> Fraction:
        spins = tuple(spins)
        if "table" in self.__dict__:
            return self.table[config_index(spins, self.q)]
        if spins not in self._cache:
            self._cache[spins] = as_fraction(self.evaluator(spins))
        return self._cache[spins]

    def energy_at(self, idx: int) -> Fraction:
        return self.table[idx]

    def constant_index(self, spin: int) -> int:
        return config_index((spin,) * self.ball_size, self.q)

    def scaled(self, factor, shift=0) -> "BallModel":
        """The model with energies ``factor * U + shift``."""
        factor, shift = as_fraction(factor), as_fraction(shift)
        base = self.evaluator
        params = dict(self.params, scale=factor, shift=shift)
        return BallModel(
            self.k, self.q, self.r, lambda c: factor * base(c) + shift,
            name=self.name, params=params, cap=self.cap,
        )


# ---------------------------------------------------------------------------
# interaction potentials and their ball compilation


def canonical_shape(A: Sequence) -> tuple:
    """Representative of the translation class of a vertex set.

    Each element in turn is shifted to the root; the length-lex smallest
    sorted image wins. Returns the shape as a canonically sorted tuple.
    """
    A = sort_vertices(A)
    best = None
    for a in A:
        shifted = sort_vertices(translate(x, a[::-1]) for x in A)
        key = tuple(vertex_key(x) for x in shifted)
        if best is None or key < best[0]:
            best = (key, shifted)
    return best[1]


@dataclass
class InteractionPotential:
    """H = sum over vertex sets A with diam(A) <= r of I(sigma_A).

    ``terms`` maps a canonical shape (see ``canonical_shape``) to a function
    of the spins on A read in the shape's order. The function must be
    invariant under the shape's own translation symmetries (for an edge this
    means symmetric in its two arguments).
    """

    r: int
    terms: dict = field(default_factory=dict)

    def add(self, shape: Sequence, func: Callable) -> None:
        shape = canonical_shape(shape)
        if diameter(shape) > self.r:
            raise ValueError(f"shape {shape} has diameter {diameter(shape)} > r = {self.r}")
        if shape in self.terms:
            prev = self.terms[shape]
            self.terms[shape] = lambda *s, _a=prev, _b=func: _a(*s) + _b(*s)
        else:
            self.terms[shape] = func

    def add_pairs(self, k: int, dist: int, func: Callable) -> None:
        """Register ``func(u, v)`` for every translation class of pairs at distance ``dist``."""
        shapes = {canonical_shape((ROOT, w)) for w in ball_offsets(k, dist) if len(w) == dist}
        for shape in sorted(shapes):
            self.add(shape, func)

    def placements(self, A_region: Sequence) -> list:
        """All (shape, placed vertex tuple) with the placed set inside ``A_region``."""
        region = set(A_region)
        out = []
        seen = set()
        for shape in self.terms:
            for y in sort_vertices(region):
                placed = tuple(translate(s, y) for s in shape)
                key = frozenset(placed)
                if (shape, key) in seen:
                    continue
                if all(p in region for p in placed):
                    seen.add((shape, key))
                    out.append((shape, placed))
        return out

    def energy_of(self, shape, spins) -> Fraction:
        return as_fraction(self.terms[shape](*spins))


def compile_interaction(
    potential: InteractionPotential, k: int, q: int, name: str = "compiled", params=None
) -> BallModel:
    """Ball potential U(sigma_b) = sum over A in b of I(sigma_A) / n(A)."""
    tree = CayleyTree(k)
    rprime = rprime_of(potential.r)
    offsets = ball_offsets(k, rprime)
    position = {w: p for p, w in enumerate(offsets)}
    plan = []
    for shape, placed in potential.placements(offsets):
        mult = tree.covering_multiplicity(placed, potential.r)
        if mult == 0:
            raise ValueError(f"shape {shape} is covered by no ball")
        plan.append((shape, tuple(position[x] for x in placed), Fraction(1, mult)))

    def evaluator(cfg):
        total = Fraction(0)
        for shape, positions, weight in plan:
            total += potential.energy_of(shape, [cfg[p] for p in positions]) * weight
        return total

    return BallModel(k, q, potential.r, evaluator, name=name, params=params)


# ---------------------------------------------------------------------------
# example families


def potts_competing(J1, J2, k: int = 2, q: int = 3) -> BallModel:
    """Potts model with nearest-neighbour coupling J1 and next-nearest J2 (r = 2).

    The edge weight 1/2 comes out of the compiler (each edge lies in two
    radius-1 balls); distance-2 pairs lie in exactly one.
    """
    J1, J2 = as_fraction(J1), as_fraction(J2)
    pot = InteractionPotential(r=2)
    pot.add_pairs(k, 1, lambda u, v: J1 if u == v else 0)
    pot.add_pairs(k, 2, lambda u, v: J2 if u == v else 0)
    return compile_interaction(pot, k, q, name="potts_competing", params={"J1": J1, "J2": J2})


def generalized_kronecker(J, r: int = 1, k: int = 2, q: int = 3) -> BallModel:
    """U(sigma_b) = -J (|b| - number of distinct spins on b)."""
    J = as_fraction(J)

    def evaluator(cfg):
        return -J * (len(cfg) - len(set(cfg)))

    return BallModel(k, q, r, evaluator, name="kronecker", params={"J": J})


def nearest_neighbor(q: int, k: int, pair_table) -> BallModel:
    """Nearest-neighbour model (r = 1) from a symmetric table ``pair_table[u][v]``.

    ``pair_table`` may be a callable ``f(u, v)`` or a mapping keyed by (u, v).
    """
    if callable(pair_table):
        table = {(u, v): as_fraction(pair_table(u, v)) for u in range(1, q + 1) for v in range(1, q + 1)}
    else:
        table = {(u, v): as_fraction(pair_table.get((u, v), 0)) for u in range(1, q + 1) for v in range(1, q + 1)}
    for (u, v), val in table.items():
        if table[(v, u)] != val:
            raise ValueError(f"pair table is not symmetric at ({u}, {v})")
    pot = InteractionPotential(r=1)
    pot.add_pairs(k, 1, lambda u, v: table[(u, v)])
    return compile_interaction(pot, k, q, name="nn_table", params={"table": table})


def ising(J, k: int = 2) -> BallModel:
    J = as_fraction(J)
    return nearest_neighbor(2, k, lambda u, v: -J * (2 * (u == v) - 1))


def potts(J, q: int = 3, k: int = 2) -> BallModel:
    J = as_fraction(J)
    return nearest_neighbor(q, k, lambda u, v: -J * (u == v))


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class Layout:
    """Index bookkeeping for windows of radius n with balls of radius r'."""

    k: int
    n: int
    rprime: int
    vertices: tuple
    index: dict
    ball_centers: tuple
    ball_members: tuple  # per ball: member window indices, -1 outside V_n
    balls_of_vertex: tuple  # per window vertex: indices of balls containing it
    neighbors: tuple  # per window vertex: indices of neighbours inside V_n


@lru_cache(maxsize=64)
def layout(k: int, n: int, rprime: int) -> Layout:
    tree = CayleyTree(k)
    vertices = tree.volume(n)
    index = {x: p for p, x in enumerate(vertices)}
    centers = tree.volume(n + rprime)
    offsets = ball_offsets(k, rprime)
    members = tuple(
        tuple(index.get(translate(w, c), -1) for w in offsets) for c in centers
    )
    containing = [[] for _ in vertices]
    for b, mem in enumerate(members):
        for p in mem:
            if p >= 0:
                containing[p].append(b)
    nbrs = tuple(
        tuple(index[y] for y in tree.neighbors(x) if y in index) for x in vertices
    )
    return Layout(k, n, rprime, vertices, index, centers, members,
                  tuple(tuple(c) for c in containing), nbrs)


@dataclass(frozen=True)
class SpinWindow:
    """A configuration on V_n extended outside by the constant ``boundary``."""

    k: int
    n: int
    boundary: int
    values: tuple  # spins aligned with CayleyTree(k).volume(n)

    def __post_init__(self):
        expected = len(self.vertices)
        if len(self.values) != expected:
            raise ValueError(f"window of radius {self.n} needs {expected} spins, got {len(self.values)}")

    @classmethod
    def constant(cls, k, n, boundary, value=None):
        size = len(CayleyTree(k).volume(n))
        return cls(k, n, boundary, (boundary if value is None else value,) * size)

    @classmethod
    def from_mapping(cls, k, n, boundary, spins: Mapping):
        vertices = CayleyTree(k).volume(n)
        allowed = set(vertices)
        for x in spins:
            if x not in allowed:
                raise ValueError(f"vertex {format_vertex(x)} lies outside V_{n}")
        return cls(k, n, boundary, tuple(spins.get(x, boundary) for x in vertices))

    @property
    def vertices(self) -> tuple:
        return CayleyTree(self.k).volume(self.n)

    def layout(self, rprime: int) -> Layout:
        return layout(self.k, self.n, rprime)

    def spin(self, x) -> int:
        idx = layout(self.k, self.n, 1).index.get(x)
        return self.boundary if idx is None else self.values[idx]

    def as_mapping(self) -> dict:
        return dict(zip(self.vertices, self.values))

    def with_spins(self, updates: Mapping) -> "SpinWindow":
        idx = layout(self.k, self.n, 1).index
        vals = list(self.values)
        for x, s in updates.items():
            vals[idx[x]] = s
        return SpinWindow(self.k, self.n, self.boundary, tuple(vals))

    def deviations(self) -> tuple:
        return tuple(x for x, s in zip(self.vertices, self.values) if s != self.boundary)


def ball_spins(w: SpinWindow, b: Ball) -> tuple:
    return tuple(w.spin(x) for x in b.members)


def canonical_ball_config(w: SpinWindow, b: Ball, q: int) -> int:
    """Index of the spins seen by ball ``b``, boundary mark outside the window."""
    return config_index(ball_spins(w, b), q)


def _window_ball_indices(model: BallModel, w: SpinWindow) -> list:
    lay = w.layout(model.rprime)
    vals, i, q = w.values, w.boundary, model.q
    out = []
    for mem in lay.ball_members:
        idx = 0
        for p in mem:
            idx = idx * q + ((vals[p] if p >= 0 else i) - 1)
        out.append(idx)
    return out


def ball_energies(model: BallModel, w: SpinWindow) -> list:
    """U of every ball meeting V_n, in the layout's ball order."""
    if w.k != model.k:
        raise ValueError(f"window has k={w.k} but model has k={model.k}")
    table = model.table
    return [table[idx] for idx in _window_ball_indices(model, w)]


def conditional_energy(model: BallModel, w: SpinWindow) -> Fraction:
    """Sum of U over all balls meeting V_n, spins outside V_n fixed to the boundary mark."""
    return sum(ball_energies(model, w), Fraction(0))


# ---------------------------------------------------------------------------
# file formats


class ModelFileError(ValueError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def _read_pair_table(path: Path) -> dict:
    table = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 3:
                raise ModelFileError(path, lineno, "expected u,v,value")
            try:
                table[(int(row[0]), int(row[1]))] = parse_rational(row[2])
            except ValueError as exc:
                raise ModelFileError(path, lineno, str(exc)) from None
    return table


MODEL_KEYS = {"model", "k", "q", "r", "J1", "J2", "J", "table"}


def load_model(path) -> BallModel:
    """Read a key-value model file (``model = potts_competing | kronecker | nn_table``)."""
    path = Path(path)
    fields = {}
    lines = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ModelFileError(path, lineno, f"expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in MODEL_KEYS:
            raise ModelFileError(path, lineno, f"unknown key {key!r}")
        fields[key] = value
        lines[key] = lineno

    def get(key, conv, default=None):
        if key not in fields:
            if default is None:
                raise ModelFileError(path, 0, f"missing key {key!r}")
            return default
        try:
            return conv(fields[key])
        except (ValueError, ZeroDivisionError) as exc:
            raise ModelFileError(path, lines[key], f"bad value for {key}: {exc}") from None

    kind = get("model", str)
    k = get("k", int, 2)
    model = None
    try:
        if kind == "potts_competing":
            model = potts_competing(get("J1", parse_rational), get("J2", parse_rational), k=k, q=get("q", int, 3))
        elif kind == "kronecker":
            model = generalized_kronecker(get("J", parse_rational), r=get("r", int, 1), k=k, q=get("q", int, 3))
        elif kind == "nn_table":
            q = get("q", int)
            tpath = Path(get("table", str))
            if not tpath.is_absolute():
                tpath = path.parent / tpath
            model = nearest_neighbor(q, k, _read_pair_table(tpath))
    except ModelFileError:
        raise
    except ValueError as exc:
        raise ModelFileError(path, 0, str(exc)) from None
    if model is None:
        raise ModelFileError(path, lines.get("model", 0), f"unknown model {kind!r}")
    if "r" in fields and get("r", int) != model.r:
        raise ModelFileError(path, lines["r"], f"model {kind} has r={model.r}, file says r={fields['r']}")
    return model


def _parse_header(text: str, path, lineno: int) -> dict:
    out = {}
    for token in text.split():
        if "=" not in token:
            raise ModelFileError(path, lineno, f"bad header token {token!r}")
        key, value = token.split("=", 1)
        try:
            out[key] = int(value)
        except ValueError:
            raise ModelFileError(path, lineno, f"header value {token!r} is not an integer") from None
    return out


def load_window(path) -> SpinWindow:
    """Read ``n=<int> k=<int> boundary=<i>`` then ``vertex spin`` lines."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    body = [(no, ln.strip()) for no, ln in enumerate(lines, 1) if ln.strip() and not ln.startswith("#")]
    if not body:
        raise ModelFileError(path, 1, "empty window file")
    head = _parse_header(body[0][1], path, body[0][0])
    for key in ("n", "k", "boundary"):
        if key not in head:
            raise ModelFileError(path, body[0][0], f"header lacks {key}=")
    k, n = head["k"], head["n"]
    spins = {}
    for lineno, line in body[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ModelFileError(path, lineno, "expected 'vertex spin'")
        try:
            x = parse_vertex(parts[0], k)
            s = int(parts[1])
        except ValueError as exc:
            raise ModelFileError(path, lineno, str(exc)) from None
        if len(x) > n:
            raise ModelFileError(path, lineno, f"vertex {parts[0]} lies outside V_{n}")
        if s < 1:
            raise ModelFileError(path, lineno, f"spin {s} must be >= 1")
        spins[x] = s
    return SpinWindow.from_mapping(k, n, head["boundary"], spins)


def dump_window(w: SpinWindow) -> str:
    lines = [f"n={w.n} k={w.k} boundary={w.boundary}"]
    lines += [f"{format_vertex(x)} {s}" for x, s in zip(w.vertices, w.values)]
    return "\n".join(lines) + "\n"
