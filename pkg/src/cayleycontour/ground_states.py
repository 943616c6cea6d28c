"""Ball spectrum, Peierls constant, assumption checks and improper balls."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .potentials import BallModel, SpinWindow, _window_ball_indices, layout
from .tree import CayleyTree


@dataclass(frozen=True)
class SpectrumReport:
    distinct_values: tuple
    u_min: Fraction
    lambda0: Fraction | None  # None when the spectrum has a single value
    minimizer_configs: tuple
    ground_states: tuple  # constant spins whose ball attains u_min
    spin_order: tuple  # ground-state spins first, then the rest

    @property
    def s(self) -> int:
        return len(self.ground_states)


@dataclass(frozen=True)
class Verdict:
    a1_sufficient: bool
    a2: bool
    a3: bool
    s: int
    lambda0: Fraction | None
    ground_states: tuple

    @property
    def ok(self) -> bool:
        return self.a1_sufficient and self.a2 and self.a3


@dataclass(frozen=True)
class Boundary:
    """Improper balls of a window, as indices into the window layout's ball list."""

    window: SpinWindow
    rprime: int
    ball_ids: tuple

    @property
    def centers(self) -> tuple:
        centers = layout(self.window.k, self.window.n, self.rprime).ball_centers
        return tuple(centers[b] for b in self.ball_ids)

    @property
    def balls(self) -> list:
        tree = CayleyTree(self.window.k)
        return [tree.ball(c, self.rprime) for c in self.centers]

    def __len__(self):
        return len(self.ball_ids)


@dataclass(frozen=True)
class PeierlsResult:
    holds: bool
    lhs: Fraction
    rhs: Fraction
    boundary_size: int

    @property
    def slack(self) -> Fraction:
        return self.lhs - self.rhs


def spectrum(model: BallModel) -> SpectrumReport:
    table = model.table
    values = tuple(sorted(set(table)))
    u_min = values[0]
    lam = values[1] - u_min if len(values) > 1 else None
    minimizers = tuple(idx for idx, u in enumerate(table) if u == u_min)
    gs = tuple(i for i in range(1, model.q + 1) if table[model.constant_index(i)] == u_min)
    order = gs + tuple(i for i in range(1, model.q + 1) if i not in gs)
    return SpectrumReport(values, u_min, lam, minimizers, gs, order)


def check_assumptions(model: BallModel, report: SpectrumReport | None = None) -> Verdict:
    """Finite checks standing in for the three ground-state assumptions.

    ``a1_sufficient``: only constant ball configurations attain the minimum,
    which forces every configuration with all balls minimal to be constant.
    ``a2``: the gap lambda0 is positive. ``a3``: some constant configuration
    attains the minimum on its (single, by translation invariance) ball type.
    """
    report = report or spectrum(model)
    constants = {model.constant_index(i) for i in range(1, model.q + 1)}
    a1 = all(idx in constants for idx in report.minimizer_configs)
    a2 = report.lambda0 is not None and report.lambda0 > 0
    a3 = report.s >= 1
    return Verdict(a1, a2, a3, report.s, report.lambda0, report.ground_states)


def _gs_indices(model: BallModel, gs) -> frozenset:
    return frozenset(model.constant_index(i) for i in gs)


def improper_ball_ids(model: BallModel, w: SpinWindow, gs=None) -> tuple:
    gs = spectrum_cached(model).ground_states if gs is None else gs
    proper = _gs_indices(model, gs)
    return tuple(b for b, idx in enumerate(_window_ball_indices(model, w)) if idx not in proper)


def improper_balls(model: BallModel, w: SpinWindow, gs=None) -> Boundary:
    """Balls meeting V_n whose configuration matches no ground state."""
    return Boundary(w, model.rprime, improper_ball_ids(model, w, gs))


@lru_cache(maxsize=256)
def spectrum_cached(model: BallModel) -> SpectrumReport:
    return spectrum(model)


def relative_energy(model: BallModel, w: SpinWindow) -> Fraction:
    """Sum over improper balls of U - u_min (the window's energy above the ground state)."""
    report = spectrum_cached(model)
    if w.boundary not in report.ground_states:
        raise ValueError(f"boundary mark {w.boundary} is not a ground state {report.ground_states}")
    proper = _gs_indices(model, report.ground_states)
    table, u_min = model.table, report.u_min
    total = Fraction(0)
    for idx in _window_ball_indices(model, w):
        if idx not in proper:
            total += table[idx] - u_min
    return total


def peierls_check(model: BallModel, w: SpinWindow) -> PeierlsResult:
    report = spectrum_cached(model)
    if report.lambda0 is None:
        raise ValueError("degenerate spectrum: lambda0 undefined")
    lhs = relative_energy(model, w)
    size = len(improper_ball_ids(model, w, report.ground_states))
    rhs = report.lambda0 * size
    return PeierlsResult(lhs >= rhs, lhs, rhs, size)


# ---------------------------------------------------------------------------
# window generators for fuzzing

FLIP_KINDS = ("random", "single", "double", "cluster")


def random_window(k, n, q, boundary, rng: random.Random, kind="random", density=0.3) -> SpinWindow:
    """A window obtained from the constant ``boundary`` configuration by flips.

    ``kind`` is one of ``FLIP_KINDS``: independent flips at ``density``, a
    single flipped vertex, two flipped vertices, or a connected cluster set
    to one value.
    """
    vertices = CayleyTree(k).volume(n)
    others = [s for s in range(1, q + 1) if s != boundary]
    updates = {}
    if kind == "random":
        for x in vertices:
            if rng.random() < density:
                updates[x] = rng.choice(others)
    elif kind == "single":
        updates[rng.choice(vertices)] = rng.choice(others)
    elif kind == "double":
        for x in rng.sample(vertices, 2):
            updates[x] = rng.choice(others)
    elif kind == "cluster":
        tree = CayleyTree(k)
        inside = set(vertices)
        cluster = {rng.choice(vertices)}
        target = rng.randint(1, max(1, len(vertices) // 3))
        while len(cluster) < target:
            frontier = [y for y in tree.outer_boundary(cluster) if y in inside]
            if not frontier:
                break
            cluster.add(rng.choice(frontier))
        value = rng.choice(others)
        updates = {x: value for x in cluster}
    else:
        raise ValueError(f"unknown flip kind {kind!r}")
    return SpinWindow.from_mapping(k, n, boundary, updates)


def sample_seed(seed: int, idx: int) -> int:
    return seed * 1_000_003 + idx


def fuzz_window(model: BallModel, seed: int, idx: int, n_max=3, density=0.3) -> tuple:
    """The idx-th fuzz window for ``seed``: (sample seed, window)."""
    s = sample_seed(seed, idx)
    rng = random.Random(s)
    gs = spectrum_cached(model).ground_states
    n = rng.randint(1, n_max)
    boundary = rng.choice(gs)
    kind = FLIP_KINDS[idx % len(FLIP_KINDS)]
    return s, random_window(model.k, n, model.q, boundary, rng, kind=kind, density=density)


def peierls_fuzz(model: BallModel, samples: int, seed: int = 0, n_max=3, density=0.3):
    """Yield (sample seed, PeierlsResult) over seeded random windows."""
    for idx in range(samples):
        s, w = fuzz_window(model, seed, idx, n_max=n_max, density=density)
        yield s, peierls_check(model, w)
