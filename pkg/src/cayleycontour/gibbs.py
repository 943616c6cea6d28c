"""Finite-volume Gibbs measures with constant boundary condition.

Two engines compute the same quantities: ``enum`` sums over every window
configuration (the oracle) and ``dp`` runs an exact message recursion on the
tree, available for ball radius r' = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from . import CapExceeded, enumeration_cap
from .contours import Contour, decompose
from .ground_states import spectrum_cached
from .potentials import BallModel, SpinWindow, layout


@dataclass(frozen=True)
class GibbsSummary:
    beta: float
    boundary_mark: int
    n: int
    log_z: float
    root_marginals: tuple
    engine: str


@dataclass(frozen=True)
class ContourProbability:
    contour: Contour
    beta: float
    p: float
    bound: float
    size: int  # |gamma|
    omega_size: int  # windows containing gamma
    image_size: int  # distinct images under contour removal

    @property
    def slack(self) -> float:
        return self.bound - self.p


# ---------------------------------------------------------------------------
# enumeration engine


def _window_energies(model: BallModel, n: int, boundary: int, cap=None):
    """(configs, float energies) for every configuration of V_n, as numpy arrays."""
    lay = layout(model.k, n, model.rprime)
    size = len(lay.vertices)
    total = model.q**size
    cap = enumeration_cap(cap)
    if total > cap:
        raise CapExceeded(f"enumeration of q^|V_{n}| windows", total, cap)
    q = model.q
    # digit p (0-based spin) of configuration c, first vertex most significant
    codes = np.arange(total, dtype=np.int64)
    configs = np.empty((total, size), dtype=np.int64)
    for p in range(size - 1, -1, -1):
        codes, configs[:, p] = np.divmod(codes, q)
    table = np.array(model.float_table)
    energies = np.zeros(total)
    for members in lay.ball_members:
        idx = np.zeros(total, dtype=np.int64)
        for p in members:
            idx = idx * q + (configs[:, p] if p >= 0 else boundary - 1)
        energies += table[idx]
    return configs + 1, energies


def log_partition_enum(model: BallModel, n: int, boundary: int, beta: float, cap=None) -> float:
    _, energies = _window_energies(model, n, boundary, cap)
    return float(logsumexp(-beta * energies))


def _root_position(model, n) -> int:
    return layout(model.k, n, model.rprime).index[()]


def summary_enum(model: BallModel, n: int, boundary: int, beta: float, cap=None) -> GibbsSummary:
    configs, energies = _window_energies(model, n, boundary, cap)
    logw = -beta * energies
    log_z = float(logsumexp(logw))
    root = configs[:, _root_position(model, n)]
    marg = []
    for j in range(1, model.q + 1):
        sel = logw[root == j]
        marg.append(float(np.exp(logsumexp(sel) - log_z)) if sel.size else 0.0)
    return GibbsSummary(beta, boundary, n, log_z, tuple(marg), "enum")


# ---------------------------------------------------------------------------
# tree recursion engine


def _ball_log_weights(model: BallModel, beta: float) -> np.ndarray:
    """-beta U as an array with axis 0 the center and axis g its a_g neighbour."""
    shape = (model.q,) * model.ball_size
    return -beta * np.array(model.float_table).reshape(shape)


def _take(arr: np.ndarray, axis: int, index: int) -> np.ndarray:
    """Fix one axis to ``index`` but keep it (length 1) so axis numbers stay valid."""
    return np.take(arr, [index], axis=axis)


def _root_log_terms(model: BallModel, n: int, boundary: int, beta: float) -> np.ndarray:
    """Log of the partition sum restricted to each root spin."""
    if model.rprime != 1:
        raise ValueError(f"the dp engine needs r' = 1, model has r' = {model.rprime}")
    k, q = model.k, model.q
    gens = range(1, k + 2)
    lw = _ball_log_weights(model, beta)
    fixed = boundary - 1

    # factor from a ball centered on a W_{n+1} vertex joined to its parent by a_g,
    # as a function of the parent's spin
    leaf = {}
    for g in gens:
        sl = lw
        for axis in range(k + 2):
            if axis != g:
                sl = _take(sl, axis, fixed)
        leaf[g] = sl.reshape(q)

    # message[g][p, s]: log partition sum of the subtree hanging below a vertex
    # entered through a_g (parent spin p, own spin s), balls centered inside
    msg = None
    for depth in range(n, 0, -1):
        new = {}
        for t in gens:
            arr = lw
            children = [u for u in gens if u != t]
            if depth == n:
                for u in children:
                    arr = _take(arr, u, fixed)
                for u in children:
                    arr = arr + leaf[u].reshape((q,) + (1,) * (k + 1))
            else:
                for u in children:
                    shape = [1] * (k + 2)
                    shape[0] = q
                    shape[u] = q
                    arr = arr + msg[u].reshape(shape)
            # sum out children, keep (center s, parent via a_t)
            arr = logsumexp(arr, axis=tuple(children), keepdims=True)
            new[t] = arr.reshape(q, q).T  # [p, s]
        msg = new

    arr = lw
    if n == 0:
        for g in gens:
            arr = _take(arr, g, fixed)
        for g in gens:
            arr = arr + leaf[g].reshape((q,) + (1,) * (k + 1))
    else:
        for g in gens:
            shape = [1] * (k + 2)
            shape[0] = q
            shape[g] = q
            arr = arr + msg[g].reshape(shape)
    return logsumexp(arr, axis=tuple(gens)).reshape(q)


def log_partition_dp(model: BallModel, n: int, boundary: int, beta: float) -> float:
    return float(logsumexp(_root_log_terms(model, n, boundary, beta)))


def summary_dp(model: BallModel, n: int, boundary: int, beta: float) -> GibbsSummary:
    terms = _root_log_terms(model, n, boundary, beta)
    log_z = float(logsumexp(terms))
    marg = tuple(float(v) for v in np.exp(terms - log_z))
    return GibbsSummary(beta, boundary, n, log_z, marg, "dp")


def gibbs_summary(model, n, boundary, beta, engine="dp", cap=None) -> GibbsSummary:
    if engine == "dp":
        return summary_dp(model, n, boundary, beta)
    if engine == "enum":
        return summary_enum(model, n, boundary, beta, cap)
    raise ValueError(f"unknown engine {engine!r}")


def root_marginal(model, n, boundary, beta, j, engine="dp", cap=None) -> float:
    """Probability that the root carries spin j under the boundary-``boundary`` measure."""
    return gibbs_summary(model, n, boundary, beta, engine, cap).root_marginals[j - 1]


# ---------------------------------------------------------------------------
# contour probabilities


def contour_probabilities(model: BallModel, n: int, boundary: int, betas, contours, cap=None) -> dict:
    """Exact p_i(gamma) for each contour and beta, by full enumeration.

    Returns {(contour key, beta): ContourProbability}. The numerator sums over
    windows in which gamma is one of the contours.
    """
    report = spectrum_cached(model)
    if report.lambda0 is None:
        raise ValueError("degenerate spectrum: lambda0 undefined")
    lam = float(report.lambda0)
    wanted = {c.key: c for c in contours}
    for c in contours:
        if any(len(x) > n for x in c.interior):
            raise ValueError(f"contour interior does not fit in V_{n}")
    configs, energies = _window_energies(model, n, boundary, cap)
    members = {key: [] for key in wanted}
    sizes = {key: set() for key in wanted}
    images = {key: set() for key in wanted}
    for row_id, row in enumerate(configs):
        w = SpinWindow(model.k, n, boundary, tuple(int(v) for v in row))
        dec = decompose(w, model)
        for pos, c in enumerate(dec.contours):
            if c.key in wanted:
                members[c.key].append(row_id)
                sizes[c.key].add(len(dec.imp[pos]))
                images[c.key].add(w.with_spins({x: boundary for x in c.interior}).values)
    out = {}
    for key, c in wanted.items():
        if not members[key]:
            raise ValueError(f"contour {key} is not realizable in V_{n} with boundary {boundary}")
        if len(sizes[key]) != 1:
            raise AssertionError(f"|gamma| varies across windows: {sorted(sizes[key])}")
        size = sizes[key].pop()
        rows = np.array(members[key])
        for beta in betas:
            logw = -beta * energies
            p = float(np.exp(logsumexp(logw[rows]) - logsumexp(logw)))
            out[(key, beta)] = ContourProbability(
                c, beta, p, math.exp(-beta * lam * size), size, len(rows), len(images[key])
            )
    return out


def contour_probability(model, n, boundary, beta, contour, cap=None) -> ContourProbability:
    return contour_probabilities(model, n, boundary, [beta], [contour], cap)[(contour.key, beta)]


# ---------------------------------------------------------------------------
# coexistence scan


@dataclass(frozen=True)
class ScanRow:
    beta: float
    boundary_mark: int
    marginals: tuple
    delta: float


def beta_grid(start: float, stop: float, step: float) -> list:
    if step <= 0:
        raise ValueError("beta step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + m * step, 12) for m in range(count)]


def disagreement(marginals_by_mark: dict) -> float:
    """min over boundary marks i of mu_i(root = i) - max_{j != i} mu_i(root = j)."""
    vals = []
    for i, marg in marginals_by_mark.items():
        rest = [m for j, m in enumerate(marg, 1) if j != i]
        vals.append(marg[i - 1] - max(rest))
    return min(vals)


def coexistence_scan(model: BallModel, n: int, betas, engine="dp", cap=None) -> list:
    """Root marginals for each ground-state boundary mark along a beta grid."""
    gs = spectrum_cached(model).ground_states
    rows = []
    for beta in betas:
        margs = {i: gibbs_summary(model, n, i, beta, engine, cap).root_marginals for i in gs}
        delta = disagreement(margs)
        rows.extend(ScanRow(beta, i, margs[i], delta) for i in gs)
    return rows


def total_variation(p, q) -> float:
    return 0.5 * sum(abs(a - b) for a, b in zip(p, q))
