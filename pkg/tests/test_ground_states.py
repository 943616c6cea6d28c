import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cayleycontour.ground_states import (
    FLIP_KINDS,
    check_assumptions,
    fuzz_window,
    improper_balls,
    peierls_check,
    peierls_fuzz,
    random_window,
    relative_energy,
    spectrum,
)
from cayleycontour.potentials import (
    SpinWindow,
    conditional_energy,
    generalized_kronecker,
    ising,
    potts,
    potts_competing,
)


def test_potts_competing_inside_region():
    model = potts_competing(-1, 0)
    rep = spectrum(model)
    assert rep.distinct_values == (Fraction(-3, 2), -1, Fraction(-1, 2), 0)
    assert rep.ground_states == (1, 2, 3)
    assert rep.lambda0 == Fraction(1, 2)
    assert check_assumptions(model).ok


def test_potts_competing_outside_region_fails():
    verdict = check_assumptions(potts_competing(1, 0))
    assert not verdict.a3
    assert not verdict.ok


def test_kronecker_assumptions():
    for q in (2, 3, 4):
        verdict = check_assumptions(generalized_kronecker(1, r=1, q=q))
        assert verdict.ok
        assert verdict.s == q
        assert verdict.lambda0 == 1


def test_degenerate_kronecker():
    verdict = check_assumptions(generalized_kronecker(0))
    assert verdict.lambda0 is None
    assert not verdict.a2


def test_antiferromagnet_fails_first_check():
    # the minimum is attained only by non-constant patterns
    verdict = check_assumptions(ising(-1))
    assert not verdict.a1_sufficient
    assert verdict.s == 0


def test_spectrum_is_invariant_under_shift_and_positive_scale():
    model = potts(1)
    base = spectrum(model)
    moved = spectrum(model.scaled(3, Fraction(-7, 2)))
    assert moved.ground_states == base.ground_states
    assert moved.lambda0 == 3 * base.lambda0
    assert moved.minimizer_configs == base.minimizer_configs


def test_improper_balls_of_single_flip():
    model = generalized_kronecker(1, r=1, q=3)
    w = SpinWindow.from_mapping(2, 2, 1, {(1,): 2})
    boundary = improper_balls(model, w)
    assert len(boundary) == 4
    assert sorted(boundary.centers) == sorted([(1,), (), (1, 2), (1, 3)])


def test_improper_ignores_boundary_mark():
    # a ball all of spin 2 is proper even when the boundary mark is 1
    model = generalized_kronecker(1, r=1, q=2)
    spins = {x: 2 for x in SpinWindow.constant(2, 2, 1).vertices}
    w = SpinWindow.from_mapping(2, 2, 1, spins)
    centers = improper_balls(model, w).centers
    assert () not in centers
    assert all(len(c) >= 2 for c in centers)


def test_relative_energy_is_energy_difference():
    model = potts_competing(-1, Fraction(-1, 8))
    rng = random.Random(4)
    for _ in range(30):
        w = random_window(2, 2, 3, 1, rng)
        diff = conditional_energy(model, w) - conditional_energy(model, SpinWindow.constant(2, 2, 1))
        assert relative_energy(model, w) == diff


def test_relative_energy_needs_ground_state_boundary():
    model = potts_competing(-1, 0)
    with pytest.raises(ValueError):
        relative_energy(generalized_kronecker(1, q=3), SpinWindow.constant(2, 1, 4))
    assert relative_energy(model, SpinWindow.constant(2, 1, 2)) == 0


def test_single_flip_is_an_equality_witness():
    model = generalized_kronecker(1, r=1, q=3)
    res = peierls_check(model, SpinWindow.from_mapping(2, 2, 1, {(): 2}))
    assert res.holds
    assert res.lhs == res.rhs == 4


@pytest.mark.parametrize("kind", FLIP_KINDS)
def test_random_window_kinds(kind):
    rng = random.Random(1)
    w = random_window(2, 3, 3, 2, rng, kind=kind)
    assert w.boundary == 2
    if kind == "single":
        assert len(w.deviations()) == 1
    if kind == "double":
        assert 1 <= len(w.deviations()) <= 2


def test_fuzz_is_reproducible():
    model = potts_competing(-1, 0)
    a = [fuzz_window(model, 5, i) for i in range(20)]
    b = [fuzz_window(model, 5, i) for i in range(20)]
    assert a == b


@given(st.integers(0, 10**6))
@settings(max_examples=200, deadline=None)
def test_peierls_holds_on_random_windows(seed):
    for model in (potts(1), potts_competing(-1, 0), generalized_kronecker(1, r=1, q=3)):
        _, w = fuzz_window(model, seed, seed % 4)
        assert peierls_check(model, w).holds


def test_peierls_fuzz_yields_requested_count():
    results = list(peierls_fuzz(generalized_kronecker(1, r=1, q=2), 12, seed=3))
    assert len(results) == 12
    assert all(r.holds for _, r in results)
