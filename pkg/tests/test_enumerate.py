import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conelab.archimedean import make_weight
from conelab.enumerate import (CountRequest, brute_force_box, iter_solutions, mobius_inverted_count,
                               solutions_in_box, weighted_count, weighted_counts)
from conelab.errors import BudgetExceeded
from conelab.localdens import CongruenceCondition, trivial_condition
from conelab.quadform import PYTHAGOREAN, SQUARE_CONE, new_form

FORMS = {"pythagorean": PYTHAGOREAN, "square_cone": SQUARE_CONE}
RADIAL = make_weight("radial-bump", (0, 0, 0), 1.0, symmetric=True)
OCTANT = make_weight("octant-bump", (1, 1, 1), 0.5)
CONDS = {
    ("pythagorean", 1): trivial_condition(),
    ("pythagorean", 3): CongruenceCondition(3, (0, 1, 1)),
    ("pythagorean", 6): CongruenceCondition(6, (3, 4, 5)),
    ("square_cone", 1): trivial_condition(),
    ("square_cone", 3): CongruenceCondition(3, (1, 1, 1)),
    ("square_cone", 6): CongruenceCondition(6, (5, 5, 5)),
}


def _as_set(arr):
    return {tuple(int(v) for v in row) for row in arr}


def _loop(form, lo, hi):
    return {x for x in product(*[range(a, b + 1) for a, b in zip(lo, hi)]) if form(x) == 0}


def test_pythagorean_small_box():
    got = _as_set(solutions_in_box(PYTHAGOREAN, (-5,) * 3, (5,) * 3))
    assert got == _loop(PYTHAGOREAN, (-5,) * 3, (5,) * 3)
    for s1, s2, s3 in product((1, -1), repeat=3):
        assert (3 * s1, 4 * s2, 5 * s3) in got and (4 * s1, 3 * s2, 5 * s3) in got
    assert (0, 0, 0) in got and all((t, 0, t) in got for t in range(-5, 6))


def test_only_origin_box():
    for form in FORMS.values():
        assert _as_set(solutions_in_box(form, (0, 0, 0), (0, 0, 0))) == {(0, 0, 0)}


def test_square_cone_small_box():
    got = _as_set(solutions_in_box(SQUARE_CONE, (0,) * 3, (4,) * 3))
    assert got == _loop(SQUARE_CONE, (0,) * 3, (4,) * 3)
    assert {(1, 4, 2), (4, 1, 2), (2, 2, 2)} <= got


@pytest.mark.parametrize("name", FORMS)
@pytest.mark.parametrize("extent", [1, 7, 23, 60])
def test_matches_brute_force_symmetric_boxes(name, extent):
    form = FORMS[name]
    lo, hi = (-extent,) * 3, (extent,) * 3
    assert np.array_equal(solutions_in_box(form, lo, hi), brute_force_box(form, lo, hi))


box_corner = st.tuples(*[st.integers(-30, 20)] * 3)
box_size = st.tuples(*[st.integers(0, 25)] * 3)


@given(st.sampled_from(list(FORMS) + ["other"]), box_corner, box_size)
def test_matches_brute_force_random_boxes(name, lo, size):
    form = FORMS.get(name) or new_form((2, -3, 0, 1, 0, 5))
    hi = tuple(a + s for a, s in zip(lo, size))
    assert np.array_equal(solutions_in_box(form, lo, hi), brute_force_box(form, lo, hi))


@given(st.tuples(*[st.integers(-3, 3)] * 6).filter(lambda co: co[2] == 0 or co[0] == 0), box_corner, box_size)
def test_linear_and_missing_variables(co, lo, size):
    try:
        form = new_form(co)
    except ValueError:
        return
    hi = tuple(a + s for a, s in zip(lo, size))
    assert np.array_equal(solutions_in_box(form, lo, hi), brute_force_box(form, lo, hi))


@pytest.mark.parametrize("name", FORMS)
def test_residue_filter(name):
    form = FORMS[name]
    cond = CONDS[(name, 3)]
    lo, hi = (-30,) * 3, (30,) * 3
    full = brute_force_box(form, lo, hi)
    want = full[np.all((full - np.array(cond.gamma)) % 3 == 0, axis=1)]
    assert np.array_equal(solutions_in_box(form, lo, hi, residues=cond), want)


@pytest.mark.parametrize("name", FORMS)
def test_threads_match_serial(name):
    form = FORMS[name]
    a = solutions_in_box(form, (-300,) * 3, (300,) * 3, threads=1)
    b = solutions_in_box(form, (-300,) * 3, (300,) * 3, threads=4)
    assert np.array_equal(a, b)


def test_iter_solutions_flags():
    pts = list(iter_solutions(PYTHAGOREAN, (0, 0, 0), (5, 5, 5)))
    assert all(PYTHAGOREAN(p.x) == 0 for p in pts)
    flags = {p.x: p.primitive for p in pts}
    assert flags[(3, 4, 5)] and not flags[(0, 0, 0)] and not flags[(2, 0, 2)] and flags[(1, 0, 1)]


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        solutions_in_box(PYTHAGOREAN, (-1000,) * 3, (1000,) * 3, budget=1000)


def test_small_B_counts_origin_only():
    req = CountRequest(PYTHAGOREAN, make_weight("radial-bump", (0, 0, 0), 0.5), trivial_condition(), 1.0)
    assert weighted_count(req) == 1.0
    assert weighted_count(req, include_origin=False) == 0.0


def test_weighted_count_literal_sum():
    B = 40.0
    pts = brute_force_box(PYTHAGOREAN, (-40,) * 3, (40,) * 3)
    expected = math.fsum(float(RADIAL(p / B)) for p in pts)
    req = CountRequest(PYTHAGOREAN, RADIAL, trivial_condition(), B)
    assert abs(weighted_count(req) - expected) < 1e-12 * expected


def _obstruction_brute(B, primitive):
    lo = int(math.floor(0.5 * B))
    hi = int(math.ceil(1.5 * B))
    pts = brute_force_box(SQUARE_CONE, (lo,) * 3, (hi,) * 3)
    pts = pts[np.all(pts % 3 == 2, axis=1)]
    if primitive:
        pts = pts[np.gcd.reduce(pts, axis=1) == 1]
    return math.fsum(float(OCTANT(p / B)) for p in pts)


def test_mod3_obstruction_primitive_zero():
    cond = CongruenceCondition(3, (2, 2, 2))
    for B in (2, 5, 9, 17, 40, 120, 333, 1000, 5000):
        assert weighted_count(CountRequest(SQUARE_CONE, OCTANT, cond, B, primitive=True)) == 0.0
        if B <= 120:
            assert _obstruction_brute(B, True) == 0.0


def test_mod3_obstruction_nonprimitive_witnesses():
    cond = CongruenceCondition(3, (2, 2, 2))
    # the smallest witness is 2 * (1, 1, 1); multiples d * y with d = 2 mod 3 keep appearing
    assert _as_set(solutions_in_box(SQUARE_CONE, (1,) * 3, (2,) * 3, residues=cond)) == {(2, 2, 2)}
    for B in (9, 20, 50, 100):
        got = weighted_count(CountRequest(SQUARE_CONE, OCTANT, cond, B))
        assert got > 0 and abs(got - _obstruction_brute(B, False)) < 1e-12 * got


@pytest.mark.parametrize("key", list(CONDS))
@pytest.mark.parametrize("B", [50, 200])
def test_mobius_identity(key, B):
    form = FORMS[key[0]]
    w = RADIAL if key[1] == 1 else make_weight("radial-bump", (0, 0, 0), 1.0)
    req = CountRequest(form, w, CONDS[key], B, primitive=True)
    direct = weighted_count(req)
    inverted = mobius_inverted_count(req)
    assert abs(direct - inverted) <= 1e-9 * max(1.0, abs(direct))


def test_mobius_tiny_B_finite_sum():
    req = CountRequest(PYTHAGOREAN, RADIAL, trivial_condition(), 3.0, primitive=True)
    terms = []
    for d, mu in [(1, 1), (2, -1), (3, -1)]:
        sub = CountRequest(PYTHAGOREAN, RADIAL, trivial_condition(), 3.0, primitive=False)
        pts = brute_force_box(PYTHAGOREAN, (-3,) * 3, (3,) * 3)
        pts = pts[np.any(pts != 0, axis=1)]
        pts = pts[np.all(pts % d == 0, axis=1)]
        terms.append(mu * math.fsum(float(RADIAL(p / sub.B)) for p in pts))
    assert abs(mobius_inverted_count(req) - math.fsum(terms)) < 1e-12
    assert abs(weighted_count(req) - math.fsum(terms)) < 1e-12


def test_mobius_residue_flip():
    # d = 2 has inverse 2 mod 3, so its term counts points = 2 gamma mod 3
    cond = CongruenceCondition(3, (1, 1, 1))
    assert cond.scaled(pow(2, -1, 3)).gamma == (2, 2, 2)


def test_primitive_never_exceeds_total():
    for key, cond in CONDS.items():
        form = FORMS[key[0]]
        for B in (10, 60, 150):
            prim = weighted_count(CountRequest(form, RADIAL, cond, B, primitive=True))
            total = weighted_count(CountRequest(form, RADIAL, cond, B))
            assert prim <= total + 1e-12


@settings(max_examples=20)
@given(st.lists(st.floats(1, 300), min_size=2, max_size=6, unique=True))
def test_monotone_in_B(Bs):
    Bs = sorted(Bs)
    counts = weighted_counts(PYTHAGOREAN, RADIAL, trivial_condition(), Bs)
    assert np.all(np.diff(counts) >= -1e-9)


def test_counts_share_enumeration_matches_single():
    Bs = [30.0, 70.0, 110.0]
    many = weighted_counts(SQUARE_CONE, OCTANT, trivial_condition(), Bs, primitive=True)
    single = [weighted_count(CountRequest(SQUARE_CONE, OCTANT, trivial_condition(), B, primitive=True)) for B in Bs]
    assert np.allclose(many, single, rtol=0, atol=1e-12)
