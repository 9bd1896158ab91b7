import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mscott.moduli import Linear, pi_fold
from mscott.rationals import RatGrid, vec_sub
from mscott.segments import (
    Join,
    Leaf,
    Meet,
    lattice_approximate,
    lattice_eval,
    make_segment,
    segment_norm_bound,
)

GRID8 = RatGrid(1, F(1, 8), F(1))


def test_make_segment_plane_diagonal():
    seg = make_segment(Linear((F(1), F(1))), (F(0), F(0)), (F(1), F(1)), F(0), F(1))
    assert seg((F(1), F(1))) == 1
    assert seg((F(0), F(0))) == 0
    assert seg((F(1, 2), F(1, 2))) == F(1, 2)
    assert seg((F(1, 4), F(1, 4))) == F(1, 4)  # min(1, (z0+z1)/2)


def test_make_segment_degenerate_constant():
    seg = make_segment(Linear((F(1),)), (F(1, 3),), (F(1, 3),), F(1, 3), F(1, 3))
    assert seg.degenerate
    assert seg((F(9, 10),)) == F(1, 3)
    with pytest.raises(ValueError):
        make_segment(Linear((F(1),)), (F(0),), (F(0),), F(0), F(1, 2))


def test_make_segment_side_condition_rejected():
    with pytest.raises(ValueError) as err:
        make_segment(Linear((F(1, 4),)), (F(0),), (F(1),), F(1, 2), F(1))
    assert "side condition" in str(err.value)


def test_segment_boundary_slope_allowed():
    # b = a + span is accepted and stays modulus-respecting
    seg = make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(1))
    axis = GRID8.axis()
    for z in axis:
        for w in axis:
            assert abs(seg((z,)) - seg((w,))) <= abs(z - w)


def test_segment_respects_modulus_on_grid():
    delta = Linear((F(1), F(1)))
    seg = make_segment(delta, (F(0), F(1, 2)), (F(1), F(1)), F(1, 4), F(3, 4))
    pts = list(RatGrid(2, F(1, 4), F(1)).points())
    for z in pts:
        for w in pts:
            assert abs(seg(z) - seg(w)) <= delta(pi_fold(vec_sub(z, w)))


def test_norm_bound_zero_for_equal():
    s = make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(3, 4))
    assert segment_norm_bound(s, s, GRID8) == 0


def test_norm_bound_perturbed_a():
    s1 = make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(1, 2))
    s2 = make_segment(Linear((F(1),)), (F(0),), (F(1),), F(1, 10), F(3, 5))
    bound = segment_norm_bound(s1, s2, GRID8)
    assert bound == F(1, 10)  # same anchors and slope: only |a - a'| contributes
    measured = max(abs(s1((x,)) - s2((x,))) for x in GRID8.axis())
    assert measured <= bound


def test_norm_bound_rejects_mismatch_and_degenerate():
    s1 = make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(1, 2))
    s2 = make_segment(Linear((F(2),)), (F(0),), (F(1),), F(0), F(1, 2))
    with pytest.raises(ValueError):
        segment_norm_bound(s1, s2, GRID8)
    sc = make_segment(Linear((F(1),)), (F(0),), (F(0),), F(1, 4), F(1, 4))
    with pytest.raises(ValueError):
        segment_norm_bound(s1, sc, GRID8)


def _random_segment(rng: random.Random, delta):
    while True:
        x = (F(rng.randint(0, 8), 8),)
        y = (F(rng.randint(0, 8), 8),)
        span = delta(pi_fold(vec_sub(y, x)))
        if span == 0:
            continue
        a = F(rng.randint(0, 8), 8)
        top = min(F(1), a + span)
        b = a + (top - a) * F(rng.randint(0, 4), 4)
        return make_segment(delta, x, y, a, b)


def test_norm_bound_random_pairs():
    rng = random.Random(7)
    delta = Linear((F(1),))
    for _ in range(1000):
        s1 = _random_segment(rng, delta)
        s2 = _random_segment(rng, delta)
        bound = segment_norm_bound(s1, s2, GRID8)
        measured = max(abs(s1((z,)) - s2((z,))) for z in GRID8.axis())
        assert measured <= bound


def test_lattice_eval():
    l1 = Leaf(make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(1, 4)))
    l2 = Leaf(make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(1, 3)))
    l3 = Leaf(make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(1, 2)))
    z = (F(1),)
    assert lattice_eval(l1, z) == F(1, 4)
    assert lattice_eval(Meet((l1, l2)), z) == F(1, 4)
    assert lattice_eval(Meet((Join((l1, l2)), l3)), z) == min(
        max(F(1, 4), F(1, 3)), F(1, 2)
    )


def test_approximate_segment_target_exact():
    seg = make_segment(Linear((F(1),)), (F(0),), (F(1),), F(0), F(3, 4))
    res = lattice_approximate(lambda p: seg(p), Linear((F(1),)), F(1, 8), grid=GRID8)
    assert res.succeeded and res.deviation == 0


def test_approximate_constant_target():
    res = lattice_approximate(lambda p: F(1, 2), Linear((F(1),)), F(1, 8), grid=GRID8)
    assert res.succeeded and res.deviation == 0


def test_approximate_square_with_its_lipschitz_modulus():
    res = lattice_approximate(lambda p: p[0] * p[0], Linear((F(2),)), F(1, 8), grid=GRID8)
    assert res.succeeded and res.deviation < F(1, 8)


def test_approximate_rejects_disrespectful_target():
    with pytest.raises(ValueError):
        lattice_approximate(lambda p: p[0] * p[0], Linear((F(1),)), F(1, 8), grid=GRID8)


def test_approximate_budget_failure_reports_best():
    res = lattice_approximate(
        lambda p: p[0], Linear((F(1),)), F(1, 100), budget=4, grid=GRID8
    )
    assert res.leaves <= GRID8.__len__() * len(GRID8.axis())
    assert res.deviation >= 0  # honest report either way


def test_rational_data_coarsening_within_bound():
    # replacing fine rational data by coarser data moves the segment by at
    # most the norm bound (uniform-norm soundness of rational thinning)
    delta = Linear((F(1),))
    fine = make_segment(delta, (F(1, 16),), (F(15, 16),), F(1, 16), F(13, 16))
    coarse = make_segment(delta, (F(0),), (F(1),), F(0), F(3, 4))
    bound = segment_norm_bound(fine, coarse, GRID8)
    measured = max(abs(fine((z,)) - coarse((z,))) for z in GRID8.axis())
    assert measured <= bound


@given(st.integers(0, 8), st.integers(0, 8), st.integers(0, 8))
@settings(max_examples=60)
def test_segment_unit_range(xi, yi, ai):
    x, y, a = F(xi, 8), F(yi, 8), F(ai, 8)
    delta = Linear((F(1),))
    span = delta(pi_fold((y - x,)))
    b = min(F(1), a + span) if span > 0 else a
    seg = make_segment(delta, (x,), (y,), a, b)
    for z in GRID8.axis():
        assert 0 <= seg((z,)) <= 1
