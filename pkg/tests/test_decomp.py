import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import NONARCH, PLACE_KINDS, place_id, random_invertible, random_norm, random_t, random_unipotent
from normspace import linalg as la
from normspace.decomp import (ChartPoint, bruhat_residue, chart_fiber_eq, chart_point_to_boundary,
                              chart_section, chart_section_boundary, is_compact_element, iwasawa,
                              weyl_by_ranks)
from normspace.errors import PreconditionError, SingularMatrixError, UnsupportedPlaceError
from normspace.norms import Norm, act, class_eq
from normspace.points import BoundaryPoint
from normspace.scalars import Place, normalized_abs

F = Fraction


def test_orthogonal_matrix_is_its_own_k():
    c, s = math.cos(0.7), math.sin(0.7)
    g = ((c, -s), (s, c))
    tr = iwasawa(g, Place.real())
    assert np.allclose(tr.u, np.eye(2), atol=1e-12)
    assert np.allclose(tr.a, np.eye(2), atol=1e-12)
    assert np.allclose(tr.k, g, atol=1e-12)


def test_positive_upper_triangular_has_trivial_k():
    g = ((2.0, 3.0, -1.0), (0.0, 0.5, 4.0), (0.0, 0.0, 7.0))
    tr = iwasawa(g, Place.real())
    assert np.allclose(tr.k, np.eye(3), atol=1e-12)
    assert np.allclose(tr.product(), g, atol=1e-12)


def test_archimedean_iwasawa_unique_under_compact_change():
    rng = random.Random(1)
    v = Place.real()
    for _ in range(20):
        g = random_invertible(v, 3, rng)
        Q, _ = np.linalg.qr(np.array([[rng.gauss(0, 1) for _ in range(3)] for _ in range(3)]))
        a = iwasawa(g, v)
        b = iwasawa(tuple(map(tuple, np.array(g) @ Q)), v)
        assert np.allclose(a.u, b.u, atol=1e-9) and np.allclose(a.a, b.a, atol=1e-9)
        assert a == iwasawa(g, v)


@pytest.mark.parametrize("v", NONARCH, ids=place_id)
def test_nonarch_iwasawa_reconstructs_exactly(v):
    rng = random.Random(2)
    for _ in range(40):
        d = rng.randint(1, 4)
        g = random_invertible(v, d, rng)
        tr = iwasawa(g, v)
        assert tr.product() == la.map_entries(g, v.coerce)
        assert is_compact_element(tr.k, v)
        assert normalized_abs(la.det(tr.k), v) == 1
        assert all(normalized_abs(x, v) <= 1 for r in la.inverse(tr.k) for x in r)


def test_iwasawa_rejects_singular():
    with pytest.raises(SingularMatrixError):
        iwasawa(((F(1), F(2)), (F(2), F(4))), Place.padic(3))


def test_bruhat_of_upper_triangular_is_identity():
    gbar = ((1, 3, 2), (0, 4, 1), (0, 0, 2))
    b, w, b2 = bruhat_residue(gbar, 5)
    assert la.as_mat(w) == la.identity(3, 1)


def test_bruhat_of_antidiagonal_is_longest_element():
    gbar = ((0, 0, 1), (0, 2, 0), (3, 0, 0))
    _, w, _ = bruhat_residue(gbar, 5)
    assert [[int(x) for x in r] for r in w] == [[0, 0, 1], [0, 1, 0], [1, 0, 0]]


def _rand_upper_mod(p, d, rng):
    return tuple(tuple(rng.randrange(1, p) if i == j else (rng.randrange(p) if j > i else 0)
                       for j in range(d)) for i in range(d))


def _matmul_mod(A, B, p):
    return tuple(tuple(sum(A[i][k] * B[k][j] for k in range(len(B))) % p for j in range(len(B[0])))
                 for i in range(len(A)))


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_weyl_element_is_double_coset_invariant(p):
    rng = random.Random(p)
    for _ in range(40):
        d = rng.randint(2, 4)
        while True:
            g = tuple(tuple(rng.randrange(p) for _ in range(d)) for _ in range(d))
            if round(np.linalg.det(np.array(g, dtype=float))) % p:
                break
        w = la.as_mat(bruhat_residue(g, p)[1])
        h = _matmul_mod(_matmul_mod(_rand_upper_mod(p, d, rng), g, p), _rand_upper_mod(p, d, rng), p)
        assert la.as_mat(bruhat_residue(h, p)[1]) == w == la.as_mat(weyl_by_ranks(g, p))


def test_chart_identity_all_ones_is_standard_norm():
    for v in PLACE_KINDS:
        one = v.one()
        cp = ChartPoint(la.identity(3, one), (1, 1))
        bp = chart_point_to_boundary(cp, v)
        assert bp.is_interior and class_eq(bp.graded[0], Norm.standard(v, 3))


def test_chart_t_zero_is_infinity():
    v = Place.padic(2)
    bp = chart_point_to_boundary(ChartPoint(la.identity(2, F(1)), (F(0),)), v)
    assert bp.flag.dims == (1,)
    assert bp.parabolic_type() == frozenset({1})


def test_chart_rejects_non_unipotent():
    with pytest.raises(PreconditionError):
        chart_point_to_boundary(ChartPoint(((F(2), F(0)), (F(0), F(1))), (F(1),)), Place.padic(2))


def test_fiber_relation_d2_examples():
    v = Place.padic(3)
    a = ChartPoint(((F(1), F(0)), (F(0), F(1))), (F(1),))
    near = ChartPoint(((F(1), F(5)), (F(0), F(1))), (F(1),))
    far = ChartPoint(((F(1), F(1, 3)), (F(0), F(1))), (F(1),))
    assert chart_fiber_eq(a, a, v)
    assert chart_fiber_eq(a, near, v)
    assert not chart_fiber_eq(a, far, v)
    assert not chart_images_agree(a, far, v)
    zero_a = ChartPoint(a.g, (F(0),))
    zero_far = ChartPoint(far.g, (F(0),))
    assert chart_fiber_eq(zero_a, zero_far, v)


def chart_images_agree(a, b, v):
    return chart_point_to_boundary(a, v).same_as(chart_point_to_boundary(b, v))


def test_fiber_relation_unsupported_archimedean():
    with pytest.raises(UnsupportedPlaceError):
        cp = ChartPoint(((1.0, 0.0), (0.0, 1.0)), (1.0,))
        chart_fiber_eq(cp, cp, Place.real())


@pytest.mark.parametrize("v", NONARCH, ids=place_id)
def test_fiber_relation_is_equivalence(v):
    rng = random.Random(7)
    for _ in range(30):
        d = rng.randint(2, 3)
        t = random_t(v, d - 1, rng, zeros=True)
        pts = [ChartPoint(random_unipotent(v, d, rng, 1), t) for _ in range(3)]
        a, b, c = pts
        assert chart_fiber_eq(a, a, v)
        assert chart_fiber_eq(a, b, v) == chart_fiber_eq(b, a, v)
        if chart_fiber_eq(a, b, v) and chart_fiber_eq(b, c, v):
            assert chart_fiber_eq(a, c, v)
        assert chart_fiber_eq(a, b, v) == chart_images_agree(a, b, v)


def test_section_of_standard_norm():
    for v in PLACE_KINDS:
        cp = chart_section(Norm.standard(v, 3), v)
        assert la.map_entries(cp.g, v.coerce) == la.identity(3, v.one()) or v.is_archimedean
        assert np.allclose([float(x) for x in cp.t], [1, 1])


@pytest.mark.parametrize("v", PLACE_KINDS, ids=place_id)
def test_section_of_unipotent_translate(v):
    rng = random.Random(3)
    u = random_unipotent(v, 3, rng)
    x = act(u, Norm.standard(v, 3))
    cp = chart_section(x, v)
    assert np.allclose([float(t) for t in cp.t], [1, 1])
    if not v.is_archimedean:
        assert chart_fiber_eq(cp, ChartPoint(u, cp.t), v)


@pytest.mark.parametrize("v", PLACE_KINDS, ids=place_id)
def test_section_round_trip(v):
    rng = random.Random(4)
    for _ in range(75):
        x = random_norm(v, rng.randint(1, 4), rng)
        cp = chart_section(x, v)
        assert class_eq(chart_point_to_boundary(cp, v).graded[0], x)


@pytest.mark.parametrize("v", NONARCH, ids=place_id)
def test_boundary_section_round_trip(v):
    rng = random.Random(5)
    for _ in range(20):
        t = random_t(v, 3, rng, zeros=True)
        cp = ChartPoint(random_unipotent(v, 4, rng), t)
        bp = chart_point_to_boundary(cp, v)
        back = chart_point_to_boundary(chart_section_boundary(bp), v)
        assert back.same_as(bp)


@given(st.integers(-4, 4), st.integers(-4, 4))
def test_t_zero_collapses_unipotent_part(e1, e2):
    v = Place.padic(2)
    g1 = ((F(1), F(2) ** e1), (F(0), F(1)))
    g2 = ((F(1), F(2) ** e2), (F(0), F(1)))
    assert chart_images_agree(ChartPoint(g1, (F(0),)), ChartPoint(g2, (F(0),)), v)
