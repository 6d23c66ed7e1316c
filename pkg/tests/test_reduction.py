import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import mirror_canonical, random_gram, random_norm, word_search_reduce
from normspace import linalg as la
from normspace.decomp import ChartPoint, chart_point_to_boundary
from normspace.errors import NotANormError, PreconditionError
from normspace.norms import Norm, act, class_distance, class_eq
from normspace.points import BoundaryPoint
from normspace.reduction import (CLASSICAL_C1, SiegelParams, e_exponent, gram_act, lemdet_check,
                                 norm_from_gram, parabolic_type_of, reduce_point, siegel_member,
                                 t_coords, t_ratio_envelope)
from normspace.scalars import Place, normalized_abs

F = Fraction
SP = SiegelParams(c1=CLASSICAL_C1, C=0.5)


def halfplane_gram(x, y):
    """Gram matrix of the point x + iy of the upper half plane."""
    return ((1.0, -x), (-x, x * x + y * y))


def infinity(v):
    one = v.one()
    return BoundaryPoint(v, la.Flag.standard([1], 2, one if v.is_archimedean else F(1)),
                         (Norm.standard(v, 1), Norm.standard(v, 1)))


def test_t_coords_of_standard_norm():
    for v in (Place.real(), Place.padic(3)):
        assert t_coords(Norm.standard(v, 4)) == pytest.approx((1, 1, 1))


@given(st.floats(-5, 5), st.floats(0.05, 20))
def test_t_coord_of_halfplane_point_is_inverse_height(x, y):
    assert t_coords(norm_from_gram(halfplane_gram(x, y)))[0] == pytest.approx(1 / y, rel=1e-9)


def test_t_coords_vanish_on_boundary_type():
    v = Place.padic(2)
    for I in [(1,), (2,), (1, 3)]:
        P = la.Flag.standard(I, 4)
        graded = tuple(Norm.standard(v, k) for k in P.graded_dims())
        t = t_coords(BoundaryPoint(v, P, graded))
        assert {j + 1 for j, x in enumerate(t) if x == 0} == set(I)


def test_parabolic_types():
    v = Place.padic(2)
    assert parabolic_type_of(BoundaryPoint.interior(Norm.standard(v, 3))) == frozenset()
    assert parabolic_type_of(infinity(v)) == {1}
    full = BoundaryPoint(v, la.Flag.standard([1, 2, 3], 4), (Norm.standard(v, 1),) * 4)
    assert parabolic_type_of(full) == {1, 2, 3}


def test_siegel_examples():
    assert siegel_member(norm_from_gram(halfplane_gram(0.0, 1.0)), SP)[0]
    assert not siegel_member(norm_from_gram(halfplane_gram(0.1, 0.2)), SP)[0]
    assert siegel_member(infinity(Place.real()), SP)[0]


@given(st.floats(-2, 2), st.floats(0.1, 5))
def test_siegel_halfplane_region(x, y):
    ok, cp = siegel_member(norm_from_gram(halfplane_gram(x, y)), SP)
    margin = 1e-9
    if abs(x) < 0.5 - margin and y > math.sqrt(3) / 2 + margin:
        assert ok
    if abs(x) > 0.5 + margin or y < math.sqrt(3) / 2 - margin:
        assert not ok


def test_siegel_params_validation():
    with pytest.raises(PreconditionError):
        SiegelParams(c1=0)


def test_siegel_c3_condition():
    mu = norm_from_gram(halfplane_gram(0.0, 4.0))
    assert siegel_member(mu, SiegelParams(c1=1.0, c3=0.5, I=frozenset({1})))[0]
    assert not siegel_member(mu, SiegelParams(c1=1.0, c3=0.1, I=frozenset({1})))[0]


def test_nonarch_siegel_uses_fiber_freedom():
    v = Place.padic(3)
    # g_12 = 9 can be cleared because |9| t <= 1 for t = 1
    x = chart_point_to_boundary(ChartPoint(((F(1), F(1, 3)), (F(0), F(1))), (F(1, 3),)), v)
    ok, cp = siegel_member(x, SiegelParams(c1=1.0, C=1.0), v)
    assert ok and cp.g[0][1] == 0


def test_reduce_already_reduced_is_identity():
    res = reduce_point(((F(2), F(1)), (F(1), F(2))))
    assert res.gamma == ((1, 0), (0, 1))
    assert res.gram == ((2, 1), (1, 2))


def test_reduce_classic_example():
    res = reduce_point(halfplane_gram(0.1, 0.2))
    oracle = word_search_reduce(halfplane_gram(0.1, 0.2))
    G = np.array(res.gram, dtype=float)
    assert abs(G[0, 1]) <= G[0, 0] / 2 + 1e-12 and G[1, 1] >= G[0, 0] - 1e-12
    assert class_distance(norm_from_gram(mirror_canonical(G)),
                          norm_from_gram(mirror_canonical(oracle))) <= 1e-9


def test_reduce_rejects_bad_input():
    with pytest.raises(NotANormError):
        reduce_point(((1.0, 2.0), (2.0, 1.0)))
    with pytest.raises(PreconditionError):
        reduce_point(((1.0, 0.0), (0.0, 1.0)), d=3)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_reduction_certificate(d):
    rng = random.Random(d)
    for n in range(40):
        G = random_gram(d, rng, exact=n % 2 == 0)
        res = reduce_point(G, d)
        assert abs(round(np.linalg.det(np.array(res.gamma, dtype=float)))) == 1
        assert la.as_mat(res.gram) == la.as_mat(gram_act(res.gamma, G)) or not isinstance(G[0][0], F)
        image = chart_point_to_boundary(ChartPoint(res.g, res.t), Place.real()).graded[0]
        assert class_eq(image, norm_from_gram(res.gram), tol=1e-7)
        assert max(res.t) <= CLASSICAL_C1 + 1e-12
        assert siegel_member(norm_from_gram(res.gram), SP)[0]


def test_reduce_is_deterministic():
    G = random_gram(3, random.Random(0))
    a, b = reduce_point(G), reduce_point(G)
    assert a.gamma == b.gamma and a.t == b.t


def test_e_exponent_examples():
    assert e_exponent(1, 1, 3) == 2
    assert e_exponent(1, 2, 3) == 1
    assert e_exponent(2, 2, 4) == 2
    with pytest.raises(PreconditionError):
        e_exponent(0, 1, 3)


@pytest.mark.parametrize("v", [Place.real(), Place.padic(5)], ids=str)
def test_lemdet_identity_matrix(v):
    rep = lemdet_check(la.identity(3, v.one()), random_norm(v, 3, random.Random(1)), 1, v)
    assert rep.lhs == pytest.approx(1) and rep.rhs == pytest.approx(1) and rep.equal


def test_lemdet_diagonal_t_ratio():
    v = Place.padic(5)
    a = (F(5), F(1, 25), F(3))
    g = la.diag(a)
    x = random_norm(v, 3, random.Random(2))
    t0, t1 = t_coords(x), t_coords(act(g, x))
    for j in range(2):
        want = float(normalized_abs(a[j + 1], v) / normalized_abs(a[j], v))
        assert t1[j] / t0[j] == pytest.approx(want)
    for i in (1, 2):
        rep = lemdet_check(g, x, i, v)
        assert rep.equal and rep.printed_rhs == pytest.approx(1 / rep.rhs)


def test_lemdet_rejects_non_stabilizing_g():
    v = Place.padic(5)
    g = ((F(1), F(0), F(0)), (F(1), F(1), F(0)), (F(0), F(0), F(1)))
    with pytest.raises(PreconditionError):
        lemdet_check(g, Norm.standard(v, 3), 1, v)


def test_t_ratio_envelope_is_finite():
    rng = random.Random(9)
    pairs = []
    for _ in range(50):
        G = random_gram(3, rng)
        res = reduce_point(G)
        gamma2 = ((1, 1, 0), (0, 1, 0), (0, 0, 1))
        y = gram_act(gamma2, res.gram)
        a, b = norm_from_gram(res.gram), norm_from_gram(y)
        if siegel_member(b, SiegelParams(c1=2.0, C=1.0))[0]:
            pairs.append((a, b))
    A = t_ratio_envelope(pairs)
    assert pairs and 1 <= A < math.inf
