import json
import random
from fractions import Fraction

import pytest

from helpers import PLACES, place_id, random_norm, random_t, random_unipotent
from normspace import jsonio as jio
from normspace.decomp import ChartPoint, chart_point_to_boundary
from normspace.errors import MalformedInputError
from normspace.norms import class_eq
from normspace.scalars import Place


@pytest.mark.parametrize("v", PLACES, ids=place_id)
def test_norm_round_trip(v):
    rng = random.Random(1)
    for _ in range(10):
        mu = random_norm(v, rng.randint(1, 3), rng)
        back = jio.decode_norm(json.loads(jio.dumps(mu)), v)
        assert back.basis == mu.basis or v.is_archimedean
        assert class_eq(back, mu)


@pytest.mark.parametrize("v", [p for p in PLACES if not p.is_archimedean], ids=place_id)
def test_boundary_point_round_trip(v):
    rng = random.Random(2)
    for _ in range(10):
        cp = ChartPoint(random_unipotent(v, 3, rng), random_t(v, 2, rng, zeros=True))
        bp = chart_point_to_boundary(cp, v)
        back = jio.decode_boundary_point(json.loads(jio.dumps(bp)), v)
        assert back.same_as(bp)
        cp2 = jio.decode_chart_point(json.loads(jio.dumps(cp)), v)
        assert cp2.g == cp.g and cp2.t == cp.t


def test_scalar_encodings():
    assert jio.encode(Fraction(3, 4)) == "3/4"
    assert jio.encode(7) == 7
    assert jio.encode(float("inf")) == "inf"
    assert jio.encode(1 + 2j) == [1.0, 2.0]


def test_malformed_documents():
    v = Place.padic(2)
    with pytest.raises(MalformedInputError):
        jio.loads("[1,")
    with pytest.raises(MalformedInputError):
        jio.decode_matrix([[1, 2], [3]], v)
    with pytest.raises(MalformedInputError):
        jio.decode_norm({"basis": [["1"]]}, v)
    with pytest.raises(MalformedInputError):
        jio.decode_weight(True)
