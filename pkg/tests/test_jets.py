import json

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from parallel_endo.jets import Jet, JetError, decode_exponents, encode_exponents
from parallel_endo.scalars import Gaussian, decode_scalar, encode_scalar, sqrt_gaussian, sqrt_rational

N, K = 3, 4

rationals = st.builds(lambda a, b: mpq(a, b), st.integers(-5, 5), st.integers(1, 4))
exps = st.tuples(*[st.integers(0, K)] * N).filter(lambda e: sum(e) <= K)
jets = st.dictionaries(exps, rationals, max_size=6).map(lambda m: Jet.from_dict(N, K, m))
unit_jets = st.tuples(st.integers(1, 4), jets).map(lambda t: t[1] - Jet.constant(N, K, t[1].constant_term())
                                                    + Jet.constant(N, K, t[0]))


@given(st.lists(st.integers(0, 20), min_size=1, max_size=5))
def test_exponent_codes_roundtrip(e):
    assert decode_exponents(encode_exponents(e), len(e)) == tuple(e)


def test_exponent_out_of_range():
    with pytest.raises(JetError):
        encode_exponents([64])


@given(jets, jets, jets)
@settings(max_examples=40, deadline=None)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == Jet.zero(N, K)


@given(unit_jets)
@settings(max_examples=40, deadline=None)
def test_inverse(a):
    assert a * a.invert() == Jet.one(N, K)


def test_non_unit_inverse_raises():
    with pytest.raises(JetError):
        Jet.variable(N, K, 0).invert()


@given(jets, jets)
@settings(max_examples=40, deadline=None)
def test_leibniz_rule(a, b):
    for i in range(N):
        lhs = (a * b).partial(i)
        rhs = a.truncate(K - 1) * b.partial(i) + a.partial(i) * b.truncate(K - 1)
        assert lhs == rhs


@given(jets)
@settings(max_examples=30, deadline=None)
def test_partials_commute(a):
    assert a.partial(0).partial(1) == a.partial(1).partial(0)


def test_truncation_drops_high_degree():
    x = Jet.variable(2, 2, 0)
    assert (x * x * x).is_zero()
    assert (x * x).coefficient((2, 0)) == 1


def test_geometric_series():
    x = Jet.variable(1, 5, 0)
    inv = (Jet.one(1, 5) - x).invert()
    assert all(inv.coefficient((k,)) == 1 for k in range(6))


@given(jets)
@settings(max_examples=30, deadline=None)
def test_json_roundtrip(a):
    text = json.dumps(a.to_json())
    assert Jet.from_json(json.loads(text)) == a


def test_json_roundtrip_gaussian():
    a = Jet.from_dict(2, 2, {(1, 0): Gaussian(1, -2), (0, 0): mpq(3, 7)})
    assert Jet.from_json(json.loads(json.dumps(a.to_json()))) == a


@pytest.mark.parametrize("bad", [
    {"n": 2, "K": 2, "terms": [[[3, 0], [1, 1]]]},
    {"n": 2, "K": 2, "terms": [[[1], [1, 1]]]},
    {"n": 2, "K": 2, "terms": [[[1, 0], [1, 1]], [[1, 0], [2, 1]]]},
    {"n": 2, "terms": []},
])
def test_malformed_jet_json(bad):
    with pytest.raises(JetError):
        Jet.from_json(bad)


def test_mismatched_orders_refuse_to_combine():
    with pytest.raises(JetError):
        Jet.one(2, 2) + Jet.one(2, 3)


@given(rationals, rationals, rationals, rationals)
def test_gaussian_field(a, b, c, d):
    x, y = Gaussian(a, b), Gaussian(c, d)
    assert x * y == y * x
    assert (x * y).conjugate() == x.conjugate() * y.conjugate()
    if y:
        assert (x / y) * y == x
    assert decode_scalar(encode_scalar(x)) == x


@given(rationals, rationals)
def test_exact_square_roots(a, b):
    assert sqrt_rational(a * a) in (a, -a)
    z = Gaussian(a, b)
    w = sqrt_gaussian(z * z)
    assert w is not None and w * w == z * z
