import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nilcurv.polyfunc import (
    PolyBatch,
    PolyError,
    PolyMap,
    poly_arith,
    poly_diff,
    poly_diff_multi,
    poly_eval,
    random_poly,
)

NV = 3
coef = st.floats(-3, 3, allow_nan=False).filter(lambda c: abs(c) > 1e-3)
exps = st.tuples(*[st.integers(0, 3)] * NV)
polys = st.dictionaries(exps, coef, max_size=6).map(lambda t: PolyMap(NV, t))
points = st.tuples(*[st.floats(-1.5, 1.5, allow_nan=False)] * NV).map(np.array)
var = st.integers(0, NV - 1)


def central_diff(q, x, i, h=1e-5):
    e = np.zeros(NV)
    e[i] = h
    return (q(x + e) - q(x - e)) / (2 * h)


@given(polys, points, var)
def test_diff_matches_finite_difference(q, x, i):
    scale = 1 + sum(abs(c) for c in q.terms.values())
    assert abs(q.diff(i)(x) - central_diff(q, x, i)) <= 1e-6 * scale * 10


@given(polys, var, var)
def test_partials_commute(q, i, j):
    assert q.diff(i).diff(j) == q.diff(j).diff(i)


@given(polys, polys, points)
def test_arithmetic_is_pointwise(a, b, x):
    tol = 1e-9 * (1 + abs(a(x))) * (1 + abs(b(x)))
    assert abs((a + b)(x) - (a(x) + b(x))) <= tol
    assert abs((a - b)(x) - (a(x) - b(x))) <= tol
    assert abs((a * b)(x) - a(x) * b(x)) <= tol
    assert abs((2.5 * a)(x) - 2.5 * a(x)) <= tol


@given(polys, polys)
def test_product_is_commutative_exactly(a, b):
    assert a * b == b * a


@given(polys, polys, points, var)
def test_product_rule(a, b, x, i):
    lhs = (a * b).diff(i)(x)
    rhs = (a.diff(i) * b + a * b.diff(i))(x)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))


@given(polys)
def test_json_roundtrip(q):
    assert PolyMap.from_json(q.to_json()) == q
    assert PolyMap.from_dict(json.loads(q.to_json())) == q


@given(polys, points)
def test_embed_preserves_values(q, x):
    big = q.embed(5, [4, 0, 2])
    y = np.zeros(5)
    y[[4, 0, 2]] = x
    assert abs(big(y) - q(x)) <= 1e-12 * (1 + abs(q(x)))


def test_zero_coefficients_dropped_and_terms_merged():
    q = PolyMap(2, {(1, 0): 1.0, (0, 1): 0.0})
    assert q.terms == {(1, 0): 1.0}
    assert PolyMap(2, {(1, 0): 1.0}) - PolyMap.variable(2, 0) == PolyMap.zero(2)
    assert PolyMap.zero(2).is_zero()
    assert PolyMap.zero(2).degree() == -1


def test_known_values():
    # x0^2 x1 + 3
    q = PolyMap(2, {(2, 1): 1.0, (0, 0): 3.0})
    assert q([2.0, 5.0]) == 23.0
    assert poly_eval(q, [1.0, 1.0]) == 4.0
    assert poly_diff(q, 0) == PolyMap(2, {(1, 1): 2.0})
    assert poly_diff_multi(q, [0, 0, 1]) == PolyMap.constant(2, 2.0)
    assert q.degree() == 3


def test_poly_arith_ops():
    a = PolyMap.variable(2, 0)
    b = PolyMap.variable(2, 1)
    assert poly_arith(a, b, "mul") == PolyMap.monomial(2, (1, 1))
    assert poly_arith(a, b, "add")([1.0, 2.0]) == 3.0
    with pytest.raises(PolyError):
        poly_arith(a, b, "div")


@pytest.mark.parametrize("bad", [
    {"terms": []},
    {"nvars": 0, "terms": []},
    {"nvars": 2, "terms": [{"exps": [1], "coef": 1.0}]},
    {"nvars": 2, "terms": [{"exps": [1, 0], "coef": 0}]},
    {"nvars": 2, "terms": [{"exps": [1, 0], "coef": 1.0}, {"exps": [1, 0], "coef": 2.0}]},
    {"nvars": 2, "terms": [{"exps": [-1, 0], "coef": 1.0}]},
    {"nvars": 2, "terms": [{"exps": [1, 0], "coef": "x"}]},
    {"nvars": 2, "terms": [{"exps": [1, 0]}]},
])
def test_from_dict_rejects_malformed(bad):
    with pytest.raises(PolyError):
        PolyMap.from_dict(bad)


def test_dimension_errors():
    with pytest.raises(PolyError):
        PolyMap(2, {(1, 0, 0): 1.0})
    with pytest.raises(PolyError):
        PolyMap.variable(2, 0) + PolyMap.variable(3, 0)
    with pytest.raises(PolyError):
        PolyMap.variable(2, 0)([1.0, 2.0, 3.0])
    with pytest.raises(PolyError):
        PolyMap.variable(2, 0).diff(2)


def test_batch_matches_individual(rng):
    qs = [random_poly(3, 3, rng) for _ in range(5)] + [PolyMap.zero(3)]
    batch = PolyBatch(qs, 3)
    x = rng.uniform(-1, 1, 3)
    np.testing.assert_allclose(batch(x), [q(x) for q in qs], rtol=1e-13, atol=1e-13)


def test_random_poly_is_dense():
    q = random_poly(2, 3, np.random.default_rng(0))
    assert len(q) == 10
    assert all(abs(c) <= 2.0 for c in q.terms.values())
