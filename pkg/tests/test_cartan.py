import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parallel_endo import linalg as la
from parallel_endo.cartan import (CartanError, build_model, cartan_test, horizontal_is_integral,
                                  integral_variety_dim, lambda_form, real_basis)
from parallel_endo.scalars import Gaussian


@pytest.mark.parametrize("delta,eps,p,cplx", [
    (1, -1, None, False), (1, -1, 0, False), (1, 1, None, False), (1, -1, None, True),
    (2, -1, None, False), (2, -1, 1, False), (2, 1, None, False),
])
def test_involutivity_checks(delta, eps, p, cplx):
    model = build_model(delta, eps, p, cplx)
    assert model.dim_W == 2 * delta * delta + delta
    rep = cartan_test(model, seed=0)
    assert rep.ok(), rep.checks()
    out = rep.to_json()
    assert out["ordinary"]
    assert out["dim_V"] == out["sum_k_sk"] == integral_variety_dim(model)["dim"]


def test_delta_one_uses_the_printed_flag():
    out = cartan_test(build_model(1, -1), seed=0).to_json()
    assert out["flag"] == "printed"
    assert out["characters"] == [0, 1, 2, 0] and out["dim_V"] == 8


def test_printed_flag_at_delta_two_is_not_ordinary():
    out = cartan_test(build_model(2, -1), seed=0).to_json()
    # the generic flag is ordinary, the one built from the standard basis is not
    assert out["printed_flag"] == {"characters": [0, 1, 2, 3, 2, 2, 0, 0], "ordinary": False}
    assert out["characters"] == [0, 1, 2, 3, 4, 0, 0, 0]
    assert out["dim_V"] == 40
    assert out["flag"].startswith("generic")


def test_redundancy_relations():
    rel = cartan_test(build_model(2, 1), seed=0).to_json()["relations"]
    assert rel["all_hold"] and rel["independent"]
    assert rel["count"] == rel["expected_count"]


def test_horizontal_vectors_are_integral():
    assert horizontal_is_integral(build_model(2, -1))


@given(st.integers(0, 10_000))
@settings(max_examples=25, deadline=None)
def test_lambda_is_alternating(seed):
    model = build_model(1, -1)
    rng = random.Random(seed)
    m = 2 * model.delta

    def vec():
        v = [Gaussian(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(m)]
        T = la.lin_comb([rng.randint(-2, 2) for _ in model.W], model.W)
        return v, T

    X, Y, Z = vec(), vec(), vec()
    base = lambda_form(model, X, Y, Z)
    assert lambda_form(model, Y, Z, X) == base
    assert lambda_form(model, Y, X, Z) == -base
    assert lambda_form(model, X, X, Z) == 0


def test_real_basis_size():
    model = build_model(2, -1)
    assert len(real_basis(model)) == model.real_dim == 8


@pytest.mark.parametrize("args,msg", [
    ((0, -1), "delta"), ((1, 0), "epsilon"), ((2, -1, 3), "p must"), ((99, -1), "cap"),
])
def test_bad_parameters(args, msg):
    with pytest.raises(CartanError, match=msg):
        build_model(*args)
