import itertools
import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from parallel_endo import linalg as la
from parallel_endo.generators import germ_pp_wave, germ_type1, normal_form_frames
from parallel_endo.geometry import curvature, parallel_defect
from parallel_endo.holonomy import (adjoint, bracket_closure, commutant, decomposability_probe, fixed_space,
                                    holonomy_span, n0_ideal, span_from_matrices)


def so_basis(g0):
    """Basis of so(g0) = {W : W^T g0 + g0 W = 0}."""
    d = len(g0)
    out = []
    ginv = la.inverse(g0)
    for i, j in itertools.combinations(range(d), 2):
        A = la.zeros(d)
        A[i][j], A[j][i] = mpq(1), mpq(-1)
        out.append(la.matmul(ginv, A))
    return out


@pytest.mark.parametrize("p,q", [(3, 0), (2, 1), (2, 2)])
def test_commutant_of_full_orthogonal_algebra_is_scalars(p, q):
    g0 = la.I_pq(p, q)
    h = span_from_matrices(p + q, so_basis(g0))
    assert h.dim == (p + q) * (p + q - 1) // 2
    e = commutant(h, g0)
    assert e.dim == 1 and e.contains_identity()


def test_commutant_of_unitary_algebra_contains_J():
    fr = normal_form_frames("(2)", 2, 0)
    g0, J = fr["g"], fr["J"]
    # u(2) = J-commuting part of so(4), dimension 4
    h = span_from_matrices(4, [la.scale(mpq(1, 2), la.sub(W, la.matmul(la.matmul(J, W), J))) for W in so_basis(g0)])
    assert h.dim == 4
    e = commutant(h, g0)
    assert e.dim == 2 and e.contains(J)


@given(st.lists(st.integers(-3, 3), min_size=16, max_size=16), st.lists(st.integers(-3, 3), min_size=16, max_size=16))
@settings(max_examples=40, deadline=None)
def test_adjoint_is_an_anti_involution(a, b):
    g0 = la.I_pq(2, 2)
    U, V = la.unflatten([mpq(x) for x in a], 4), la.unflatten([mpq(x) for x in b], 4)
    assert la.equal(adjoint(adjoint(U, g0), g0), U)
    assert la.equal(adjoint(la.matmul(U, V), g0), la.matmul(adjoint(V, g0), adjoint(U, g0)))


def test_bracket_closure_of_two_rotations():
    g0 = la.identity(3)
    basis = so_basis(g0)
    closed = bracket_closure(3, basis[:2])
    assert len(closed) == 3


def test_type1_holonomy_is_so_and_stabilizes():
    germ = germ_type1(4, 4, 0, seed=0).germ
    h = holonomy_span(curvature(germ, 2))
    assert h.dim == 6 and h.stabilized and h.order_reached == 0
    assert h.added_per_order == [6, 0, 0]


def test_too_few_orders_is_not_stabilized():
    germ = germ_type1(4, 4, 0, seed=0).germ
    h = holonomy_span(curvature(germ, 1))
    assert h.dim == 6 and not h.stabilized


def test_pp_wave_fixed_space_and_n0():
    gen = germ_pp_wave(2, seed=0)
    germ = gen.germ
    g0 = germ.g0()
    h = holonomy_span(curvature(germ, 2))
    E0, iso, warning = fixed_space(h, g0)
    assert iso and warning is None
    # d_v is fixed by the holonomy and null
    assert len(E0) == 1 and E0[0][1] != 0 and all(E0[0][k] == 0 for k in (0, 2, 3))
    e = commutant(h, g0)
    assert e.contains(gen.witnesses["N"])
    n0 = n0_ideal(e, E0)
    assert len(n0) == 1
    assert la.is_zero(la.matmul(n0[0], n0[0]))


def test_fixed_space_of_a_product_is_not_isotropic():
    # so(2) acting on the first two coordinates of R^3: e_3 is fixed and spacelike
    W = la.zeros(3)
    W[0][1], W[1][0] = mpq(-1), mpq(1)
    h = span_from_matrices(3, [W])
    E0, iso, warning = fixed_space(h, la.identity(3))
    assert len(E0) == 1 and not iso and "decomposable" in warning


def test_decomposability_probe_finds_product():
    W = la.zeros(3)
    W[0][1], W[1][0] = mpq(-1), mpq(1)
    h = span_from_matrices(3, [W])
    e = commutant(h, la.identity(3))
    assert decomposability_probe(e, random.Random(0), samples=8)["decomposable"]


def test_commutant_elements_are_parallel_on_germs():
    gen = germ_pp_wave(2, seed=1)
    germ = gen.germ
    e = commutant(holonomy_span(curvature(germ, 2)), germ.g0())
    for U in e.basis:
        assert parallel_defect(germ, U)[0]
