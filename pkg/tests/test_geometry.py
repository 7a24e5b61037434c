import itertools
import random

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from parallel_endo import linalg as la
from parallel_endo.generators import germ_sphere, germ_type1
from parallel_endo.geometry import (GermError, MetricGerm, OrderError, christoffel, curvature, inverse_metric,
                                    jm_mul, parallel_defect, ricci)
from parallel_endo.jets import Jet


def _rat(x):
    return mpq(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1]))


def germ_from_sympy(entries, xs, sig, K=3):
    d = len(xs)
    g = []
    for i in range(d):
        row = []
        for j in range(d):
            poly = sympy.Poly(sympy.expand(entries[i][j]), *xs)
            row.append(Jet.from_dict(d, K, {m: _rat(c) for m, c in poly.terms()}))
        g.append(row)
    return MetricGerm(d=d, signature=sig, g=g, kind="real").validate()


def random_polynomial_metric(d, p, rng):
    xs = sympy.symbols(f"x0:{d}")
    eta = [1] * p + [-1] * (d - p)
    entries = [[sympy.Integer(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            f = sympy.Integer(eta[i] if i == j else 0)
            for k in range(d):
                f += sympy.Rational(rng.randint(-2, 2), 2) * xs[k]
            for a, b in itertools.combinations_with_replacement(range(d), 2):
                if rng.random() < 0.5:
                    f += sympy.Rational(rng.randint(-3, 3), 3) * xs[a] * xs[b]
            entries[i][j] = entries[j][i] = f
    return entries, xs


def oracle_curvature(entries, xs):
    """R^r_{s m n} at 0 from the index formulas, with all derivatives done by sympy."""
    d = len(xs)
    at0 = {x: 0 for x in xs}
    g = sympy.Matrix(entries)
    g0 = g.subs(at0)
    ginv0 = g0.inv()
    dg = [g.diff(x) for x in xs]
    dg0 = [m.subs(at0) for m in dg]
    ddg0 = [[dg[a].diff(xs[b]).subs(at0) for b in range(d)] for a in range(d)]

    def low(l, i, j, D):  # Gamma_{l,ij} from first derivatives D[k] = d_k g
        return (D[j][l, i] + D[i][l, j] - D[l][i, j]) / 2

    low0 = [[[low(l, i, j, dg0) for j in range(d)] for i in range(d)] for l in range(d)]
    dlow0 = [[[[(ddg0[j][m][l, i] + ddg0[i][m][l, j] - ddg0[l][m][i, j]) / 2 for m in range(d)]
               for j in range(d)] for i in range(d)] for l in range(d)]
    Gam0 = [[[sum(ginv0[k, l] * low0[l][i][j] for l in range(d)) for j in range(d)] for i in range(d)]
            for k in range(d)]
    dginv0 = [-ginv0 * dg0[m] * ginv0 for m in range(d)]
    dGam0 = [[[[sum(dginv0[m][k, l] * low0[l][i][j] + ginv0[k, l] * dlow0[l][i][j][m] for l in range(d))
                for m in range(d)] for j in range(d)] for i in range(d)] for k in range(d)]
    R = {}
    for r, s, m, n in itertools.product(range(d), repeat=4):
        R[r, s, m, n] = (dGam0[r][n][s][m] - dGam0[r][m][s][n]
                         + sum(Gam0[r][m][l] * Gam0[l][n][s] - Gam0[r][n][l] * Gam0[l][m][s] for l in range(d)))
    return R, g0


@pytest.mark.parametrize("d,p,seed", [(2, 2, 0), (2, 1, 1), (3, 3, 2), (3, 2, 3), (4, 4, 4), (4, 2, 5), (4, 3, 6)])
def test_curvature_and_ricci_match_index_oracle(d, p, seed):
    entries, xs = random_polynomial_metric(d, p, random.Random(seed))
    germ = germ_from_sympy(entries, xs, (p, d - p))
    curv = curvature(germ, 0)
    R, _ = oracle_curvature(entries, xs)
    for a, b in itertools.permutations(range(d), 2):
        M = curv.R(a, b)
        for r, s in itertools.product(range(d), repeat=2):
            # (R(e_a, e_b) e_s)^r = R^r_{s a b}
            assert M[r][s] == _rat(R[r, s, a, b])
    ric = ricci(germ, curv)
    for i, j in itertools.product(range(d), repeat=2):
        assert ric[i][j] == _rat(sum(R[v, j, i, v] for v in range(d)))


@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6), st.lists(st.integers(-3, 3), min_size=6, max_size=6))
@settings(max_examples=25, deadline=None)
def test_two_dimensional_gauss_curvature_oracle(ec, gc):
    x, y = sympy.symbols("x y")
    mons = [x, y, x * x, x * y, y * y, x * x * y]
    E = 1 + sum(sympy.Rational(c, 2) * m for c, m in zip(ec, mons))
    G = 1 + sum(sympy.Rational(c, 2) * m for c, m in zip(gc, mons))
    germ = germ_from_sympy([[E, 0], [0, G]], (x, y), (2, 0), K=4)
    curv = curvature(germ, 0)
    # closed form for an orthogonal metric: K = -1/(2 sqrt(EG)) [ (E_y/sqrt(EG))_y + (G_x/sqrt(EG))_x ]
    W = sympy.sqrt(E * G)
    Kg = -(sympy.diff(sympy.diff(E, y) / W, y) + sympy.diff(sympy.diff(G, x) / W, x)) / (2 * W)
    want = sympy.nsimplify(sympy.simplify(Kg.subs({x: 0, y: 0}) * E.subs({x: 0, y: 0}) * G.subs({x: 0, y: 0})))
    g0 = germ.g0()
    R12 = curv.R(0, 1)
    sect = sum(g0[0][m] * R12[m][1] for m in range(2))  # g(R(e1, e2) e2, e1)
    assert sect == _rat(want)


def test_sphere_is_einstein():
    gen = germ_sphere(3)
    ric = ricci(gen.germ)
    # with ric_ij = tr(v -> R(e_i, v) e_j) the round sphere has ric = -(d-1) g
    assert la.equal(ric, la.scale(-2, gen.germ.g0()))


def test_algebraic_symmetries_and_bianchi():
    germ = germ_type1(4, 3, 1, seed=3).germ
    curv = curvature(germ, 1)
    d = 4
    g0 = germ.g0()

    def Rm(a, b, c, e):  # g(R(e_a, e_b) e_c, e_e)
        M = curv.R(a, b)
        return sum(g0[e][r] * M[r][c] for r in range(d))

    for a, b, c, e in itertools.product(range(d), repeat=4):
        assert Rm(a, b, c, e) == -Rm(b, a, c, e)
        assert Rm(a, b, c, e) == -Rm(a, b, e, c)
        assert Rm(a, b, c, e) == Rm(c, e, a, b)
    for a, b, c in itertools.combinations(range(d), 3):
        first = [sum(x) for x in zip(*[[curv.R(a, b)[r][c] for r in range(d)],
                                     [curv.R(b, c)[r][a] for r in range(d)],
                                     [curv.R(c, a)[r][b] for r in range(d)]])]
        assert all(v == 0 for v in first)

    def DR(i, j, u):
        if i == j:
            return la.zeros(d)
        if i < j:
            return curv.derivs[1][(i, j, u)]
        return la.neg(curv.derivs[1][(j, i, u)])

    for i, j, u in itertools.combinations(range(d), 3):
        total = la.add(la.add(DR(i, j, u), DR(j, u, i)), DR(u, i, j))
        assert la.is_zero(total)


def test_inverse_metric_jets():
    germ = germ_type1(3, 2, 1, seed=1, K=4).germ
    ginv = inverse_metric(germ)
    prod = jm_mul(germ.g, ginv, germ.K)
    for i in range(3):
        for j in range(3):
            assert prod[i][j] == Jet.constant(3, germ.K, 1 if i == j else 0)


def test_christoffel_vanish_in_normal_coordinates():
    germ = germ_type1(3, seed=0).germ
    gam = christoffel(germ)
    assert all(gam[k][i][j].constant_term() == 0 for k in range(3) for i in range(3) for j in range(3))


def test_identity_is_parallel_and_random_matrix_is_not():
    germ = germ_type1(3, seed=0).germ
    assert parallel_defect(germ, la.identity(3))[0]
    assert not parallel_defect(germ, la.diag(1, 2, 3))[0]


def test_order_guard():
    germ = germ_type1(3, seed=0, K=3).germ
    with pytest.raises(OrderError, match="raise K"):
        curvature(germ, 2)


@pytest.mark.parametrize("entry,value,msg", [
    ((0, 1), Jet.variable(2, 2, 0), "symmetric"),
    ((1, 1), Jet.zero(2, 2), "singular"),
])
def test_invalid_germs(entry, value, msg):
    g = [[Jet.constant(2, 2, 1), Jet.zero(2, 2)], [Jet.zero(2, 2), Jet.constant(2, 2, 1)]]
    g[entry[0]][entry[1]] = value
    with pytest.raises(GermError, match=msg):
        MetricGerm(d=2, signature=(2, 0), g=g).validate()


def test_declared_signature_mismatch():
    g = [[Jet.constant(2, 2, 1), Jet.zero(2, 2)], [Jet.zero(2, 2), Jet.constant(2, 2, -1)]]
    with pytest.raises(GermError, match="signature"):
        MetricGerm(d=2, signature=(2, 0), g=g).validate()
