import sympy
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from parallel_endo import linalg as la
from parallel_endo.scalars import Gaussian


def square(n, lo=-3, hi=3):
    return st.lists(st.lists(st.integers(lo, hi), min_size=n, max_size=n), min_size=n, max_size=n).map(
        lambda rows: [[mpq(x) for x in r] for r in rows])


sizes = st.integers(1, 5)
matrices = sizes.flatmap(square)


def to_sympy(m):
    return sympy.Matrix([[sympy.Rational(int(x.numerator), int(x.denominator)) for x in r] for r in m])


@given(matrices)
@settings(max_examples=60, deadline=None)
def test_rank_and_det_match_sympy(a):
    s = to_sympy(a)
    assert la.rank(a) == s.rank()
    assert la.det(a) == s.det()


@given(matrices)
@settings(max_examples=60, deadline=None)
def test_inverse(a):
    if la.det(a) == 0:
        return
    assert la.equal(la.matmul(a, la.inverse(a)), la.identity(len(a)))


@given(matrices)
@settings(max_examples=60, deadline=None)
def test_nullspace(a):
    ns = la.nullspace(a, len(a))
    assert len(ns) == len(a) - la.rank(a)
    for v in ns:
        assert all(x == 0 for x in la.matvec(a, v))


@given(matrices, st.lists(st.integers(-3, 3), min_size=5, max_size=5))
@settings(max_examples=60, deadline=None)
def test_solve(a, b):
    b = [mpq(x) for x in b[:len(a)]]
    x = la.solve(a, b)
    consistent = la.rank(a) == la.rank([r + [c] for r, c in zip(a, b)])
    assert (x is not None) == consistent
    if x is not None:
        assert la.matvec(a, x) == b


@given(matrices)
@settings(max_examples=60, deadline=None)
def test_signature_matches_eigenvalue_signs(a):
    s = la.add(a, la.transpose(a))
    p, q, z = la.signature(s)
    ev = to_sympy(s).eigenvals()
    pos = sum(m for v, m in ev.items() if sympy.re(sympy.N(v, 50)) > 1e-30)
    neg = sum(m for v, m in ev.items() if sympy.re(sympy.N(v, 50)) < -1e-30)
    assert (p, q, z) == (pos, neg, len(s) - pos - neg)


@given(matrices)
@settings(max_examples=50, deadline=None)
def test_minimal_polynomial(a):
    mu = la.minimal_polynomial(a)
    assert la.is_zero(la.poly_eval_matrix(mu, a))
    # minimality: removing any irreducible factor breaks annihilation
    x = sympy.Symbol("x")
    poly = sympy.Poly(list(reversed([sympy.Rational(int(c.numerator), int(c.denominator)) for c in mu])), x)
    for f, _ in poly.factor_list()[1]:
        quo = sympy.div(poly, f)[0]
        coeffs = [mpq(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in reversed(quo.all_coeffs())]
        assert not la.is_zero(la.poly_eval_matrix(coeffs, a))
    # and it divides the characteristic polynomial
    cp = to_sympy(a).charpoly(x).as_expr()
    assert sympy.rem(cp, poly.as_expr(), x) == 0


def test_congruence_diagonalize():
    s = la.as_matrix([[0, 1, 0], [1, 0, 0], [0, 0, -2]])
    D, P = la.congruence_diagonalize(s)
    out = la.matmul(la.matmul(la.transpose(P), s), P)
    assert all(out[i][j] == 0 for i in range(3) for j in range(3) if i != j)
    assert la.signature(s) == (1, 2, 0)


def test_gaussian_rank_and_inverse():
    i = Gaussian(0, 1)
    a = [[Gaussian(1), i], [i, Gaussian(1)]]
    assert la.rank(a) == 2
    inv = la.inverse(a)
    prod = la.matmul(a, inv)
    assert prod[0][0] == 1 and prod[0][1] == 0 and prod[1][1] == 1
    assert la.rank([[Gaussian(1), i], [i, Gaussian(-1)]]) == 1


def test_standard_structures():
    J, L = la.J_std(2), la.L_std(2)
    assert la.equal(la.matmul(J, J), la.scale(-1, la.identity(4)))
    assert la.equal(la.matmul(L, L), la.identity(4))


def test_factor_rational_poly():
    # (x^2 + 1)(x - 2)^2
    facs = la.factor_rational_poly([mpq(4), mpq(-4), mpq(5), mpq(-4), mpq(1)])
    assert sorted(len(f) - 1 for f, _ in facs) == [1, 2]
    assert la.squarefree_part([mpq(4), mpq(-4), mpq(5), mpq(-4), mpq(1)]) == la.poly_mul([mpq(-2), mpq(1)],
                                                                                            [mpq(1), mpq(0), mpq(1)])
