"""Radical, semi-simple fingerprint, type lookup and exact structure lifting.

The commutant e of the holonomy splits as s + n with n = Rad(e). Here n is
the kernel of the trace form <U, V> = tr(U* V)/d, the class of s is read off
from the signatures of that form on e and on its self-adjoint part, and the
(para)complex structures are lifted from the quotient through n by a
terminating binomial series.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import linalg as la
from .holonomy import ConsistencyError, MatrixAlgebraWithInvolution
from .scalars import Gaussian, sqrt_gaussian, sqrt_rational

LABELS = ["(1)", "(1C)", "(2)", "(2')", "(2C)", "(3)", "(3')", "(3C)"]
HPLUSH = "HplusH"
UNCLASSIFIED_MSG = "unclassified: input is not an indecomposable holonomy commutant"

# (dim s, dim s+, signature on s, signature on s+)
FINGERPRINTS: Dict[Tuple, str] = {
    (1, 1, (1, 0), (1, 0)): "(1)",
    (2, 2, (1, 1), (1, 1)): "(1C)",
    (2, 1, (2, 0), (1, 0)): "(2)",
    (2, 1, (1, 1), (1, 0)): "(2')",
    (4, 2, (2, 2), (1, 1)): "(2C)",
    (4, 1, (4, 0), (1, 0)): "(3)",
    (4, 1, (2, 2), (1, 0)): "(3')",
    (8, 2, (4, 4), (1, 1)): "(3C)",
    # confirmed by brute force on the explicit d=8 representation
    (8, 4, (4, 4), (1, 3)): HPLUSH,
}

HALF = mpq(1, 2)


class LiftError(RuntimeError):
    pass


# trace form and radical ---------------------------------------------------------------

def trace_form(e: MatrixAlgebraWithInvolution, basis: Optional[Sequence[la.Matrix]] = None) -> la.Matrix:
    basis = e.basis if basis is None else basis
    d = e.d
    adj = [e.adjoint(b) for b in basis]
    n = len(basis)
    G = la.zeros(n)
    for a in range(n):
        for b in range(a, n):
            v = la.trace(la.matmul(adj[a], basis[b])) / d
            G[a][b] = G[b][a] = v
    return G


def inner(e: MatrixAlgebraWithInvolution, U: la.Matrix, V: la.Matrix):
    return la.trace(la.matmul(e.adjoint(U), V)) / e.d


def complex_trace_form(e: MatrixAlgebraWithInvolution, Jbar: la.Matrix, U, V) -> Gaussian:
    """<U, V>_Jbar = (tr(U* V) - i tr(U* Jbar V)) / d."""
    Us = e.adjoint(U)
    a = la.trace(la.matmul(Us, V)) / e.d
    b = la.trace(la.matmul(la.matmul(Us, Jbar), V)) / e.d
    return Gaussian(a, -b)


def _span_basis(vecs: List[la.Vector], d: int) -> List[la.Matrix]:
    if not vecs:
        return []
    r, _ = la.rref(vecs)
    return [la.unflatten(v, d) for v in r]


def is_nilpotent(N: la.Matrix) -> bool:
    P = N
    for _ in range(len(N)):
        if la.is_zero(P):
            return True
        P = la.matmul(P, N)
    return la.is_zero(P)


def radical(e: MatrixAlgebraWithInvolution, verify: bool = True) -> List[la.Matrix]:
    """n = ker of the trace form on e, cross-checked and verified as an ideal."""
    G = trace_form(e)
    ker = la.nullspace(G, e.dim) if G else []
    n_basis = _span_basis([la.flatten(e.element(c)) for c in ker], e.d)
    if verify:
        other = radical_one_sided(e)
        if not _same_span(n_basis, other, e.d):
            raise ConsistencyError("trace-form kernel differs from {x : tr(xy) = 0 for all y}")
        ech = la.Echelon(e.d * e.d)
        for b in n_basis:
            ech.add(la.flatten(b))
        for N in n_basis:
            if not is_nilpotent(N):
                raise ConsistencyError("radical element is not nilpotent")
            if not ech.contains(la.flatten(e.adjoint(N))):
                raise ConsistencyError("radical is not self-adjoint")
            for B in e.basis:
                if not ech.contains(la.flatten(la.matmul(N, B))) or not ech.contains(la.flatten(la.matmul(B, N))):
                    raise ConsistencyError("radical is not a two-sided ideal")
    return n_basis


def radical_one_sided(e: MatrixAlgebraWithInvolution) -> List[la.Matrix]:
    """{x in e : tr(x y) = 0 for all y in e} (no adjunction involved)."""
    n = e.dim
    T = la.zeros(n)
    for a in range(n):
        for b in range(a, n):
            T[a][b] = T[b][a] = la.trace(la.matmul(e.basis[a], e.basis[b]))
    ker = la.nullspace(T, n) if T else []
    return _span_basis([la.flatten(e.element(c)) for c in ker], e.d)


def _same_span(a: List[la.Matrix], b: List[la.Matrix], d: int) -> bool:
    if len(a) != len(b):
        return False
    ech = la.Echelon(d * d)
    for m in a:
        ech.add(la.flatten(m))
    return all(ech.contains(la.flatten(m)) for m in b)


# fingerprint / classification --------------------------------------------------------------

@dataclass
class Fingerprint:
    dim_s: int
    dim_s_plus: int
    sig_s: Tuple[int, int]
    sig_s_plus: Tuple[int, int]

    def key(self) -> Tuple:
        return (self.dim_s, self.dim_s_plus, tuple(self.sig_s), tuple(self.sig_s_plus))

    def to_json(self):
        return {"dim_s": self.dim_s, "dim_s_plus": self.dim_s_plus,
                "sig_s": list(self.sig_s), "sig_s_plus": list(self.sig_s_plus)}


def fingerprint(e: MatrixAlgebraWithInvolution, n_basis: List[la.Matrix]) -> Fingerprint:
    G = trace_form(e)
    p, q, z = la.signature(G)
    if z != len(n_basis):
        raise ConsistencyError(f"induced trace form on s is degenerate (kernel {z} vs dim n {len(n_basis)})")
    plus = e.self_adjoint_part()
    Gp = trace_form(e, plus)
    pp, qp, zp = la.signature(Gp)
    return Fingerprint(dim_s=e.dim - len(n_basis), dim_s_plus=len(plus) - zp,
                       sig_s=(p, q), sig_s_plus=(pp, qp))


def classify(fp: Fingerprint) -> Optional[str]:
    """Type label from the fingerprint, or None when outside the table."""
    return FINGERPRINTS.get(fp.key())


# exact roots of +-Id through the radical ----------------------------------------------------------

def _binomial_inverse_sqrt(M: la.Matrix) -> la.Matrix:
    """(I + M)^{-1/2} for nilpotent M by the terminating binomial series."""
    d = len(M)
    out = la.identity(d)
    term = la.identity(d)
    coeff = mpq(1)
    k = 0
    while True:
        k += 1
        term = la.matmul(term, M)
        if la.is_zero(term):
            break
        # binom(-1/2, k) = binom(-1/2, k-1) * (-1/2 - k + 1) / k
        coeff = coeff * (mpq(-1, 2) - k + 1) / k
        out = la.add(out, la.scale(coeff, term))
        if k > d:
            raise LiftError("binomial series did not terminate (non-nilpotent correction)")
    return out


def normalize_root(X: la.Matrix, S: la.Matrix, sign: int) -> la.Matrix:
    """U with U^2 = sign * Id from X with sign*X^2 = S^2 + N, N nilpotent.

    S must be invertible and commute with X; then
    U = X S^{-1} (I + S^{-2} N)^{-1/2}.
    """
    X2 = la.matmul(X, X)
    target = X2 if sign > 0 else la.neg(X2)
    S2 = la.matmul(S, S)
    N = la.sub(target, S2)
    if not is_nilpotent(N):
        raise LiftError("square is not a scalar modulo the radical")
    Sinv = la.inverse(S)
    M = la.matmul(la.matmul(Sinv, Sinv), N)
    U = la.matmul(la.matmul(X, Sinv), _binomial_inverse_sqrt(M))
    if not la.equal(la.matmul(U, U), la.scale(sign, la.identity(len(X)))):
        raise LiftError("normalized root does not square to +-Id")
    return U


def _rational_scalar_root(X: la.Matrix, sign: int) -> Optional[la.Matrix]:
    d = len(X)
    c = sign * la.trace(la.matmul(X, X)) / d
    r = sqrt_rational(c)
    if r is None or r == 0:
        return None
    return la.identity(d, r)


def _gaussian_scalar_root(X: la.Matrix, Jbar: la.Matrix, sign: int) -> Optional[la.Matrix]:
    """S = u + v Jbar with S^2 = sign * X^2 modulo nilpotents."""
    d = len(X)
    X2 = la.matmul(X, X)
    c0 = sign * la.trace(X2) / d
    c1 = -sign * la.trace(la.matmul(X2, Jbar)) / d
    w = sqrt_gaussian(Gaussian(c0, c1))
    if w is None or not w:
        return None
    return la.add(la.identity(d, w.re), la.scale(w.im, Jbar))


def _lex_pick(U: la.Matrix) -> la.Matrix:
    """Deterministic choice within the pair {U, -U}."""
    for x in la.flatten(U):
        if x:
            return U if x > 0 else la.neg(U)
    return U


def _symmetrize(e: MatrixAlgebraWithInvolution, U: la.Matrix, sign: int) -> la.Matrix:
    """(U + sign U*)/2, applied until stable (at most twice)."""
    for _ in range(2):
        V = la.scale(HALF, la.add(U, la.scale(sign, e.adjoint(U))))
        if la.equal(V, U):
            return U
        U = V
    if not la.equal(la.scale(HALF, la.add(U, la.scale(sign, e.adjoint(U)))), U):
        raise LiftError("sigma-symmetrization did not stabilize")
    return U


@dataclass
class StructureSet:
    label: str
    mats: Dict[str, la.Matrix] = field(default_factory=dict)
    relations: List[Tuple[str, bool]] = field(default_factory=list)

    def get(self, name):
        return self.mats.get(name)

    def all_ok(self) -> bool:
        return all(ok for _, ok in self.relations)


def _complement_classes(e: MatrixAlgebraWithInvolution, part: List[la.Matrix], n_basis: List[la.Matrix],
                        exclude: Sequence[la.Matrix] = ()) -> List[la.Matrix]:
    """Elements of ``part`` independent modulo span(n, exclude), trace-orthogonal to exclude."""
    d = e.d
    ech = la.Echelon(d * d)
    for m in list(n_basis) + list(exclude):
        ech.add(la.flatten(m))
    out = []
    for m in part:
        # project away from the excluded (non-isotropic, mutually orthogonal) directions
        for x in exclude:
            nx = inner(e, x, x)
            if nx:
                m = la.sub(m, la.scale(inner(e, x, m) / nx, x))
        if ech.add(la.flatten(m)):
            out.append(m)
    return out


def _centralizer(e: MatrixAlgebraWithInvolution, mats: Sequence[la.Matrix], within: List[la.Matrix]) -> List[la.Matrix]:
    """Basis of {U in span(within) : U M = M U for M in mats}."""
    if not within:
        return []
    d = e.d
    rows = []
    for M in mats:
        comms = [la.flatten(la.commutator(B, M)) for B in within]
        for idx in range(d * d):
            rows.append([c[idx] for c in comms])
    sol = la.nullspace(rows, len(within))
    return _span_basis([la.flatten(la.lin_comb(c, within)) for c in sol], d) if sol else []


def _search_vectors(dim: int, height: int):
    """Nonzero integer vectors ordered by max-norm, then lexicographically."""
    for h in range(1, height + 1):
        for v in itertools.product(range(-h, h + 1), repeat=dim):
            if max(abs(x) for x in v) != h:
                continue
            # canonical sign: first nonzero positive
            first = next(x for x in v if x)
            if first < 0:
                continue
            yield v


def _squarefree_scale(a: mpq):
    """(m, r) with a = m r^2, m a squarefree integer."""
    from sympy import factorint

    n = int(a.numerator) * int(a.denominator)
    m, r = 1 if n > 0 else -1, 1
    for prime, k in factorint(abs(n)).items():
        m *= prime ** (k % 2)
        r *= prime ** (k // 2)
    return m, mpq(r, int(a.denominator))


def _hyperbolic_points(D, sqrt):
    """Coordinate vectors of value 1 in hyperbolic coordinate planes of diag(D).

    If -D_i D_j is a square, e+- = e_i +- s e_j (s^2 = -D_i/D_j) are isotropic and
    e+ + e-/(4 D_i) has value 4 D_i / (4 D_i) = 1.
    """
    for i, j in itertools.permutations(range(len(D)), 2):
        if not D[i] or not D[j]:
            continue
        sq = sqrt(-D[i] / D[j])
        if sq is None:
            continue
        c = 1 / (4 * D[i])
        v = [0] * len(D)
        v[i], v[j] = 1 + c, sq * (1 - c)
        yield v


def _square_norm_points(Q: la.Matrix, height: int = 12, budget: int = 20000):
    """Rational v with v^T Q v a nonzero rational square.

    Q is diagonalized by congruence and rescaled to squarefree integer entries m_i;
    then small integer points of sum m_i y_i^2 = t^2 are searched, and each pair of
    positive entries is handed to an integer solver for m_i y^2 + m_j z^2 = t^2.
    Every candidate is checked exactly before it is returned.
    """
    from sympy import symbols
    from sympy.solvers.diophantine.diophantine import diop_ternary_quadratic

    D, P = la.congruence_diagonalize(Q)
    for y in _hyperbolic_points(D, sqrt_rational):
        yield [sum((x * P[row][c] for c, x in enumerate(y)), mpq(0)) for row in range(len(P))]
    cols, ms = [], []
    for c, a in enumerate(D):
        if a > 0:
            m, r = _squarefree_scale(a)
            # Q(col / r) = m
            cols.append([P[row][c] / r for row in range(len(P))])
            ms.append(m)
    k = len(ms)
    if not k:
        return

    def point(y):
        if sqrt_rational(mpq(sum(m * x * x for m, x in zip(ms, y)))) is None:
            return None
        return [sum((x * col[row] for x, col in zip(y, cols)), mpq(0)) for row in range(len(P))]

    seen = 0
    for h in range(1, height + 1):
        for y in _search_vectors(k, h):
            seen += 1
            v = point(y)
            if v is not None:
                yield v
            if seen >= budget:
                break
        if seen >= budget:
            break
    # sympy orders the solution by symbol name, so name them in the order wanted
    a1, a2, a3 = symbols("a1 a2 a3", integer=True)
    for i, j in itertools.combinations(range(k), 2):
        sol = diop_ternary_quadratic(ms[i] * a1 ** 2 + ms[j] * a2 ** 2 - a3 ** 2)
        if not sol or sol[0] is None:
            continue
        y = [0] * k
        y[i], y[j] = int(sol[0]), int(sol[1])
        if any(y):
            v = point(y)
            if v is not None:
                yield v


def _gaussian_square_points(Q: la.Matrix, height: int = 1):
    """Vectors y over Q(i) with y^T Q y a nonzero square in Q(i) (Q symmetric over Q(i)).

    Q is diagonalized by congruence. When the diagonal is rational, multiplying a
    coordinate by i flips the sign of its entry, so the rational solver runs on every
    sign pattern; otherwise small Gaussian-integer points are searched.
    """
    D, P = la.congruence_diagonalize(Q)
    keep = [c for c, a in enumerate(D) if a]
    if not keep:
        return
    n = len(P)

    def back(z):
        return [sum((x * P[row][c] for c, x in zip(keep, z)), Gaussian(0)) for row in range(n)]

    for y in _hyperbolic_points([Gaussian(D[c]) if not isinstance(D[c], Gaussian) else D[c] for c in keep],
                                sqrt_gaussian):
        yield back(y)
    diag = [D[c].re if isinstance(D[c], Gaussian) and D[c].im == 0 else D[c] for c in keep]
    if not any(isinstance(a, Gaussian) for a in diag):
        for signs in itertools.product((1, -1), repeat=len(diag)):
            R = la.diag(*[s * a for s, a in zip(signs, diag)])
            for v in _square_norm_points(R, height=6, budget=2000):
                yield back([Gaussian(x) if s > 0 else Gaussian(0, x) for s, x in zip(signs, v)])
        return
    vals = [Gaussian(a, b) for a in range(-height, height + 1) for b in range(-height, height + 1)]
    for y in itertools.product(vals, repeat=len(keep)):
        if not any(y):
            continue
        w = sqrt_gaussian(sum((a * x * x for a, x in zip(diag, y)), Gaussian(0)))
        if w is not None and w:
            yield back(y)


def _complex_independent(cands: List[la.Matrix], Jbar: la.Matrix) -> List[la.Matrix]:
    """A Q(i)-basis of the span of ``cands`` where i acts as Jbar."""
    d = len(Jbar)
    ech = la.Echelon(d * d)
    out = []
    for X in cands:
        a, b = la.flatten(X), la.flatten(la.matmul(Jbar, X))
        if ech.contains(a):
            continue
        ech.add(a)
        ech.add(b)
        out.append(X)
    return out


def _find_root(e, candidates: List[la.Matrix], n_basis, sign: int, Jbar=None, anticommute_with=None,
               height: int = 4, budget: int = 3000) -> Optional[la.Matrix]:
    """Search small combinations X of candidates with sign*X^2 a square scalar (mod n).

    After ``budget`` trials the conic sign*X^2 = square is solved in coordinates
    that diagonalize the quadratic form (over Q, or over Q(i) with i acting as Jbar).
    """
    if not candidates:
        return None
    if anticommute_with is not None:
        A = anticommute_with
        # component anticommuting with A (A^2 = +-Id)
        A2 = la.matmul(A, A)[0][0]
        candidates = [la.scale(HALF, la.sub(X, la.scale(A2, la.matmul(la.matmul(A, X), A)))) for X in candidates]

    def attempt(X):
        if is_nilpotent(X):
            return None
        S = _rational_scalar_root(X, sign) if Jbar is None else _gaussian_scalar_root(X, Jbar, sign)
        if S is None:
            return None
        try:
            return normalize_root(X, S, sign)
        except LiftError:
            return None

    if Jbar is not None:
        budget = min(budget, 300)
    for t, v in enumerate(_search_vectors(len(candidates), height)):
        if t >= budget:
            break
        U = attempt(la.lin_comb([mpq(c) for c in v], candidates))
        if U is not None:
            return U
    d = e.d
    if Jbar is None:
        k = len(candidates)
        Q = la.zeros(k)
        for a in range(k):
            for b in range(a, k):
                Q[a][b] = Q[b][a] = sign * la.trace(la.matmul(candidates[a], candidates[b])) / d
        for v in _square_norm_points(Q):
            U = attempt(la.lin_comb(v, candidates))
            if U is not None:
                return U
        return None
    # Jbar is central in e, so X -> sign*X^2 is a Q(i)-quadratic form on the candidates
    basis = _complex_independent(candidates, Jbar)
    k = len(basis)

    def phi(M):
        return Gaussian(la.trace(M) / d, -la.trace(la.matmul(M, Jbar)) / d)

    Q = [[Gaussian(0)] * k for _ in range(k)]
    for a in range(k):
        for b in range(a, k):
            M = la.scale(HALF, la.anticommutator(basis[a], basis[b]))
            Q[a][b] = Q[b][a] = phi(M) * sign
    for z in _gaussian_square_points(Q):
        X = la.zeros(d)
        for zj, B in zip(z, basis):
            X = la.add(X, la.add(la.scale(zj.re, B), la.scale(zj.im, la.matmul(Jbar, B))))
        U = attempt(X)
        if U is not None:
            return U
    return None


def lift_structures(e: MatrixAlgebraWithInvolution, n_basis: List[la.Matrix], label: str,
                    search_height: int = 4) -> StructureSet:
    """Exact structure representatives of Table-1 type ``label`` in e."""
    d = e.d
    Id = la.identity(d)
    st = StructureSet(label=label)
    if label == "(1)":
        st.relations = check_relations(label, st.mats, e.g0)
        return st
    plus = e.self_adjoint_part()
    minus = e.skew_adjoint_part()

    Jbar = None
    if label in ("(1C)", "(2C)", "(3C)"):
        cands = _complement_classes(e, plus, n_basis, exclude=[Id])
        Jbar = _find_root(e, cands, n_basis, -1, height=search_height)
        if Jbar is None:
            raise LiftError("no rational representative for the self-adjoint complex structure")
        Jbar = _lex_pick(_symmetrize(e, Jbar, +1))
        st.mats["Jbar"] = Jbar
        # restrict the rest of the search to the centralizer of Jbar
        minus = _centralizer(e, [Jbar], minus)

    if label == "(2)":
        J = _find_root(e, _complement_classes(e, minus, n_basis), n_basis, -1, height=search_height)
        if J is None:
            raise LiftError("no rational representative for J")
        st.mats["J"] = _lex_pick(_symmetrize(e, J, -1))
    elif label == "(2')":
        L = _find_root(e, _complement_classes(e, minus, n_basis), n_basis, +1, height=search_height)
        if L is None:
            raise LiftError("no rational representative for L")
        st.mats["L"] = _lex_pick(_symmetrize(e, L, -1))
    elif label == "(2C)":
        cands = _complement_classes(e, minus, n_basis)
        L = _find_root(e, cands, n_basis, +1, Jbar=Jbar, height=search_height)
        if L is None:
            raise LiftError("no rational representative for L")
        L = _lex_pick(_symmetrize(e, L, -1))
        st.mats["L"] = L
        st.mats["J"] = la.matmul(L, Jbar)
    elif label == "(3)":
        cands = _complement_classes(e, minus, n_basis)
        J1 = _find_root(e, cands, n_basis, -1, height=search_height)
        if J1 is None:
            raise LiftError("no rational representative for J1")
        J1 = _lex_pick(_symmetrize(e, J1, -1))
        cands2 = _complement_classes(e, minus, n_basis, exclude=[J1])
        J2 = _find_root(e, cands2, n_basis, -1, anticommute_with=J1, height=search_height)
        if J2 is None:
            raise LiftError("no rational representative for J2")
        J2 = _lex_pick(_symmetrize(e, J2, -1))
        st.mats.update(J1=J1, J2=J2, J3=la.matmul(J1, J2))
    elif label in ("(3')", "(3C)"):
        cands = _complement_classes(e, minus, n_basis)
        L1 = _find_root(e, cands, n_basis, +1, Jbar=Jbar, height=search_height)
        if L1 is None:
            raise LiftError("no rational representative for L1")
        L1 = _lex_pick(_symmetrize(e, L1, -1))
        cands2 = _complement_classes(e, minus, n_basis, exclude=[L1])
        L2 = _find_root(e, cands2, n_basis, +1, Jbar=Jbar, anticommute_with=L1, height=search_height)
        if L2 is None:
            raise LiftError("no rational representative for L2")
        L2 = _lex_pick(_symmetrize(e, L2, -1))
        st.mats.update(L1=L1, L2=L2, J=la.matmul(L2, L1))
    elif label == "(1C)":
        pass
    else:
        raise LiftError(f"no structure lifting for label {label}")
    st.relations = check_relations(label, st.mats, e.g0)
    bad = [name for name, ok in st.relations if not ok]
    if bad:
        raise LiftError(f"Table-1 relations fail: {bad}")
    return st


# Table-1 relations ------------------------------------------------------------------------------

def check_relations(label: str, mats: Dict[str, la.Matrix], g0: la.Matrix) -> List[Tuple[str, bool]]:
    """Every relation of the generator presentation of s, checked exactly."""
    if not mats:
        return []
    d = len(g0)
    Id = la.identity(d)
    mI = la.neg(Id)
    g0inv = la.inverse(g0)
    adj = lambda U: la.matmul(la.matmul(g0inv, la.transpose(U)), g0)
    mul = la.matmul
    eq = la.equal
    out: List[Tuple[str, bool]] = []

    def rel(name, ok):
        out.append((name, bool(ok)))

    def sq(name, val):
        rel(f"{name}^2 = {'-' if val < 0 else ''}Id", eq(mul(mats[name], mats[name]), Id if val > 0 else mI))

    def skew(name):
        rel(f"{name}* = -{name}", eq(adj(mats[name]), la.neg(mats[name])))

    def selfadj(name):
        rel(f"{name}* = {name}", eq(adj(mats[name]), mats[name]))

    def central(name):
        for other in mats:
            if other != name:
                rel(f"{name}{other} = {other}{name}", eq(mul(mats[name], mats[other]), mul(mats[other], mats[name])))

    def balanced(name):
        L = mats[name]
        p = len(la.nullspace(la.sub(L, Id), d)) if d else 0
        m = len(la.nullspace(la.add(L, Id), d)) if d else 0
        rel(f"dim ker({name}-Id) = dim ker({name}+Id) = d/2", p == m == d // 2)

    if "Jbar" in mats:
        sq("Jbar", -1)
        selfadj("Jbar")
        central("Jbar")
    if label == "(2)":
        sq("J", -1)
        skew("J")
    elif label == "(2')":
        sq("L", 1)
        skew("L")
        balanced("L")
    elif label == "(2C)":
        sq("L", 1)
        sq("J", -1)
        skew("L")
        skew("J")
        balanced("L")
        L, J, Jb = mats["L"], mats["J"], mats["Jbar"]
        rel("LJ = Jbar", eq(mul(L, J), Jb))
        rel("JL = Jbar", eq(mul(J, L), Jb))
    elif label == "(3)":
        for k in ("J1", "J2", "J3"):
            sq(k, -1)
            skew(k)
        J = [mats["J1"], mats["J2"], mats["J3"]]
        for i in range(3):
            a, b, c = J[i], J[(i + 1) % 3], J[(i + 2) % 3]
            rel(f"J{i + 1}J{(i + 1) % 3 + 1} = J{(i + 2) % 3 + 1}", eq(mul(a, b), c))
        for i, k in itertools.combinations(range(3), 2):
            rel(f"J{i + 1}J{k + 1} = -J{k + 1}J{i + 1}", eq(mul(J[i], J[k]), la.neg(mul(J[k], J[i]))))
    elif label in ("(3')", "(3C)"):
        sq("L1", 1)
        sq("L2", 1)
        sq("J", -1)
        for k in ("L1", "L2", "J"):
            skew(k)
        balanced("L1")
        balanced("L2")
        L1, L2, J = mats["L1"], mats["L2"], mats["J"]
        rel("J = -L1L2", eq(J, la.neg(mul(L1, L2))))
        rel("J = L2L1", eq(J, mul(L2, L1)))
        rel("L1 = L2J", eq(L1, mul(L2, J)))
        rel("L1 = -JL2", eq(L1, la.neg(mul(J, L2))))
        rel("L2 = JL1", eq(L2, mul(J, L1)))
        rel("L2 = -L1J", eq(L2, la.neg(mul(L1, J))))
        if label == "(3C)":
            Jb = mats["Jbar"]
            L3 = la.neg(mul(Jb, J))
            Ls = [L1, L2, L3]
            for i in range(3):
                a, b, c = Ls[i], Ls[(i + 1) % 3], Ls[(i + 2) % 3]
                rel(f"i L{i + 1}L{(i + 1) % 3 + 1} = L{(i + 2) % 3 + 1} (i = Jbar)", eq(mul(Jb, mul(a, b)), c))
            for i, k in itertools.combinations(range(3), 2):
                rel(f"L{i + 1}L{k + 1} = -L{k + 1}L{i + 1}", eq(mul(Ls[i], Ls[k]), la.neg(mul(Ls[k], Ls[i]))))
    return out


# structure manifolds --------------------------------------------------------------------------------

def structure_manifolds(st: StructureSet) -> dict:
    """Describe and sample the sets of (para)complex structures of s."""
    mats = st.mats
    label = st.label
    d = len(next(iter(mats.values()))) if mats else 0
    Id = la.identity(d) if d else []
    out = {"label": label, "samples": []}

    def combo(cs, names):
        return la.lin_comb(cs, [mats[n] for n in names])

    if label == "(3)":
        out["description"] = "2-sphere {aJ1 + bJ2 + cJ3 : a^2 + b^2 + c^2 = 1} of complex structures"
        pts = [(1, 0, 0), (mpq(3, 5), mpq(4, 5), 0), (mpq(2, 3), mpq(2, 3), mpq(1, 3)), (1, 1, 0)]
        for p in pts:
            p = [mpq(x) for x in p]
            U = combo(p, ["J1", "J2", "J3"])
            s = sum(x * x for x in p)
            sq = la.matmul(U, U)
            out["samples"].append({"point": [str(x) for x in p], "norm": str(s),
                                   "square_is_minus_id": la.equal(sq, la.neg(Id)),
                                   "consistent": la.equal(sq, la.scale(-s, Id))})
    elif label in ("(3')", "(3C)"):
        out["description"] = ("(aL1 + bL2 + cJ)^2 = (a^2 + b^2 - c^2) Id: complex structures on "
                              "a^2 + b^2 - c^2 = -1 (two-sheet hyperboloid), paracomplex on "
                              "a^2 + b^2 - c^2 = 1 (one-sheet hyperboloid)")
        pts = [(0, 0, 1), (1, 0, 0), (0, 1, 0), (mpq(3, 4), 0, mpq(5, 4)), (1, 1, 1), (2, 1, 2)]
        for p in pts:
            p = [mpq(x) for x in p]
            U = combo(p, ["L1", "L2", "J"])
            s = p[0] ** 2 + p[1] ** 2 - p[2] ** 2
            sq = la.matmul(U, U)
            kind = "complex" if s == -1 else ("paracomplex" if s == 1 else "neither")
            out["samples"].append({"point": [str(x) for x in p], "quadric": str(s), "kind": kind,
                                   "consistent": la.equal(sq, la.scale(s, Id))})
        if label == "(3C)":
            # coefficients in Q[Jbar]: a = a' + a'' Jbar
            Jb = mats["Jbar"]
            a = la.add(Id, la.scale(1, Jb))       # 1 + Jbar
            c = la.scale(1, Jb)                   # Jbar
            # (1+i)^2 + 0 - i^2 = 2i + 1 -> scalar 1 + 2 Jbar
            U = la.add(la.matmul(a, mats["L1"]), la.matmul(c, mats["J"]))
            sq = la.matmul(U, U)
            expect = la.add(Id, la.scale(2, Jb))
            out["samples"].append({"point": ["1+i", "0", "i"], "quadric": "1+2i",
                                   "consistent": la.equal(sq, expect)})
    else:
        names = {"(1C)": ["Jbar"], "(2)": ["J"], "(2')": ["L"], "(2C)": ["Jbar", "J", "L"]}.get(label, [])
        out["description"] = "finite sets " + ", ".join("{+-%s}" % n for n in names) if names else "none"
        for n in names:
            U = mats[n]
            sgn = 1 if n.startswith("L") else -1
            for s in (1, -1):
                V = la.scale(s, U)
                out["samples"].append({"structure": ("" if s > 0 else "-") + n,
                                       "consistent": la.equal(la.matmul(V, V), la.scale(sgn, Id))})
    out["all_consistent"] = all(x.get("consistent", True) for x in out["samples"])
    return out


# parallel tensor catalog -------------------------------------------------------------------------------

def _complex_basis(J: la.Matrix) -> List[la.Vector]:
    """Vectors b_k such that (b_k, J b_k)_k is a real basis."""
    d = len(J)
    ech = la.Echelon(d)
    out = []
    for i in range(d):
        v = [mpq(1) if k == i else mpq(0) for k in range(d)]
        trial = la.Echelon(d)
        trial.rows = [list(r) for r in ech.rows]
        trial.pivots = list(ech.pivots)
        if trial.add(v) and trial.add(la.matvec(J, v)):
            ech = trial
            out.append(v)
    return out


def _bil(B: la.Matrix, x, y):
    return sum((x[i] * sum((B[i][j] * y[j] for j in range(len(y)) if y[j]), mpq(0)) for i in range(len(x)) if x[i]), mpq(0))


def _complex_gram(re: la.Matrix, im: la.Matrix, basis: List[la.Vector]) -> la.Matrix:
    return [[Gaussian(_bil(re, u, v), _bil(im, u, v)) for v in basis] for u in basis]


def _pfaffian(A: la.Matrix):
    n = len(A)
    if n == 0:
        return mpq(1)
    if n % 2:
        return mpq(0)
    total = mpq(0)
    for j in range(1, n):
        if not A[0][j]:
            continue
        idx = [k for k in range(n) if k not in (0, j)]
        sub = [[A[a][b] for b in idx] for a in idx]
        sign = 1 if j % 2 == 1 else -1
        total = total + sign * A[0][j] * _pfaffian(sub)
    return total


def _check_complex_bilinear(re, im, J, sign) -> bool:
    """B(Jx, y) = sign*i B(x, y) with B = re + i im."""
    # matrices: B(Jx, y) = x^T J^T re y ...
    JT = la.transpose(J)
    lhs_re = la.matmul(JT, re)
    lhs_im = la.matmul(JT, im)
    # sign*i (re + i im) = -sign im + i sign re
    return la.equal(lhs_re, la.scale(-sign, im)) and la.equal(lhs_im, la.scale(sign, re))


def parallel_tensor_catalog(e: MatrixAlgebraWithInvolution, n_basis: List[la.Matrix], st: StructureSet,
                            rng=None) -> List[dict]:
    """Instantiate every applicable row of the parallel-tensor table and check it."""
    import random as _random

    rng = rng or _random.Random(0)
    label = st.label
    g0 = e.g0
    d = e.d
    Id = la.identity(d)
    mats = st.mats
    entries: List[dict] = []
    n_minus = [m for m in (la.scale(HALF, la.sub(N, e.adjoint(N))) for N in n_basis) if not la.is_zero(m)]

    def form(U):
        return la.matmul(g0, U)

    def add(kind, param, ok_sym, ok_nondeg, extra=None):
        ent = {"kind": kind, "parameter": param, "symmetry_ok": bool(ok_sym), "nondegenerate": bool(ok_nondeg)}
        if extra:
            ent.update(extra)
        ent["ok"] = bool(ok_sym and ok_nondeg and all(v for k, v in (extra or {}).items() if isinstance(v, bool)))
        entries.append(ent)

    def nil_perturb(sign_filter=None):
        """A random element of n-minus (optionally commuting/anticommuting with a structure)."""
        if not n_minus:
            return la.zeros(d)
        N = la.lin_comb([mpq(rng.randint(-2, 2)) for _ in n_minus], n_minus)
        if sign_filter is not None:
            A, s = sign_filter
            A2 = la.matmul(A, A)[0][0]
            # component with A N = s N A
            N = la.scale(HALF, la.add(N, la.scale(s * A2, la.matmul(la.matmul(A, N), A))))
        return N

    # metric g(., U .) for U in e+ \ n+
    for name, U in [("Id", Id)] + ([("Jbar", mats["Jbar"])] if "Jbar" in mats else []):
        B = form(U)
        add("pseudo-Riemannian metric", name, la.is_symmetric(B), la.det(B) != 0)
    # symplectic forms, all except (1) and (1C)
    if label not in ("(1)", "(1C)"):
        skew_names = [k for k in mats if k != "Jbar"]
        for name in skew_names:
            U = la.add(mats[name], nil_perturb())
            B = form(U)
            add("symplectic form", f"{name} + N", la.is_antisymmetric(B), la.det(B) != 0)
    # complex Riemannian metric g_U = g(., U.) + i g(., Jbar U.)
    if label in ("(1C)", "(2C)", "(3C)"):
        Jb = mats["Jbar"]
        U = Id
        re, im = form(U), form(la.matmul(Jb, U))
        ok_sym = la.is_symmetric(re) and la.is_symmetric(im)
        bil = _check_complex_bilinear(re, im, Jb, -1)
        basis = _complex_basis(Jb)
        G = _complex_gram(re, im, basis)
        vol = la.det(G)
        add("complex Riemannian metric", "Id", ok_sym, la.det(re) != 0, {"complex_bilinear": bil})
        add("nonzero Jbar-complex volume form", "Id", ok_sym, bool(vol), {"gram_determinant": str(vol)})
    # Hermitian metric h_U w.r.t. a skew complex structure J
    if label in ("(2)", "(2C)", "(3)", "(3')", "(3C)"):
        Jn = "J" if "J" in mats else "J1"
        J = mats[Jn]
        U = Id
        re, im = form(U), form(la.matmul(J, U))
        herm = la.equal(la.matmul(la.matmul(la.transpose(J), re), J), re)
        add("Hermitian metric", f"Id (J={Jn})", la.is_symmetric(re) and la.is_antisymmetric(im), la.det(re) != 0,
            {"J_invariant": herm})
    # Jbar-complex symplectic form
    if label in ("(2C)", "(3C)"):
        Jb = mats["Jbar"]
        V = mats["L"] if label == "(2C)" else mats["L1"]
        U = la.add(V, nil_perturb((Jb, 1)))
        re, im = form(U), form(la.matmul(Jb, U))
        add("Jbar-complex symplectic form", "L + N", la.is_antisymmetric(re) and la.is_antisymmetric(im),
            la.det(re) != 0, {"complex_bilinear": _check_complex_bilinear(re, im, Jb, -1)})
    # J-complex symplectic form and volume form
    if label in ("(3)", "(3')", "(3C)"):
        if label == "(3)":
            J, V, pname = mats["J1"], mats["J2"], "J2 (J=J1)"
        else:
            J, V, pname = mats["J"], mats["L1"], "L1 (J=J)"
        U = la.add(V, nil_perturb((J, -1)))
        re, im = form(U), form(la.matmul(J, U))
        anti = la.equal(la.matmul(U, J), la.neg(la.matmul(J, U)))
        bil = _check_complex_bilinear(re, im, J, 1)
        add("J-complex symplectic form", pname, la.is_antisymmetric(re) and la.is_antisymmetric(im),
            la.det(re) != 0, {"complex_bilinear": bil, "UJ = -JU": anti})
        basis = _complex_basis(J)
        G = _complex_gram(re, im, basis)
        pf = _pfaffian(G)
        add("nonzero J-complex volume form", f"omega_U^(d/4), {pname}", la.is_antisymmetric(G), bool(pf),
            {"pfaffian": str(pf)})
    return entries


def minimal_polynomial_lemma(U: la.Matrix, N: la.Matrix) -> bool:
    """Square-free parts of the minimal polynomials of U and U + N agree."""
    a = la.squarefree_part(la.minimal_polynomial(U))
    b = la.squarefree_part(la.minimal_polynomial(la.add(U, N)))
    return a == b
