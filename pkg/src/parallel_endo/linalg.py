"""Exact dense linear algebra over Q or Q(i).

Matrices are lists of rows. Entries are mpq or Gaussian; nothing here
assumes which, so the same code serves real and complex germs.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .scalars import Gaussian, conj

Matrix = List[list]
Vector = list

_Z = mpq(0)
_O = mpq(1)


class LinAlgError(ValueError):
    pass


# construction / basic ops ----------------------------------------------------

def zeros(r: int, c: Optional[int] = None) -> Matrix:
    c = r if c is None else c
    return [[_Z] * c for _ in range(r)]


def identity(n: int, value=_O) -> Matrix:
    m = zeros(n)
    for i in range(n):
        m[i][i] = value
    return m


def diag(*entries) -> Matrix:
    n = len(entries)
    m = zeros(n)
    for i, v in enumerate(entries):
        m[i][i] = mpq(v) if not isinstance(v, Gaussian) else v
    return m


def block_diag(*blocks: Matrix) -> Matrix:
    n = sum(len(b) for b in blocks)
    m = zeros(n)
    o = 0
    for b in blocks:
        k = len(b)
        for i in range(k):
            for j in range(k):
                m[o + i][o + j] = b[i][j]
        o += k
    return m


def block(rows: Sequence[Sequence[Matrix]]) -> Matrix:
    """Assemble a block matrix from a grid of equally sized square blocks."""
    out = []
    for brow in rows:
        h = len(brow[0])
        for i in range(h):
            line = []
            for b in brow:
                line.extend(b[i])
            out.append(line)
    return out


def as_matrix(rows) -> Matrix:
    return [[x if isinstance(x, Gaussian) else mpq(x) for x in r] for r in rows]


def shape(a: Matrix) -> Tuple[int, int]:
    return len(a), (len(a[0]) if a else 0)


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def conj_matrix(a: Matrix) -> Matrix:
    return [[conj(x) for x in r] for r in a]


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(c, a: Matrix) -> Matrix:
    return [[c * x for x in r] for r in a]


def neg(a: Matrix) -> Matrix:
    return [[-x for x in r] for r in a]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise LinAlgError("shape mismatch in matmul")
    bt = transpose(b)
    out = []
    for ra in a:
        nz = [(k, x) for k, x in enumerate(ra) if x]
        row = []
        for cb in bt:
            s = _Z
            for k, x in nz:
                y = cb[k]
                if y:
                    s = s + x * y
            row.append(s)
        out.append(row)
    return out


def matvec(a: Matrix, v: Vector) -> Vector:
    out = []
    for r in a:
        s = _Z
        for x, y in zip(r, v):
            if x and y:
                s = s + x * y
        out.append(s)
    return out


def matmul_chain(*ms: Matrix) -> Matrix:
    out = ms[0]
    for m in ms[1:]:
        out = matmul(out, m)
    return out


def commutator(a: Matrix, b: Matrix) -> Matrix:
    return sub(matmul(a, b), matmul(b, a))


def anticommutator(a: Matrix, b: Matrix) -> Matrix:
    return add(matmul(a, b), matmul(b, a))


def trace(a: Matrix):
    s = _Z
    for i in range(len(a)):
        s = s + a[i][i]
    return s


def is_zero(a) -> bool:
    if a and isinstance(a[0], list):
        return all(not x for r in a for x in r)
    return all(not x for x in a)


def equal(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def mat_pow(a: Matrix, k: int) -> Matrix:
    out = identity(len(a))
    for _ in range(k):
        out = matmul(out, a)
    return out


def flatten(a: Matrix) -> Vector:
    return [x for r in a for x in r]


def unflatten(v: Vector, n: int) -> Matrix:
    return [list(v[i * n:(i + 1) * n]) for i in range(n)]


def lin_comb(coeffs, mats: Sequence[Matrix]) -> Matrix:
    n, m = shape(mats[0])
    out = zeros(n, m)
    for c, a in zip(coeffs, mats):
        if not c:
            continue
        for i in range(n):
            ri, oi = a[i], out[i]
            for j in range(m):
                if ri[j]:
                    oi[j] = oi[j] + c * ri[j]
    return out


# elimination -----------------------------------------------------------------

def rref(a: Matrix, ncols: Optional[int] = None) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns."""
    rows = [list(r) for r in a]
    if not rows:
        return [], []
    ncols = len(rows[0]) if ncols is None else ncols
    pivots: List[int] = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        p = None
        for i in range(r, nrows):
            if rows[i][c]:
                p = i
                break
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        pr = rows[r]
        inv = 1 / pr[c]
        if inv != 1:
            pr = [x * inv if x else x for x in pr]
            rows[r] = pr
        nzc = [j for j in range(c, len(pr)) if pr[j]]
        for i in range(nrows):
            if i != r:
                f = rows[i][c]
                if f:
                    ri = rows[i]
                    for j in nzc:
                        ri[j] = ri[j] - f * pr[j]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return rows[:r], pivots


def rank(a: Matrix) -> int:
    return len(rref(a)[1]) if a else 0


def nullspace(a: Matrix, ncols: Optional[int] = None) -> List[Vector]:
    """Basis of {x : a x = 0}; ncols needed when a has no rows."""
    if not a:
        if ncols is None:
            raise LinAlgError("nullspace of an empty matrix needs ncols")
        return [[_O if i == j else _Z for i in range(ncols)] for j in range(ncols)]
    ncols = len(a[0])
    r, piv = rref(a, ncols)
    free = [c for c in range(ncols) if c not in set(piv)]
    basis = []
    for f in free:
        v = [_Z] * ncols
        v[f] = _O
        for row, pc in zip(r, piv):
            if row[f]:
                v[pc] = -row[f]
        basis.append(v)
    return basis


def solve(a: Matrix, b: Vector) -> Optional[Vector]:
    """One solution of a x = b, or None if inconsistent."""
    ncols = len(a[0]) if a else 0
    aug = [list(r) + [bi] for r, bi in zip(a, b)]
    r, piv = rref(aug, ncols + 1)
    if ncols in piv:
        return None
    x = [_Z] * ncols
    for row, pc in zip(r, piv):
        x[pc] = row[ncols]
    return x


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(r) + [(_O if i == j else _Z) for j in range(n)] for i, r in enumerate(a)]
    r, piv = rref(aug, n)
    if piv != list(range(n)):
        raise LinAlgError("singular matrix")
    return [row[n:] for row in r]


def det(a: Matrix):
    n = len(a)
    rows = [list(r) for r in a]
    d = _O
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c]), None)
        if p is None:
            return _Z
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            d = -d
        pc = rows[c][c]
        d = d * pc
        for i in range(c + 1, n):
            f = rows[i][c]
            if f:
                f = f / pc
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return d


class Echelon:
    """Incrementally grown row space with a reduction map.

    Keeps rows in a partially reduced form: each stored row has a leading
    1 at its pivot and zeros at the pivots of earlier rows.
    """

    def __init__(self, ncols: int):
        self.ncols = ncols
        self.rows: List[Vector] = []
        self.pivots: List[int] = []

    def reduce(self, v: Vector) -> Vector:
        v = list(v)
        for row, p in zip(self.rows, self.pivots):
            f = v[p]
            if f:
                for j in range(p, self.ncols):
                    if row[j]:
                        v[j] = v[j] - f * row[j]
        return v

    def add(self, v: Vector) -> bool:
        w = self.reduce(v)
        p = next((j for j, x in enumerate(w) if x), None)
        if p is None:
            return False
        inv = 1 / w[p]
        w = [x * inv if x else x for x in w]
        # keep pivots sorted so reduce() can start at the pivot column
        for row in self.rows:
            f = row[p]
            if f:
                for j in range(p, self.ncols):
                    if w[j]:
                        row[j] = row[j] - f * w[j]
        idx = 0
        while idx < len(self.pivots) and self.pivots[idx] < p:
            idx += 1
        self.rows.insert(idx, w)
        self.pivots.insert(idx, p)
        return True

    def contains(self, v: Vector) -> bool:
        return is_zero(self.reduce(v))

    def __len__(self):
        return len(self.rows)


def independent_subset(vectors: Sequence[Vector]) -> List[int]:
    """Indices of a maximal independent subfamily, greedily in order."""
    if not vectors:
        return []
    e = Echelon(len(vectors[0]))
    keep = []
    for i, v in enumerate(vectors):
        if e.add(v):
            keep.append(i)
    return keep


def coordinates(basis: Sequence[Vector], v: Vector) -> Optional[Vector]:
    """Coefficients c with sum c_i basis_i = v, or None."""
    if not basis:
        return [] if is_zero(v) else None
    a = transpose([list(b) for b in basis])
    return solve(a, list(v))


# symmetric forms ---------------------------------------------------------------

def congruence_diagonalize(s: Matrix) -> Tuple[list, Matrix]:
    """Return (d, P) with P^T S P = diag(d), exact, for symmetric rational S.

    Pivots on a nonzero diagonal entry when possible; otherwise a pair
    (i, j) with S_ij != 0 is replaced by e_i + e_j first.
    """
    n = len(s)
    a = [list(r) for r in s]
    p = identity(n)
    diag_out = []
    k = 0
    while k < n:
        piv = next((i for i in range(k, n) if a[i][i]), None)
        if piv is None:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if a[i][j]), None)
            if pair is None:
                diag_out.extend([_Z] * (n - k))
                break
            i, j = pair
            # e_i <- e_i + e_j ; a_ii becomes 2 a_ij
            for r in range(n):
                a[r][i] = a[r][i] + a[r][j]
            for c in range(n):
                a[i][c] = a[i][c] + a[j][c]
            for r in range(n):
                p[r][i] = p[r][i] + p[r][j]
            piv = i
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            for r in a:
                r[k], r[piv] = r[piv], r[k]
            for r in p:
                r[k], r[piv] = r[piv], r[k]
        d = a[k][k]
        for i in range(k + 1, n):
            f = a[i][k]
            if f:
                f = f / d
                for c in range(n):
                    a[i][c] = a[i][c] - f * a[k][c]
                for r in range(n):
                    a[r][i] = a[r][i] - f * a[r][k]
                for r in range(n):
                    p[r][i] = p[r][i] - f * p[r][k]
        diag_out.append(d)
        k += 1
    return diag_out, p


def signature(s: Matrix) -> Tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric rational matrix."""
    if not s:
        return (0, 0, 0)
    d, _ = congruence_diagonalize(s)
    pos = sum(1 for x in d if x > 0)
    negc = sum(1 for x in d if x < 0)
    return pos, negc, len(d) - pos - negc


def is_symmetric(a: Matrix) -> bool:
    n = len(a)
    return all(a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n))


def is_antisymmetric(a: Matrix) -> bool:
    n = len(a)
    return all(a[i][j] == -a[j][i] for i in range(n) for j in range(i, n))


# polynomials ------------------------------------------------------------------

def minimal_polynomial(a: Matrix) -> List:
    """Monic minimal polynomial, coefficients from degree 0 upward."""
    n = len(a)
    e = Echelon(n * n)
    powers = [identity(n)]
    vecs = [flatten(powers[0])]
    e.add(vecs[0])
    while True:
        nxt = matmul(powers[-1], a)
        v = flatten(nxt)
        if not e.add(v):
            c = coordinates(vecs, v)
            return [-x for x in c] + [_O]
        powers.append(nxt)
        vecs.append(v)


def poly_eval_matrix(coeffs, a: Matrix) -> Matrix:
    n = len(a)
    out = zeros(n)
    for c in reversed(coeffs):
        out = matmul(out, a)
        for i in range(n):
            out[i][i] = out[i][i] + c
    return out


def factor_rational_poly(coeffs) -> List[Tuple[List, int]]:
    """Irreducible factors over Q of a rational polynomial (low degree first)."""
    import sympy

    x = sympy.Symbol("x")
    expr = sum(sympy.Rational(int(mpq(c).numerator), int(mpq(c).denominator)) * x ** k
               for k, c in enumerate(coeffs))
    poly = sympy.Poly(expr, x, domain="QQ")
    _, facs = poly.factor_list()
    out = []
    for f, m in facs:
        fc = [mpq(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in reversed(f.all_coeffs())]
        lead = fc[-1]
        out.append(([c / lead for c in fc], m))
    out.sort(key=lambda t: (len(t[0]), [str(c) for c in t[0]]))
    return out


def squarefree_part(coeffs) -> List:
    facs = factor_rational_poly(coeffs)
    out = [_O]
    for f, _ in facs:
        out = poly_mul(out, f)
    return out


def poly_mul(a, b):
    out = [_Z] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


# structure helpers --------------------------------------------------------------

def I_pq(p: int, q: int) -> Matrix:
    return diag(*([1] * p + [-1] * q))


def J_std(p: int) -> Matrix:
    """[[0, -I_p], [I_p, 0]]."""
    z, i = zeros(p), identity(p)
    return block([[z, neg(i)], [i, z]])


def L_std(p: int) -> Matrix:
    """[[0, I_p], [I_p, 0]]."""
    z, i = zeros(p), identity(p)
    return block([[z, i], [i, z]])


def realify(m: Matrix) -> Matrix:
    """Real 2n x 2n matrix of a complex n x n matrix, coordinates (x, y)."""
    from .scalars import imag_part, real_part

    p = [[real_part(x) for x in r] for r in m]
    q = [[imag_part(x) for x in r] for r in m]
    return block([[p, neg(q)], [q, p]])


def matrix_to_json(m: Matrix):
    from .scalars import encode_scalar

    return [[encode_scalar(x) for x in r] for r in m]


def matrix_from_json(obj) -> Matrix:
    from .scalars import decode_scalar

    return [[decode_scalar(x) for x in r] for r in obj]
