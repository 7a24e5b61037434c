"""Cartan test for the exterior differential system of closed omega_H germs.

Unknowns live on C^{2 delta} x H_eps, whose tangent space at H0 is
C^{2 delta} + W_eps. The 3-form is lambda(u, v, w) = Im sum_cyc u^T H(v) conj(w)
(this is tdz ^ dH ^ dzbar up to the factor 2i on real vectors). Characters
come from the polar spaces of the printed horizontal flag, and the dimension
of the space of integral elements is an independent direct nullspace.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from math import comb
from typing import List, Optional

from gmpy2 import mpq

from . import linalg as la
from .scalars import Gaussian, imag_part

DELTA_CAP = 3


class CartanError(ValueError):
    pass


@dataclass
class TangentModel:
    delta: int
    epsilon: int
    p: int
    q: int
    complex: bool
    H0: la.Matrix
    Omega0: la.Matrix
    W: List[la.Matrix]

    @property
    def dim_W(self) -> int:
        return len(self.W)

    @property
    def real_dim(self) -> int:
        """Real dimension of C^{2 delta}."""
        return 4 * self.delta

    def to_json(self):
        return {"delta": self.delta, "epsilon": self.epsilon, "signature": [self.p, self.q],
                "complex": self.complex, "dim_W": self.dim_W}


def _g(x) -> Gaussian:
    return x if isinstance(x, Gaussian) else Gaussian(x)


def _gmat(M) -> la.Matrix:
    return [[_g(x) for x in r] for r in M]


def _hermitian_basis(n: int) -> List[la.Matrix]:
    out = []
    for i in range(n):
        m = [[Gaussian(0)] * n for _ in range(n)]
        m[i][i] = Gaussian(1)
        out.append(m)
    for i in range(n):
        for j in range(i + 1, n):
            m = [[Gaussian(0)] * n for _ in range(n)]
            m[i][j] = m[j][i] = Gaussian(1)
            out.append(m)
            m = [[Gaussian(0)] * n for _ in range(n)]
            m[i][j], m[j][i] = Gaussian(0, 1), Gaussian(0, -1)
            out.append(m)
    return out


def _symmetric_basis(n: int) -> List[la.Matrix]:
    out = []
    for i in range(n):
        for j in range(i, n):
            for val in (Gaussian(1), Gaussian(0, 1)):
                m = [[Gaussian(0)] * n for _ in range(n)]
                m[i][j] = m[j][i] = val
                out.append(m)
    return out


def build_model(delta: int, epsilon: int = -1, p: Optional[int] = None, complex: bool = False,
                cap: int = DELTA_CAP) -> TangentModel:
    """Tangent space W_eps at the normal-form base point, with its real basis."""
    if delta < 1:
        raise CartanError("delta must be >= 1")
    if delta > cap:
        raise CartanError(f"delta={delta} exceeds the cap {cap}")
    if epsilon not in (-1, 1):
        raise CartanError("epsilon must be -1 or +1")
    n = delta
    Z = la.zeros(n)
    if epsilon == -1:
        p = n if p is None else p
        if not 0 <= p <= n:
            raise CartanError(f"p must lie in [0, {n}]")
        q = n - p
        D = la.I_pq(p, q)
        H0 = la.block_diag(D, D)
    else:
        p, q = n, n
        D = None
        H0 = la.I_pq(n, n)
    O = la.J_std(n)
    W = []
    for a in _hermitian_basis(n):
        abar = la.conj_matrix(a)
        if epsilon == 1:
            W.append(la.block([[a, _gmat(Z)], [_gmat(Z), abar]]))
        else:
            W.append(la.block([[a, _gmat(Z)], [_gmat(Z), la.neg(la.matmul(la.matmul(D, abar), D))]]))
    for b in _symmetric_basis(n):
        bbar = la.conj_matrix(b)
        if epsilon == 1:
            W.append(la.block([[_gmat(Z), b], [bbar, _gmat(Z)]]))
        else:
            W.append(la.block([[_gmat(Z), la.matmul(D, b)], [la.matmul(bbar, D), _gmat(Z)]]))
    model = TangentModel(delta=delta, epsilon=epsilon, p=p, q=q, complex=complex, H0=_gmat(H0),
                         Omega0=_gmat(O), W=[_gmat(T) for T in W])
    verify_model(model)
    return model


def verify_model(model: TangentModel) -> None:
    """Each basis element is Hermitian and tangent: conj(T) O H0 + conj(H0) O T = 0."""
    O, H0 = model.Omega0, model.H0
    for T in model.W:
        if not la.equal(la.transpose(T), la.conj_matrix(T)):
            raise CartanError("W basis element is not Hermitian")
        lhs = la.add(la.matmul(la.matmul(la.conj_matrix(T), O), H0), la.matmul(la.matmul(la.conj_matrix(H0), O), T))
        if not la.is_zero(lhs):
            raise CartanError("W basis element violates the linearized constraint")
    ech = la.Echelon(2 * len(model.H0) ** 2)
    for T in model.W:
        v = [x for e in la.flatten(T) for x in (e.re, e.im)]
        if not ech.add(v):
            raise CartanError("W basis is not R-linearly independent")
    n = model.delta
    if model.dim_W != 2 * n * n + n:
        raise CartanError(f"dim W = {model.dim_W}, expected {2 * n * n + n}")


# vectors and the 3-form -------------------------------------------------------------

def real_basis(model: TangentModel) -> List[List[Gaussian]]:
    """x_1..x_{2delta} -> e_j, y_1..y_{2delta} -> i e_j."""
    m = 2 * model.delta
    out = []
    for im_part in (False, True):
        for j in range(m):
            v = [Gaussian(0)] * m
            v[j] = Gaussian(0, 1) if im_part else Gaussian(1)
            out.append(v)
    return out


def real_coords(v: List[Gaussian]) -> List[mpq]:
    return [x.re for x in v] + [x.im for x in v]


def _bilinear(u, M, w) -> Gaussian:
    """u^T M conj(w)."""
    s = Gaussian(0)
    for i, ui in enumerate(u):
        if not ui:
            continue
        for j, wj in enumerate(w):
            if wj and M[i][j]:
                s = s + ui * M[i][j] * wj.conjugate()
    return s


def lambda_row(model: TangentModel, u, v, w) -> List[mpq]:
    """Coefficients of lambda_{H1}(u, v, w) in the unknowns c[r][s] of H1 = sum x_r(.) c_rs W_s."""
    nW = model.dim_W
    R = model.real_dim
    row = [mpq(0)] * (R * nW)
    cu, cv, cw = real_coords(u), real_coords(v), real_coords(w)
    for a, b, c, coords in ((u, w, None, cv), (v, u, None, cw), (w, v, None, cu)):
        # term x_r(middle) * a^T W_s conj(b)
        for s, Ws in enumerate(model.W):
            val = imag_part(_bilinear(a, Ws, b))
            if not val:
                continue
            for r in range(R):
                if coords[r]:
                    row[r * nW + s] += coords[r] * val
    return row


def polar_row(model: TangentModel, ei, ej) -> List[mpq]:
    """lambda((w, T), e_i, e_j) = Im(e_j^T T conj(e_i)) as a form in the W-coordinates of T."""
    return [imag_part(_bilinear(ej, Ws, ei)) for Ws in model.W]


# flag and characters --------------------------------------------------------------------

def build_flag(model: TangentModel) -> List[List[Gaussian]]:
    """e_j = d x_j, e_{delta+j} = d x_{delta+j} + ((j-1)/delta) d y_{delta+j}, e_{2delta+j} = d y_j."""
    n = model.delta
    m = 2 * n
    flag = []
    for j in range(1, n + 1):
        v = [Gaussian(0)] * m
        v[j - 1] = Gaussian(1)
        flag.append(v)
    for j in range(1, n + 1):
        v = [Gaussian(0)] * m
        v[n + j - 1] = Gaussian(1, mpq(j - 1, n))
        flag.append(v)
    for j in range(1, m + 1):
        v = [Gaussian(0)] * m
        v[j - 1] = Gaussian(0, 1)
        flag.append(v)
    if la.rank([real_coords(v) for v in flag]) != 4 * n:
        raise CartanError("flag vectors are not independent")
    return flag


def generic_flag(model: TangentModel, seed: int = 0) -> List[List[Gaussian]]:
    """Horizontal flag with small random Gaussian-integer coordinates (deterministic in seed)."""
    rng = random.Random(seed)
    m = 2 * model.delta
    while True:
        flag = [[Gaussian(rng.randint(-3, 3), rng.randint(-3, 3)) for _ in range(m)] for _ in range(2 * m)]
        if la.rank([real_coords(v) for v in flag]) == 2 * m:
            return flag


def _to_field(rows, model: TangentModel, rng: Optional[random.Random] = None):
    """Rows over Q, or over Q(i) in a Gaussian basis of the complexified unknowns."""
    if not model.complex or not rows:
        return rows
    ncols = len(rows[0])
    P = _gaussian_unipotent(ncols, rng or random.Random(ncols))
    return la.matmul([[Gaussian(x) for x in r] for r in rows], P)


def _gaussian_unipotent(n: int, rng: random.Random) -> la.Matrix:
    """Invertible I + iN with N strictly upper triangular, sparse."""
    P = [[Gaussian(1) if i == j else Gaussian(0) for j in range(n)] for i in range(n)]
    for i in range(n):
        for _ in range(2):
            j = rng.randrange(n)
            if j > i:
                P[i][j] = Gaussian(rng.randint(-2, 2), rng.randint(-2, 2))
    return P


@dataclass
class FlagReport:
    delta: int
    epsilon: int
    signature: List[int]
    complex: bool
    characters: List[int]
    polar_dims: List[int]
    dim_V: int
    sum_k_sk: int
    ordinary: bool
    last_nonzero: Optional[List[int]]
    expected_dim_V: int
    equations_rank: int
    unknowns: int
    horizontal_integral: bool
    relations: dict = field(default_factory=dict)
    flag: str = "printed"
    printed_characters: Optional[List[int]] = None
    printed_ordinary: Optional[bool] = None

    @property
    def scalars(self) -> str:
        return "Q(i)" if self.complex else "Q"

    def checks(self) -> dict:
        n = self.delta
        expected = [k - 1 if k <= 2 * n + 1 else 0 for k in range(1, 4 * n + 1)]
        return {
            "characters_match": self.characters == expected,
            "dim_V_matches": self.dim_V == self.expected_dim_V,
            "cartan_equality": self.dim_V == self.sum_k_sk,
            "horizontal_integral": self.horizontal_integral,
            "monotone_polar_spaces": all(a >= b for a, b in zip(self.polar_dims, self.polar_dims[1:])),
            "relations_hold": bool(self.relations.get("all_hold", False)),
            "relations_independent": bool(self.relations.get("independent", False)),
            "per_index_independent": bool(self.relations.get("per_index_independent", False)),
            "equations_rank_matches": self.equations_rank == 4 * comb(2 * n + 1, 3),
        }

    def ok(self) -> bool:
        return all(self.checks().values())

    def to_json(self):
        return {
            "delta": self.delta, "epsilon": self.epsilon, "signature": self.signature, "complex": self.complex,
            "scalars": self.scalars,
            "characters": self.characters, "polar_dims": self.polar_dims,
            "dim_V": self.dim_V, "sum_k_sk": self.sum_k_sk, "ordinary": self.ordinary,
            "last_nonzero_character": self.last_nonzero, "expected_dim_V": self.expected_dim_V,
            "equations_rank": self.equations_rank, "unknowns": self.unknowns,
            "relations": self.relations, "flag": self.flag,
            "printed_flag": {"characters": self.printed_characters, "ordinary": self.printed_ordinary},
            "checks": self.checks(),
        }


def polar_characters(model: TangentModel, flag=None):
    """(characters s_1..s_{4delta}, dims of the polar spaces H(E_0..E_{4delta}))."""
    flag = build_flag(model) if flag is None else flag
    total = model.real_dim + model.dim_W
    dims = [total]
    rows: List[List] = []
    chars = []
    for k in range(1, len(flag) + 1):
        for i in range(k - 1):
            rows.append(polar_row(model, flag[i], flag[k - 1]))
        frows = _to_field(rows, model, random.Random(len(rows))) if rows else []
        r = la.rank(frows) if frows else 0
        dims.append(total - r)
        chars.append(dims[-2] - dims[-1])
    return chars, dims


def integral_variety_dim(model: TangentModel) -> dict:
    """dim of {H1 : lambda_{H1} = 0} by direct nullspace over all basis triples."""
    basis = real_basis(model)
    R = model.real_dim
    rows = [lambda_row(model, basis[a], basis[b], basis[c]) for a, b, c in itertools.combinations(range(R), 3)]
    N = R * model.dim_W
    frows = _to_field(rows, model, random.Random(11))
    rk = la.rank(frows) if frows else 0
    return {"unknowns": N, "rank": rk, "dim": N - rk, "rows": rows}


def lambda_form(model: TangentModel, X, Y, Z) -> mpq:
    """lambda on tangent vectors X = (v, T): Im(x^T T_Y zbar + y^T T_Z xbar + z^T T_X ybar)."""
    (x, Tx), (y, Ty), (z, Tz) = X, Y, Z
    return imag_part(_bilinear(x, Ty, z) + _bilinear(y, Tz, x) + _bilinear(z, Tx, y))


def horizontal_is_integral(model: TangentModel, flag=None) -> bool:
    """lambda vanishes on C^{2delta} + {0}, and the polar rows agree with lambda_form."""
    flag = build_flag(model) if flag is None else flag
    m = 2 * model.delta
    zero = [[Gaussian(0)] * m for _ in range(m)]
    for a, b, c in itertools.combinations(flag, 3):
        if lambda_form(model, (a, zero), (b, zero), (c, zero)):
            return False
    nothing = [Gaussian(0)] * m
    for i, j in itertools.combinations(range(len(flag)), 2):
        direct = [lambda_form(model, (nothing, Ws), (flag[i], zero), (flag[j], zero)) for Ws in model.W]
        if direct != polar_row(model, flag[i], flag[j]):
            return False
    return True


# redundancy relations -----------------------------------------------------------------------

def _vec(model: TangentModel, idx: int, primed: bool, jpow: int):
    n = model.delta
    v = [Gaussian(0)] * (2 * n)
    v[idx + (n if primed else 0)] = [Gaussian(1), Gaussian(0, 1), Gaussian(-1), Gaussian(0, -1)][jpow % 4]
    return v


def redundancy_relations(model: TangentModel, rows_by_triple=None) -> dict:
    """Check the four relation types on every triple of {u_i, J u_i}.

    Each relation is a combination of the equations lambda(a, b, c) = 0 that
    vanishes identically in H1; independence is checked as a rank of the
    coefficient vectors over the canonical basis triples.
    """
    n = model.delta
    p = model.p if model.epsilon == -1 else n
    basis = real_basis(model)
    R = len(basis)
    triples = list(itertools.combinations(range(R), 3))
    tindex = {t: k for k, t in enumerate(triples)}
    nW = model.dim_W

    def locate(v):
        c = real_coords(v)
        for r in range(R):
            if c[r]:
                return r, (1 if c[r] > 0 else -1)
        raise CartanError("zero vector")

    def lam_vec(a, b, c):
        """lambda(a, b, c) as a vector over canonical triples."""
        (ra, sa), (rb, sb), (rc, sc) = locate(a), locate(b), locate(c)
        out = [mpq(0)] * len(triples)
        if len({ra, rb, rc}) < 3:
            return out
        perm = [ra, rb, rc]
        srt = sorted(perm)
        # parity of the sorting permutation
        inv = sum(1 for i in range(3) for j in range(i + 1, 3) if perm[i] > perm[j])
        sign = sa * sb * sc * (-1 if inv % 2 else 1)
        out[tindex[tuple(srt)]] = mpq(sign)
        return out

    def lam_row_direct(a, b, c):
        return lambda_row(model, a, b, c)

    def par(x):
        return 1 if x % 2 == 0 else -1

    chi = lambda i: 1 if i < p else 0
    base = [(i, a) for i in range(n) for a in (0, 1)]
    rels, rel_groups = [], {}
    all_hold = True
    for t in itertools.combinations(base, 3):
        (i, al), (j, be), (k, ga) = t
        e1, e2, e3 = par(ga - be), par(al - ga), par(be - al)
        if model.epsilon == -1:
            e1 *= par(chi(k) + chi(j))
            e2 *= par(chi(i) + chi(k))
            e3 *= par(chi(j) + chi(i))
        eps = model.epsilon
        u = lambda pr, J=0: _vec(model, i, pr, al + J)
        v = lambda pr, J=0: _vec(model, j, pr, be + J)
        w = lambda pr, J=0: _vec(model, k, pr, ga + J)
        forms = [
            [(e1, (u(1), v(0), w(0))), (e2, (u(0), v(1), w(0))), (e3, (u(0), v(0), w(1))), (eps, (u(1), v(1), w(1)))],
            [(e1, (u(1, 1), v(0), w(0))), (e2, (u(0), v(1, 1), w(0))), (e3, (u(0), v(0), w(1, 1))),
             (eps, (u(1, 1), v(1, 1), w(1, 1)))],
            [(e1, (u(0), v(1), w(1))), (e2, (u(1), v(0), w(1))), (e3, (u(1), v(1), w(0))), (eps, (u(0), v(0), w(0)))],
            [(e1, (u(0), v(1, 1), w(1, 1))), (e2, (u(1, 1), v(0), w(1, 1))), (e3, (u(1, 1), v(1, 1), w(0))),
             (eps, (u(0), v(0), w(0)))],
        ]
        for f in forms:
            coeff = [mpq(0)] * len(triples)
            ident = [mpq(0)] * (R * nW)
            for c, (a, b, cc) in f:
                coeff = [x + c * y for x, y in zip(coeff, lam_vec(a, b, cc))]
                ident = [x + c * y for x, y in zip(ident, lam_row_direct(a, b, cc))]
            holds = not any(ident)
            all_hold = all_hold and holds
            rels.append(coeff)
            rel_groups.setdefault(tuple(sorted((i, j, k))), []).append(coeff)
    expected = 4 * comb(2 * n, 3)
    rk = la.rank(rels) if rels else 0
    per = {str(list(kk)): (len(v), la.rank(v)) for kk, v in rel_groups.items()}
    return {
        "count": len(rels),
        "expected_count": expected,
        "all_hold": all_hold,
        "rank": rk,
        "independent": rk == len(rels) == expected,
        "per_index": per,
        "per_index_independent": all(a == b for a, b in per.values()),
    }


def _weighted(chars) -> int:
    return sum((k + 1) * c for k, c in enumerate(chars))


def cartan_test(model: TangentModel, seed: int = 0) -> FlagReport:
    """Characters along the printed flag; if that flag is not ordinary, along a generic one.

    The printed flag is ordinary at delta=1 but not at delta=2 (its characters jump late),
    so the ordinary-flag certificate then comes from a seeded generic horizontal flag.
    """
    n = model.delta
    iv = integral_variety_dim(model)
    rel = redundancy_relations(model)
    flag = build_flag(model)
    printed, dims = polar_characters(model, flag)
    printed_ok = _weighted(printed) == iv["dim"]
    chars, used = printed, "printed"
    if not printed_ok:
        for t in range(5):
            cand = generic_flag(model, seed + t)
            c, d = polar_characters(model, cand)
            if _weighted(c) == iv["dim"]:
                flag, chars, dims, used = cand, c, d, "generic(seed=%d)" % (seed + t)
                break
    s = _weighted(chars)
    last = None
    for k in range(len(chars), 0, -1):
        if chars[k - 1]:
            last = [k, chars[k - 1]]
            break
    return FlagReport(
        delta=n, epsilon=model.epsilon, signature=[model.p, model.q], complex=model.complex,
        characters=chars, polar_dims=dims, dim_V=iv["dim"], sum_k_sk=s, ordinary=(iv["dim"] == s),
        last_nonzero=last, expected_dim_V=2 * comb(2 * n + 2, 3), equations_rank=iv["rank"],
        unknowns=iv["unknowns"], horizontal_integral=horizontal_is_integral(model, flag), relations=rel,
        flag=used, printed_characters=printed, printed_ordinary=printed_ok)
