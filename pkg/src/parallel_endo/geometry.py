"""Levi-Civita connection, curvature and its covariant derivatives at 0.

Conventions: Gamma_i is the matrix (Gamma_i)[k][l] = Gamma^k_{il}, so that
D_{e_i} e_l = sum_k Gamma^k_{il} e_k, and the curvature endomorphism is
R(e_i, e_j) = d_i Gamma_j - d_j Gamma_i + [Gamma_i, Gamma_j].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from . import linalg as la
from .jets import Jet, JetError
from .scalars import Gaussian, I_UNIT, imag_part, real_part


class GermError(ValueError):
    """Invalid metric germ (asymmetric, singular at 0, malformed)."""


class OrderError(ValueError):
    """Truncation order too low for the requested derivative."""


JetMatrix = List[List[Jet]]


# jet-matrix helpers --------------------------------------------------------------

def jm_const(m: JetMatrix) -> la.Matrix:
    return [[x.constant_term() for x in r] for r in m]


def jm_truncate(m: JetMatrix, K: int) -> JetMatrix:
    return [[x.truncate(K) for x in r] for r in m]


def jm_mul(a: JetMatrix, b: JetMatrix, order: int) -> JetMatrix:
    n = len(a)
    m = len(b[0])
    inner = len(b)
    nv = a[0][0].n
    out = []
    bcols = [[b[k][j] for k in range(inner)] for j in range(m)]
    for i in range(n):
        row = []
        ai = [(k, x) for k, x in enumerate(a[i]) if x.terms]
        for j in range(m):
            acc = Jet.zero(nv, order)
            col = bcols[j]
            for k, x in ai:
                y = col[k]
                if y.terms:
                    acc = acc + x.mul_truncated(y, order)
            row.append(acc)
        out.append(row)
    return out


def jm_add(a: JetMatrix, b: JetMatrix) -> JetMatrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def jm_sub(a: JetMatrix, b: JetMatrix) -> JetMatrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def jm_is_zero(a: JetMatrix) -> bool:
    return all(x.is_zero() for r in a for x in r)


def jm_from_matrix(m: la.Matrix, n: int, K: int) -> JetMatrix:
    return [[Jet.constant(n, K, x) for x in r] for r in m]


def jm_scale_add(acc: JetMatrix, c: Jet, m: JetMatrix, order: int, sign: int = 1) -> None:
    """acc += sign * c * m in place (jets truncated at ``order``)."""
    if not c.terms:
        return
    for i, r in enumerate(m):
        ai = acc[i]
        for j, x in enumerate(r):
            if x.terms:
                p = c.mul_truncated(x, order)
                ai[j] = ai[j] + p if sign > 0 else ai[j] - p


# metric germ ---------------------------------------------------------------------

@dataclass
class MetricGerm:
    """Metric germ at 0 given by jets g_ij in d real variables.

    For kind == "complex" the germ is the real part of a holomorphic metric
    ``holomorphic`` (n x n jets in n complex variables, d = 2n); real
    coordinates are ordered (x_1..x_n, y_1..y_n) with z_k = x_k + i y_k and
    ``complex_structure`` is the self-adjoint J: dx_k -> dy_k.
    """

    d: int
    signature: Tuple[int, int]
    g: JetMatrix
    kind: str = "real"
    holomorphic: Optional[JetMatrix] = None
    complex_structure: Optional[la.Matrix] = None
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.g[0][0].K

    def g0(self) -> la.Matrix:
        return jm_const(self.g)

    def validate(self) -> "MetricGerm":
        d = self.d
        if len(self.g) != d or any(len(r) != d for r in self.g):
            raise GermError(f"metric matrix is not {d}x{d}")
        K = self.g[0][0].K
        for i in range(d):
            for j in range(d):
                e = self.g[i][j]
                if not isinstance(e, Jet):
                    raise GermError(f"g[{i}][{j}] is not a jet")
                if e.n != d or e.K != K:
                    raise GermError(f"g[{i}][{j}] has (n={e.n}, K={e.K}), expected (n={d}, K={K})")
                if e.is_complex():
                    raise GermError(f"g[{i}][{j}] has non-real coefficients")
                if e != self.g[j][i]:
                    raise GermError(f"g is not symmetric at ({i},{j})")
        g0 = self.g0()
        if la.det(g0) == 0:
            raise GermError("invalid germ: g(0) is singular")
        p, q, _ = la.signature(g0)
        if (p, q) != tuple(self.signature):
            raise GermError(f"invalid germ: g(0) has signature {(p, q)}, declared {tuple(self.signature)}")
        if self.kind not in ("real", "complex"):
            raise GermError(f"unknown coordinate kind {self.kind!r}")
        if self.kind == "complex":
            check_cauchy_riemann(self)
        return self

    # serialization
    def to_json(self) -> dict:
        if self.kind == "complex":
            gm = self.holomorphic
        else:
            gm = self.g
        return {
            "d": self.d,
            "signature": list(self.signature),
            "kind": self.kind,
            "g": [[x.to_json() for x in r] for r in gm],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MetricGerm":
        try:
            d = obj["d"]
            sig = tuple(obj["signature"])
            kind = obj.get("kind", "real")
            rows = obj["g"]
        except (KeyError, TypeError) as exc:
            raise GermError(f"malformed germ: missing field {exc}") from None
        try:
            gm = [[Jet.from_json(x) for x in r] for r in rows]
        except (JetError, ValueError, TypeError) as exc:
            raise GermError(f"malformed germ: {exc}") from None
        if kind == "complex":
            if d % 2:
                raise GermError("complex germ needs even real dimension")
            return germ_from_holomorphic(gm, sig).validate()
        if len(sig) != 2:
            raise GermError("signature must be [p, q]")
        return cls(d=d, signature=sig, g=gm, kind=kind).validate()


def realify_jet(f: Jet, n: int) -> Tuple[Jet, Jet]:
    """Real and imaginary parts of f(x + i y) as real jets in 2n variables."""
    K = f.K
    xs = [Jet.variable(2 * n, K, k) for k in range(n)]
    ys = [Jet.variable(2 * n, K, n + k) for k in range(n)]
    # powers of z_k = x_k + i y_k, split into (re, im)
    re_tot = Jet.zero(2 * n, K)
    im_tot = Jet.zero(2 * n, K)
    pow_cache: Dict[Tuple[int, int], Tuple[Jet, Jet]] = {}

    def zpow(k, e):
        key = (k, e)
        if key in pow_cache:
            return pow_cache[key]
        if e == 0:
            r = (Jet.one(2 * n, K), Jet.zero(2 * n, K))
        else:
            a, b = zpow(k, e - 1)
            # (a + ib)(x + iy) = (ax - by) + i(ay + bx)
            r = (a * xs[k] - b * ys[k], a * ys[k] + b * xs[k])
        pow_cache[key] = r
        return r

    for exps, c in f.items():
        a, b = Jet.one(2 * n, K), Jet.zero(2 * n, K)
        for k, e in enumerate(exps):
            if e:
                pr, pi = zpow(k, e)
                a, b = a * pr - b * pi, a * pi + b * pr
        cr, ci = real_part(c), imag_part(c)
        re_tot = re_tot + a * cr - b * ci
        im_tot = im_tot + a * ci + b * cr
    return re_tot, im_tot


def germ_from_holomorphic(G: JetMatrix, signature=None, meta=None) -> MetricGerm:
    """Real germ Re(G) in 2n real variables from a holomorphic metric G."""
    n = len(G)
    d = 2 * n
    A = [[None] * n for _ in range(n)]
    B = [[None] * n for _ in range(n)]
    for k in range(n):
        for l in range(k, n):
            a, b = realify_jet(G[k][l], n)
            A[k][l] = A[l][k] = a
            B[k][l] = B[l][k] = b
    g = [[None] * d for _ in range(d)]
    for k in range(n):
        for l in range(n):
            g[k][l] = A[k][l]
            g[n + k][n + l] = -A[k][l]
            g[k][n + l] = -B[k][l]
            g[n + k][l] = -B[k][l]
    sig = (n, n) if signature is None else tuple(signature)
    return MetricGerm(d=d, signature=sig, g=g, kind="complex", holomorphic=G,
                      complex_structure=la.J_std(n), meta=dict(meta or {}))


def check_cauchy_riemann(germ: MetricGerm) -> None:
    """d/dy_j G_kl = i d/dx_j G_kl for the complexified metric g - i g(., J.)."""
    n = germ.d // 2
    K = germ.K
    if K == 0:
        return
    # g_C(e_k, e_l) on the x-basis: g(x_k, x_l) - i g(x_k, J x_l) = A + iB
    for k in range(n):
        for l in range(n):
            re = germ.g[k][l]
            im = -germ.g[k][n + l]
            for j in range(n):
                # d_y (re + i im) == i d_x (re + i im)  <=>  d_y re = -d_x im, d_y im = d_x re
                if re.partial(n + j) != -im.partial(j) or im.partial(n + j) != re.partial(j):
                    raise GermError(f"Cauchy-Riemann relation fails for entry ({k},{l}) in variable {j}")


# connection ------------------------------------------------------------------------

def inverse_metric(germ: MetricGerm, order: Optional[int] = None) -> JetMatrix:
    """g^{-1} as jets of the given order via the Neumann series around g(0)."""
    d = germ.d
    K = germ.K if order is None else order
    g = jm_truncate(germ.g, K)
    g0 = germ.g0()
    g0inv = la.inverse(g0)
    g0inv_j = jm_from_matrix(g0inv, d, K)
    P = [[g[i][j] - Jet.constant(d, K, g0[i][j]) for j in range(d)] for i in range(d)]
    M = jm_mul(g0inv_j, P, K)  # nilpotent part
    M = [[-x for x in r] for r in M]
    out = jm_from_matrix(la.identity(d), d, K)
    power = jm_from_matrix(la.identity(d), d, K)
    for _ in range(K):
        power = jm_mul(power, M, K)
        if jm_is_zero(power):
            break
        out = jm_add(out, power)
    return jm_mul(out, g0inv_j, K)


def christoffel(germ: MetricGerm) -> List[List[List[Jet]]]:
    """Gamma[k][i][j] = Gamma^k_{ij} as jets of order K-1."""
    d = germ.d
    K = germ.K
    if K < 1:
        raise OrderError("christoffel symbols need K >= 1; raise K to at least 1")
    o = K - 1
    ginv = inverse_metric(germ, o)
    dg = [[[germ.g[i][j].partial(l) for j in range(d)] for i in range(d)] for l in range(d)]
    # lowered symbols Gamma_{l,ij}
    low = [[[None] * d for _ in range(d)] for _ in range(d)]
    half = mpq(1, 2)
    for l in range(d):
        for i in range(d):
            for j in range(i, d):
                v = (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]) * half
                low[l][i][j] = low[l][j][i] = v
    gam = [[[None] * d for _ in range(d)] for _ in range(d)]
    for k in range(d):
        row = [(l, x) for l, x in enumerate(ginv[k]) if x.terms]
        for i in range(d):
            for j in range(i, d):
                acc = Jet.zero(d, o)
                for l, x in row:
                    y = low[l][i][j]
                    if y.terms:
                        acc = acc + x.mul_truncated(y, o)
                gam[k][i][j] = gam[k][j][i] = acc
    return gam


def connection_matrices(gam) -> List[JetMatrix]:
    """Gamma_i as d x d jet matrices: (Gamma_i)[k][l] = Gamma^k_{il}."""
    d = len(gam)
    return [[[gam[k][i][l] for l in range(d)] for k in range(d)] for i in range(d)]


# curvature --------------------------------------------------------------------------

@dataclass
class CurvatureAtOrigin:
    """R(e_i, e_j) at 0 and the covariant derivatives (D^k R) at 0.

    ``derivs[k]`` maps (i, j, u_1, ..., u_k) with i < j to the endomorphism
    (D_{u_k} ... D_{u_1} R)(e_i, e_j) at 0; derivs[0] holds R itself.
    """

    d: int
    max_deriv: int
    derivs: List[Dict[tuple, la.Matrix]]
    K: int

    def R(self, i: int, j: int) -> la.Matrix:
        if i == j:
            return la.zeros(self.d)
        if i < j:
            return self.derivs[0][(i, j)]
        return la.neg(self.derivs[0][(j, i)])

    def R_vec(self, x, y) -> la.Matrix:
        """R(x, y) for coordinate vectors x, y."""
        d = self.d
        out = la.zeros(d)
        for i in range(d):
            if not x[i]:
                continue
            for j in range(d):
                if y[j] and i != j:
                    out = la.add(out, la.scale(x[i] * y[j], self.R(i, j)))
        return out

    def all_generators(self, upto: Optional[int] = None):
        """Yield (order, key, matrix) for all stored components."""
        top = self.max_deriv if upto is None else min(upto, self.max_deriv)
        for k in range(top + 1):
            for key in sorted(self.derivs[k]):
                yield k, key, self.derivs[k][key]


def _get_form(T: Dict[tuple, JetMatrix], i, j, rest, d, order, nv):
    if i == j:
        return None, 1
    if i < j:
        return T.get((i, j) + rest), 1
    return T.get((j, i) + rest), -1


def curvature_jets(germ: MetricGerm, max_deriv: int = 0, gam=None):
    """Jets of D^k R for k <= max_deriv; returns (list of dicts, Gamma matrices)."""
    d = germ.d
    K = germ.K
    if K < max_deriv + 2:
        raise OrderError(
            f"curvature with {max_deriv} covariant derivatives needs K >= {max_deriv + 2}; "
            f"raise K to at least {max_deriv + 2} (germ has K={K})")
    if gam is None:
        gam = christoffel(germ)
    G = connection_matrices(gam)
    o = K - 2
    # R_ij = d_i G_j - d_j G_i + [G_i, G_j]
    Gt = [jm_truncate(Gi, o) for Gi in G]
    dG = [[[[x.partial(i) for x in r] for r in G[j]] for j in range(d)] for i in range(d)]
    R: Dict[tuple, JetMatrix] = {}
    for i in range(d):
        for j in range(i + 1, d):
            m = jm_sub(dG[i][j], dG[j][i])
            m = jm_add(m, jm_sub(jm_mul(Gt[i], Gt[j], o), jm_mul(Gt[j], Gt[i], o)))
            R[(i, j)] = m
    levels = [R]
    T = R
    for k in range(1, max_deriv + 1):
        o = K - 2 - k
        Gk = [jm_truncate(Gi, o) for Gi in G]
        Tn: Dict[tuple, JetMatrix] = {}
        Tt = {key: jm_truncate(m, o) for key, m in T.items()}
        nonzero_T = {key: m for key, m in Tt.items() if not jm_is_zero(m)}
        for key, m in T.items():
            i, j, rest = key[0], key[1], key[2:]
            for u in range(d):
                acc = [[x.partial(u) for x in r] for r in m]
                Gu = Gk[u]
                # End part: + [Gamma_u, T]
                tm = Tt[key]
                if key in nonzero_T and not jm_is_zero(Gu):
                    acc = jm_add(acc, jm_sub(jm_mul(Gu, tm, o), jm_mul(tm, Gu, o)))
                # form slots: - T(Gamma_u e_i, e_j) - T(e_i, Gamma_u e_j)
                for slot in (0, 1):
                    idx = i if slot == 0 else j
                    for mm in range(d):
                        c = Gu[mm][idx]
                        if not c.terms:
                            continue
                        if slot == 0:
                            comp, sgn = _get_form(Tt, mm, j, rest, d, o, d)
                        else:
                            comp, sgn = _get_form(Tt, i, mm, rest, d, o, d)
                        if comp is None:
                            continue
                        jm_scale_add(acc, c, comp, o, -sgn)
                # derivative slots
                for s, us in enumerate(rest):
                    for mm in range(d):
                        c = Gu[mm][us]
                        if not c.terms:
                            continue
                        nrest = rest[:s] + (mm,) + rest[s + 1:]
                        comp = Tt.get((i, j) + nrest)
                        if comp is None:
                            continue
                        jm_scale_add(acc, c, comp, o, -1)
                Tn[key + (u,)] = acc
        levels.append(Tn)
        T = Tn
    return levels, G


def curvature(germ: MetricGerm, max_deriv: int = 0) -> CurvatureAtOrigin:
    levels, _ = curvature_jets(germ, max_deriv)
    derivs = [{key: jm_const(m) for key, m in lvl.items()} for lvl in levels]
    return CurvatureAtOrigin(d=germ.d, max_deriv=max_deriv, derivs=derivs, K=germ.K)


def ricci_from_curvature(curv: CurvatureAtOrigin) -> la.Matrix:
    """ric_ij = tr(v -> R(e_i, v) e_j)."""
    d = curv.d
    ric = la.zeros(d)
    for i in range(d):
        for j in range(d):
            s = mpq(0)
            for m in range(d):
                if m != i:
                    s = s + curv.R(i, m)[m][j]
            ric[i][j] = s
    return ric


def ricci(germ: MetricGerm, curv: Optional[CurvatureAtOrigin] = None) -> la.Matrix:
    if germ.K < 2:
        raise OrderError("ricci needs K >= 2; raise K to at least 2")
    if curv is None:
        curv = curvature(germ, 0)
    return ricci_from_curvature(curv)


def ricci_jets(germ: MetricGerm, levels=None) -> JetMatrix:
    """Ricci tensor as jets of order K-2 (for covariant-derivative checks)."""
    if levels is None:
        levels, _ = curvature_jets(germ, 0)
    R = levels[0]
    d = germ.d
    o = germ.K - 2
    out = [[Jet.zero(d, o) for _ in range(d)] for _ in range(d)]
    for i in range(d):
        for j in range(d):
            acc = Jet.zero(d, o)
            for m in range(d):
                if m == i:
                    continue
                if i < m:
                    acc = acc + R[(i, m)][m][j]
                else:
                    acc = acc - R[(m, i)][m][j]
            out[i][j] = acc
    return out


def covariant_derivative_of_bilinear(B: JetMatrix, G: List[JetMatrix]) -> List[JetMatrix]:
    """(D_u B)(e_i, e_j) = d_u B_ij - B(Gamma_u e_i, e_j) - B(e_i, Gamma_u e_j)."""
    d = len(B)
    o = B[0][0].K - 1
    out = []
    Bt = jm_truncate(B, o)
    for u in range(d):
        Gu = jm_truncate(G[u], o)
        m = [[B[i][j].partial(u) for j in range(d)] for i in range(d)]
        # B(Gamma_u e_i, e_j) = sum_k Gamma^k_{ui} B_kj  -> (Gu^T B)_{ij}
        GuT = [list(col) for col in zip(*Gu)]
        m = jm_sub(m, jm_mul(GuT, Bt, o))
        m = jm_sub(m, jm_mul(Bt, Gu, o))
        out.append(m)
    return out


def parallel_defect(germ: MetricGerm, U, gam=None) -> Tuple[bool, int]:
    """Check D U = 0 for an endomorphism field U (constant matrix or jet matrix).

    Returns (ok, order): ok is True when d_i U + [Gamma_i, U] vanishes as jets
    of order ``order`` = K - 1 for every i.
    """
    d = germ.d
    K = germ.K
    o = K - 1
    if gam is None:
        gam = christoffel(germ)
    G = connection_matrices(gam)
    if U and isinstance(U[0][0], Jet):
        Uj = U
        dU = lambda i: [[x.partial(i) for x in r] for r in Uj]
        Ut = jm_truncate(Uj, o) if Uj[0][0].K >= o else None
        if Ut is None:
            raise OrderError("endomorphism jets shorter than the connection order")
    else:
        Ut = jm_from_matrix(U, d, o)
        dU = lambda i: [[Jet.zero(d, o) for _ in range(d)] for _ in range(d)]
    for i in range(d):
        m = jm_add(dU(i), jm_sub(jm_mul(G[i], Ut, o), jm_mul(Ut, G[i], o)))
        if not jm_is_zero(m):
            return False, o
    return True, o


# holomorphic oracle -------------------------------------------------------------------

def holomorphic_ricci(G: JetMatrix) -> la.Matrix:
    """Ricci of a holomorphic metric computed in complex coordinates.

    Same formulas as the real case, run over Gaussian jets in the complex
    variables; used as an independent check of the real computation.
    """
    n = len(G)
    germ = MetricGerm(d=n, signature=(0, 0), g=G, kind="real")
    curv = curvature(germ, 0)
    return ricci_from_curvature(curv)


def complex_bilinear_from_real(B: la.Matrix, n: int) -> la.Matrix:
    """B_C(x_k, x_l) = B(x_k, x_l) - i B(x_k, J x_l) on the holomorphic basis."""
    out = la.zeros(n)
    for k in range(n):
        for l in range(n):
            # J x_l = y_l
            out[k][l] = Gaussian(B[k][l], -B[k][n + l])
    return out
