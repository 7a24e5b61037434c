"""Metric germs realizing each type, normal-form frames and the H+H control."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from gmpy2 import mpq

from . import linalg as la
from .geometry import (GermError, JetMatrix, MetricGerm, germ_from_holomorphic, parallel_defect,
                       realify_jet)
from .jets import Jet, code_degree, decode_exponents, encode_exponents
from .scalars import Gaussian

LABEL_ALIASES = {
    "1": "(1)", "(1)": "(1)",
    "1C": "(1C)", "(1C)": "(1C)", "1c": "(1C)",
    "2": "(2)", "(2)": "(2)",
    "2'": "(2')", "(2')": "(2')", "2p": "(2')",
    "2C": "(2C)", "(2C)": "(2C)", "2c": "(2C)",
    "3": "(3)", "(3)": "(3)",
    "3'": "(3')", "(3')": "(3')", "3p": "(3')",
    "3C": "(3C)", "(3C)": "(3C)", "3c": "(3C)",
}

# allowed signatures as (dimension divisor, description)
SIGNATURE_RULES = {
    "(1)": "any value",
    "(1C)": "(p,p) with p >= 1",
    "(2)": "(2p,2q)",
    "(2')": "(p,p) with p >= 1",
    "(2C)": "(2p,2p) with p >= 1",
    "(3)": "(4p,4q)",
    "(3')": "(2p,2p) with p >= 1, d divisible by 4",
    "(3C)": "(4p,4p) with p >= 1, d divisible by 8",
}


class UsageError(ValueError):
    pass


def normalize_label(label: str) -> str:
    try:
        return LABEL_ALIASES[label.strip()]
    except KeyError:
        raise UsageError(f"unknown type label {label!r}") from None


def check_signature(label: str, p: int, q: int) -> None:
    """Raise UsageError unless sign(g) = (p, q) is allowed for ``label``."""
    d = p + q
    ok = {
        "(1)": d >= 1,
        "(1C)": p == q and p >= 1,
        "(2)": p % 2 == 0 and q % 2 == 0 and d >= 2,
        "(2')": p == q and p >= 1,
        "(2C)": p == q and p % 2 == 0 and p >= 2,
        "(3)": p % 4 == 0 and q % 4 == 0 and d >= 4,
        "(3')": p == q and p % 2 == 0 and p >= 2,
        "(3C)": p == q and p % 4 == 0 and p >= 4,
    }[label]
    if not ok:
        raise UsageError(f"signature ({p},{q}) not allowed for type {label}: sign(g) must be {SIGNATURE_RULES[label]}")


@dataclass
class GeneratedGerm:
    germ: MetricGerm
    label: str
    seed: Optional[int]
    params: dict = field(default_factory=dict)
    witnesses: Dict[str, object] = field(default_factory=dict)
    certified_order: Optional[int] = None

    def to_json(self) -> dict:
        out = self.germ.to_json()
        out["expected_label"] = self.label
        out["seed"] = self.seed
        out["params"] = self.params
        if self.certified_order is not None:
            out["parallel_certified_to_order"] = self.certified_order
        return out


# random polynomials ------------------------------------------------------------------

def _rand_coeff(rng: random.Random, lo=-2, hi=2, gaussian=False):
    if gaussian:
        return Gaussian(rng.randint(lo, hi), rng.randint(lo, hi))
    return mpq(rng.randint(lo, hi))


def monomials(n: int, deg: int):
    """Exponent tuples of total degree ``deg`` in n variables (fixed order)."""
    if n == 0:
        if deg == 0:
            yield ()
        return
    for e in range(deg, -1, -1):
        for rest in monomials(n - 1, deg - e):
            yield (e,) + rest


def random_homogeneous(n: int, K: int, deg: int, rng: random.Random, gaussian=False, density=1.0) -> Jet:
    terms = {}
    for exps in monomials(n, deg):
        if density < 1 and rng.random() > density:
            continue
        c = _rand_coeff(rng, gaussian=gaussian)
        if c:
            terms[exps] = c
    return Jet.from_dict(n, K, terms)


def _quadratic_form_jet(n: int, K: int, M, var_offset: int = 0, nvars: Optional[int] = None) -> Jet:
    """sum_ab M[a][b] x_a x_b as a jet."""
    nv = n if nvars is None else nvars
    terms = {}
    for a in range(n):
        for b in range(n):
            c = M[a][b]
            if not c:
                continue
            e = [0] * nv
            e[var_offset + a] += 1
            e[var_offset + b] += 1
            terms[tuple(e)] = terms.get(tuple(e), 0) + c
    return Jet.from_dict(nv, K, terms)


def random_curvature_tensor(n: int, rng: random.Random, terms: int = 3, gaussian=False):
    """Algebraic curvature tensor R[i][a][j][b] as a sum of Kulkarni-Nomizu products."""
    R = [[[[0] * n for _ in range(n)] for _ in range(n)] for _ in range(n)]

    def sym():
        m = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                m[i][j] = m[j][i] = _rand_coeff(rng, gaussian=gaussian)
        return m

    for _ in range(terms):
        h, k = sym(), sym()
        for i, a, j, b in itertools.product(range(n), repeat=4):
            R[i][a][j][b] = R[i][a][j][b] + (h[i][j] * k[a][b] + h[a][b] * k[i][j]
                                             - h[i][b] * k[a][j] - h[a][j] * k[i][b])
    return R


def _normal_coordinate_metric(eta, R, K: int, gaussian=False) -> JetMatrix:
    """g_ij = eta_ij - (1/3) sum R[i][a][j][b] x_a x_b."""
    n = len(eta)
    third = mpq(1, 3)
    g = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            M = [[-(R[i][a][j][b] + R[j][a][i][b]) * third / 2 for b in range(n)] for a in range(n)]
            f = _quadratic_form_jet(n, K, M) + Jet.constant(n, K, eta[i][j])
            g[i][j] = g[j][i] = f
    return g


# type (1) ------------------------------------------------------------------------------

def germ_type1(d: int, p: Optional[int] = None, q: Optional[int] = None, seed: int = 0, K: int = 4,
               zero: bool = False) -> GeneratedGerm:
    """eta - (1/3) R(x, ., x, .) with a random algebraic curvature tensor R."""
    if p is None:
        p, q = d, 0
    if q is None:
        q = d - p
    if p + q != d:
        raise UsageError(f"signature ({p},{q}) does not add up to d={d}")
    rng = random.Random(seed)
    eta = la.I_pq(p, q)
    if zero:
        g = [[Jet.constant(d, K, eta[i][j]) for j in range(d)] for i in range(d)]
    else:
        g = _normal_coordinate_metric(eta, random_curvature_tensor(d, rng), K)
    germ = MetricGerm(d=d, signature=(p, q), g=g, kind="real", meta={"generator": "type1"}).validate()
    return GeneratedGerm(germ=germ, label="(1)", seed=seed, params={"d": d, "signature": [p, q], "K": K})


# Kaehler and para-Kaehler potentials ------------------------------------------------------

def _second(u: Jet, a: int, b: int) -> Jet:
    return u.partial(a).partial(b)


def kaehler_metric_from_potential(u: Jet, n: int, K: int) -> JetMatrix:
    """Real metric [[S, W], [-W, S]] with S = u_xx + u_yy, W = u_xy - u_yx.

    Here u is a real potential in (x_1..x_n, y_1..y_n); 4 g(d_z, d_zbar) = S + iW,
    and the common factor is dropped.
    """
    S = [[_second(u, a, b) + _second(u, n + a, n + b) for b in range(n)] for a in range(n)]
    W = [[_second(u, a, n + b) - _second(u, n + a, b) for b in range(n)] for a in range(n)]
    d = 2 * n
    g = [[None] * d for _ in range(d)]
    for a in range(n):
        for b in range(n):
            g[a][b] = S[a][b].extend(K)
            g[n + a][n + b] = S[a][b].extend(K)
            g[a][n + b] = W[a][b].extend(K)
            g[n + a][b] = (-W[a][b]).extend(K)
    return g


def _kaehler_base_potential(n: int, K: int, signs, gaussian=False) -> Jet:
    """sum_a s_a (x_a^2 + y_a^2) / 4, giving S(0) = diag(s)."""
    terms = {}
    for a, s in enumerate(signs):
        for v in (a, n + a):
            e = [0] * (2 * n)
            e[v] = 2
            terms[tuple(e)] = mpq(s, 4) if not gaussian else Gaussian(mpq(s, 4))
    return Jet.from_dict(2 * n, K, terms)


def germ_kaehler(p: int, q: int, seed: int = 0, K: int = 4, potential: Optional[Jet] = None,
                 flat: bool = False) -> GeneratedGerm:
    """Kaehler germ of complex dimension p + q from a (random quartic) potential."""
    n = p + q
    if n < 1:
        raise UsageError("Kaehler germ needs p + q >= 1")
    rng = random.Random(seed)
    Ku = K + 2
    if potential is None:
        u = _kaehler_base_potential(n, Ku, [1] * p + [-1] * q)
        if not flat:
            u = u + random_homogeneous(2 * n, Ku, 4, rng)
    else:
        u = potential.extend(Ku) if potential.K < Ku else potential
    g = kaehler_metric_from_potential(u, n, K)
    germ = MetricGerm(d=2 * n, signature=(2 * p, 2 * q), g=g, kind="real", meta={"generator": "kaehler"})
    try:
        germ.validate()
    except GermError as exc:
        raise GermError(f"invalid potential: {exc}") from None
    J = la.J_std(n)
    ok, order = parallel_defect(germ, J)
    if not ok:
        raise GermError("Kaehler witness J is not parallel (internal error)")
    return GeneratedGerm(germ=germ, label="(2)", seed=seed, params={"signature": [2 * p, 2 * q], "K": K},
                         witnesses={"J": J}, certified_order=order)


def germ_parakaehler(n: int, seed: int = 0, K: int = 4, potential: Optional[Jet] = None,
                     flat: bool = False) -> GeneratedGerm:
    """g(d x_a, d y_b) = u_{x_a y_b}, null x- and y-planes; L = +-1 on them."""
    if n < 1:
        raise UsageError("paraKaehler germ needs n >= 1")
    rng = random.Random(seed)
    Ku = K + 2
    d = 2 * n
    if potential is None:
        u = Jet.from_dict(d, Ku, {tuple(1 if v in (a, n + a) else 0 for v in range(d)): 1 for a in range(n)})
        if not flat:
            u = u + random_homogeneous(d, Ku, 4, rng)
    else:
        u = potential.extend(Ku) if potential.K < Ku else potential
    g = [[Jet.zero(d, K) for _ in range(d)] for _ in range(d)]
    for a in range(n):
        for b in range(n):
            m = _second(u, a, n + b).extend(K)
            g[a][n + b] = m
            g[n + b][a] = m
    germ = MetricGerm(d=d, signature=(n, n), g=g, kind="real", meta={"generator": "parakaehler"})
    try:
        germ.validate()
    except GermError as exc:
        raise GermError(f"invalid potential (degenerate mixed Hessian?): {exc}") from None
    L = la.block_diag(la.identity(n), la.neg(la.identity(n)))
    ok, order = parallel_defect(germ, L)
    if not ok:
        raise GermError("paraKaehler witness L is not parallel (internal error)")
    return GeneratedGerm(germ=germ, label="(2')", seed=seed, params={"n": n, "K": K},
                         witnesses={"L": L}, certified_order=order)


# complexified types ------------------------------------------------------------------------

def realify_jet_matrix(M: JetMatrix, n: int) -> JetMatrix:
    """Real (2n x 2n) jet matrix of a complex-linear holomorphic matrix field."""
    m = len(M)
    P = [[None] * m for _ in range(m)]
    Q = [[None] * m for _ in range(m)]
    for a in range(m):
        for b in range(m):
            P[a][b], Q[a][b] = realify_jet(M[a][b], n)
    return [[P[a][b] for b in range(m)] + [-Q[a][b] for b in range(m)] for a in range(m)] + \
           [[Q[a][b] for b in range(m)] + [P[a][b] for b in range(m)] for a in range(m)]


def germ_complex_riemannian(n: int, seed: int = 0, K: int = 4, flat: bool = False) -> GeneratedGerm:
    """Real part of a generic holomorphic Riemannian metric in n complex variables (type (1C))."""
    rng = random.Random(seed)
    eta = la.identity(n)
    if flat:
        G = [[Jet.constant(n, K, Gaussian(eta[i][j])) for j in range(n)] for i in range(n)]
    else:
        R = random_curvature_tensor(n, rng, gaussian=True)
        G = _normal_coordinate_metric([[Gaussian(x) for x in r] for r in eta], R, K)
    germ = germ_from_holomorphic(G, (n, n), {"generator": "complex_riemannian"}).validate()
    return GeneratedGerm(germ=germ, label="(1C)", seed=seed, params={"n": n, "K": K},
                         witnesses={"Jbar": germ.complex_structure})


def germ_complexified_kaehler(n: int, seed: int = 0, K: int = 4, flat: bool = False) -> GeneratedGerm:
    """Complexification of a Kaehler potential in 2n holomorphic variables (type (2C)).

    The holomorphic metric [[S, W], [-W, S]] lives in complex dimension 2n; the
    real germ has d = 4n.
    """
    rng = random.Random(seed)
    Ku = K + 2
    u = _kaehler_base_potential(n, Ku, [1] * n, gaussian=True)
    if not flat:
        u = u + random_homogeneous(2 * n, Ku, 4, rng, gaussian=True)
    G = kaehler_metric_from_potential(u, n, K)
    germ = germ_from_holomorphic(G, (2 * n, 2 * n), {"generator": "complexified_kaehler"}).validate()
    Jhol = la.J_std(n)
    J = la.block_diag(Jhol, Jhol)
    ok, order = parallel_defect(germ, J)
    if not ok:
        raise GermError("complexified Kaehler witness J is not parallel (internal error)")
    return GeneratedGerm(germ=germ, label="(2C)", seed=seed, params={"n": n, "K": K},
                         witnesses={"Jbar": germ.complex_structure, "J": J}, certified_order=order)


# omega_H germs ---------------------------------------------------------------------------------

@dataclass
class OmegaHSpec:
    delta: int = 1
    epsilon: int = -1
    p: Optional[int] = None
    q: int = 0
    complex: bool = False
    jet_order: int = 3
    seed: int = 0
    zero: bool = False

    def base_point(self) -> la.Matrix:
        """H0 = diag(I_pq, I_pq) for epsilon = -1, diag(I, -I) for epsilon = +1."""
        dl = self.delta
        if self.epsilon == -1:
            p = dl if self.p is None else self.p
            D = la.I_pq(p, dl - p)
            return la.block_diag(D, D)
        return la.I_pq(dl, dl)


def _omega0(delta: int) -> la.Matrix:
    return la.J_std(delta)


def _hessian_blocks(phi: Jet, m: int, order: int):
    """A = phi_xx + phi_yy, B = phi_xy - phi_yx on the (x, y) split of 2m variables."""
    A = [[(_second(phi, a, b) + _second(phi, m + a, m + b)).truncate(order) for b in range(m)] for a in range(m)]
    B = [[(_second(phi, a, m + b) - _second(phi, m + a, b)).truncate(order) for b in range(m)] for a in range(m)]
    return A, B


def _const_jm(M, nv, K):
    return [[Jet.constant(nv, K, x) for x in r] for r in M]


def _jm_mul_full(a, b, K):
    from .geometry import jm_mul
    return jm_mul(a, b, K)


def _constraint_residual(A, B, O, eps, K, nv):
    """(A O A + B O B + eps O, A O B - B O A) as jet matrices."""
    from .geometry import jm_add, jm_sub
    Oj = _const_jm(O, nv, K)
    AO = _jm_mul_full(A, Oj, K)
    BO = _jm_mul_full(B, Oj, K)
    r1 = jm_add(jm_add(_jm_mul_full(AO, A, K), _jm_mul_full(BO, B, K)), _const_jm(la.scale(eps, O), nv, K))
    r2 = jm_sub(_jm_mul_full(AO, B, K), _jm_mul_full(BO, A, K))
    return r1, r2


def solve_omega_h(spec: OmegaHSpec):
    """Potential phi with H = A + iB satisfying conj(H) O0 H = -eps O0 to degree jet_order.

    Returns (A, B, phi, per-degree kernel dimensions). Unknowns at degree m are
    the coefficients of phi of degree m + 2; the constraint at degree m is
    linear in them once lower degrees are fixed.
    """
    dl = spec.delta
    m = 2 * dl
    nv = 2 * m
    N = spec.jet_order
    Kp = N + 2
    eps = spec.epsilon
    O = _omega0(dl)
    H0 = spec.base_point()
    gauss = spec.complex
    rng = random.Random(spec.seed)
    one = (lambda x: Gaussian(x)) if gauss else (lambda x: mpq(x))
    # phi_2 = (1/4) sum H0_ab (x_a x_b + y_a y_b)
    terms = {}
    for a in range(m):
        for b in range(m):
            if H0[a][b]:
                for off in (0, m):
                    e = [0] * nv
                    e[off + a] += 1
                    e[off + b] += 1
                    terms[tuple(e)] = terms.get(tuple(e), 0) + one(mpq(H0[a][b], 4))
    phi = Jet.from_dict(nv, Kp, terms)
    kernels = []
    for deg in range(1, N + 1):
        mons = list(monomials(nv, deg + 2))
        # residual from lower degrees, evaluated at degree deg
        A, B = _hessian_blocks(phi, m, deg)
        r1, r2 = _constraint_residual(A, B, O, eps, deg, nv)
        # linear part: contributions of each monomial of phi
        cols = []
        for mon in mons:
            mj = Jet.from_dict(nv, Kp, {mon: 1})
            Am, Bm = _hessian_blocks(mj, m, deg)
            H0j = _const_jm(H0, nv, deg)
            Oj = _const_jm(O, nv, deg)
            # linearization at (H0, 0): H0 O Am + Am O H0 ; H0 O Bm - Bm O H0
            l1 = _lin(H0j, Oj, Am, deg, +1)
            l2 = _lin(H0j, Oj, Bm, deg, -1)
            cols.append(_vectorize(l1, l2, deg, nv))
        rhs = _vectorize(r1, r2, deg, nv)
        rows = [[cols[c][r] for c in range(len(mons))] for r in range(len(rhs))]
        neg_rhs = [-x for x in rhs]
        sol = la.solve(rows, neg_rhs) if rows else [mpq(0)] * len(mons)
        if sol is None:
            raise GermError(f"omega_H constraint has no solution at degree {deg}")
        ker = la.nullspace(rows, len(mons)) if rows else [[mpq(1) if i == j else mpq(0) for i in range(len(mons))]
                                                         for j in range(len(mons))]
        kernels.append(len(ker))
        coeffs = list(sol)
        if not spec.zero:
            for kv in ker:
                c = _rand_coeff(rng, -1, 1, gaussian=gauss)
                if c:
                    coeffs = [x + c * y for x, y in zip(coeffs, kv)]
        add = {mon: c for mon, c in zip(mons, coeffs) if c}
        if add:
            phi = phi + Jet.from_dict(nv, Kp, add)
    A, B = _hessian_blocks(phi, m, N)
    r1, r2 = _constraint_residual(A, B, O, eps, N, nv)
    from .geometry import jm_is_zero
    if not (jm_is_zero(r1) and jm_is_zero(r2)):
        raise GermError("omega_H constraint residual is nonzero after solving (internal error)")
    return A, B, phi, kernels


def _lin(H0j, Oj, X, K, sign):
    from .geometry import jm_add, jm_sub
    a = _jm_mul_full(_jm_mul_full(H0j, Oj, K), X, K)
    b = _jm_mul_full(_jm_mul_full(X, Oj, K), H0j, K)
    return jm_add(a, b) if sign > 0 else jm_sub(a, b)


def _vectorize(l1, l2, deg, nv):
    """Coefficients of the degree-``deg`` parts of all entries, in a fixed order."""
    mons = list(monomials(nv, deg))
    out = []
    for M in (l1, l2):
        for r in M:
            for x in r:
                for mon in mons:
                    out.append(x.coefficient(mon))
    # lower-degree parts must already vanish; include them too for safety
    for M in (l1, l2):
        for r in M:
            for x in r:
                for dd in range(deg):
                    for mon in monomials(nv, dd):
                        out.append(x.coefficient(mon))
    return out


def germ_omega_h(spec: OmegaHSpec) -> GeneratedGerm:
    """Germ g = -eps Re-part of H with parallel J (= i) and U, eps U^2 = Id, JU = -UJ."""
    dl = spec.delta
    if spec.epsilon not in (-1, 1):
        raise UsageError("epsilon must be -1 or +1")
    if spec.epsilon == -1 and spec.p is not None and not 0 <= spec.p <= dl:
        raise UsageError(f"p must lie in [0, {dl}]")
    if spec.jet_order < 2:
        raise UsageError("omega_H jet order must be at least 2")
    m = 2 * dl
    K = spec.jet_order
    eps = spec.epsilon
    A, B, phi, kernels = solve_omega_h(spec)
    nv = 2 * m
    O = _omega0(dl)
    Oj = _const_jm(O, nv, K)
    # metric in the 2m complex / 4 dl real coordinates (x, y)
    gm = [[None] * (2 * m) for _ in range(2 * m)]
    for a in range(m):
        for b in range(m):
            gm[a][b] = -eps * A[a][b]
            gm[m + a][m + b] = -eps * A[a][b]
            gm[a][m + b] = -eps * B[a][b]
            gm[m + a][b] = eps * B[a][b]
    J = la.J_std(m)
    OA = _jm_mul_full(Oj, A, K)
    OB = _jm_mul_full(Oj, B, K)
    U = [[OA[a][b] for b in range(m)] + [OB[a][b] for b in range(m)] for a in range(m)] + \
        [[OB[a][b] for b in range(m)] + [-OA[a][b] for b in range(m)] for a in range(m)]
    params = {"delta": dl, "epsilon": eps, "p": spec.p, "complex": spec.complex, "jet_order": K,
              "kernel_dims": kernels}
    if not spec.complex:
        H0 = spec.base_point()
        p, q, _ = la.signature(la.block_diag(la.scale(-eps, H0), la.scale(-eps, H0)))
        germ = MetricGerm(d=2 * m, signature=(p, q), g=gm, kind="real", meta={"generator": "omega_h"}).validate()
        label = "(3)" if eps == -1 else "(3')"
        Ureal, Jreal = U, J
        wit = {"J": J}
    else:
        n = 2 * m
        germ = germ_from_holomorphic(gm, (n, n), {"generator": "omega_h_complex"}).validate()
        label = "(3C)"
        Jreal = la.block_diag(J, J)
        Ureal = realify_jet_matrix(U, n)
        wit = {"Jbar": germ.complex_structure, "J": Jreal}
    okJ, order = parallel_defect(germ, Jreal)
    okU, _ = parallel_defect(germ, Ureal)
    if not (okJ and okU):
        raise GermError(f"omega_H witnesses not parallel to order {order} (J ok={okJ}, U ok={okU})")
    U0 = [[x.constant_term() for x in r] for r in Ureal]
    wit["U"] = U0
    wit["U_jets"] = Ureal
    return GeneratedGerm(germ=germ, label=label, seed=spec.seed, params=params, witnesses=wit,
                         certified_order=order)


# further germs used by the identity suites ---------------------------------------------------------

def germ_pp_wave(n: int = 2, seed: int = 0, K: int = 4, symmetric: bool = False) -> GeneratedGerm:
    """2 du dv + sum dx_i^2 + f(u, x) du^2 with f quadratic in x.

    With constant coefficients (``symmetric``) this is a Cahen-Wallach germ:
    Ric is parallel and Ric^2 = 0. Otherwise the coefficients depend on u and
    the germ carries the parallel null vector d_v, so n != 0.
    Coordinates are (u, v, x_1..x_n).
    """
    rng = random.Random(seed)
    d = n + 2
    g = [[Jet.zero(d, K) for _ in range(d)] for _ in range(d)]
    g[0][1] = g[1][0] = Jet.constant(d, K, 1)
    for i in range(n):
        g[2 + i][2 + i] = Jet.constant(d, K, 1)
    f = Jet.zero(d, K)
    for i in range(n):
        for j in range(i, n):
            c = mpq(rng.randint(1, 3)) if i == j else (mpq(0) if symmetric else mpq(rng.randint(-2, 2)))
            mono = Jet.variable(d, K, 2 + i) * Jet.variable(d, K, 2 + j)
            f = f + mono * c
            if not symmetric:
                f = f + mono * Jet.variable(d, K, 0) * mpq(rng.randint(-2, 2)) \
                    + mono * Jet.variable(d, K, 0) * Jet.variable(d, K, 0) * mpq(rng.randint(-2, 2))
    g[0][0] = f
    germ = MetricGerm(d=d, signature=(n + 1, 1), g=g, kind="real", meta={"generator": "pp_wave"}).validate()
    N = la.zeros(d)
    # N = d_v (x) g(d_v, .) : N(d_u) = d_v
    N[1][0] = mpq(1)
    ok, order = parallel_defect(germ, N)
    if not ok:
        raise GermError("pp-wave witness N is not parallel (internal error)")
    return GeneratedGerm(germ=germ, label="(1)", seed=seed, params={"n": n, "K": K, "symmetric": symmetric},
                         witnesses={"N": N}, certified_order=order)


def germ_sphere(d: int = 3, K: int = 5) -> GeneratedGerm:
    """4|dx|^2 / (1 + |x|^2)^2 (round sphere, Einstein) as a jet."""
    r2 = Jet.zero(d, K)
    for i in range(d):
        r2 = r2 + Jet.variable(d, K, i) * Jet.variable(d, K, i)
    f = ((r2 + 1) * (r2 + 1)).invert() * 4
    g = [[f if i == j else Jet.zero(d, K) for j in range(d)] for i in range(d)]
    germ = MetricGerm(d=d, signature=(d, 0), g=g, kind="real", meta={"generator": "sphere"}).validate()
    return GeneratedGerm(germ=germ, label="(1)", seed=None, params={"d": d, "K": K})


# normal-form frames ---------------------------------------------------------------------------------

def normal_form_frames(label: str, p: int, q: int = 0, alternate: bool = False) -> Dict[str, la.Matrix]:
    """The matrices of the normal-form table in a well-chosen basis.

    ``p, q`` are the integers of the table (so d depends on the type).
    ``alternate`` selects the second gauge given for (2') and (3').
    """
    label = normalize_label(label)
    I, Ipq, J, L, bd = la.identity, la.I_pq, la.J_std, la.L_std, la.block_diag
    if label == "(1)":
        if p + q < 1:
            raise UsageError("type (1) needs p + q >= 1")
        return {"g": Ipq(p, q)}
    if label == "(1C)":
        _need(p >= 1 and q in (0, p), label)
        return {"g": Ipq(p, p), "Jbar": J(p)}
    if label == "(2)":
        _need(p + q >= 1, label)
        d = 2 * (p + q)
        return {"g": bd(Ipq(p, q), Ipq(p, q)), "J": J(d // 2)}
    if label == "(2')":
        _need(p >= 1 and q in (0, p), label)
        if alternate:
            return {"g": L(p), "L": Ipq(p, p)}
        return {"g": Ipq(p, p), "L": L(p)}
    if label == "(2C)":
        _need(p >= 1 and q in (0, p), label)
        Lm = Ipq(2 * p, 2 * p)
        Jb = bd(J(p), la.neg(J(p)))
        return {"g": L(2 * p), "L": Lm, "Jbar": Jb, "J": la.matmul(Lm, Jb)}
    if label == "(3)":
        _need(p + q >= 1, label)
        d = 4 * (p + q)
        D = Ipq(p, q)
        J2 = J(d // 2)
        J1 = bd(la.neg(J(d // 4)), J(d // 4))
        Z = la.zeros(d // 2)
        J3 = la.block([[Z, J(d // 4)], [J(d // 4), Z]])
        return {"g": bd(D, D, D, D), "J1": J1, "J2": J2, "J3": J3}
    if label == "(3')":
        _need(p >= 1 and q in (0, p), label)
        Z = la.zeros(2 * p)
        if alternate:
            Jm = la.block([[Z, J(p)], [J(p), Z]])
            L1 = Ipq(2 * p, 2 * p)
            return {"g": L(2 * p), "L1": L1, "J": Jm, "L2": la.matmul(Jm, L1)}
        return {"g": Ipq(2 * p, 2 * p), "L1": L(2 * p), "J": bd(la.neg(J(p)), J(p)),
                "L2": la.block([[Z, la.neg(J(p))], [J(p), Z]])}
    if label == "(3C)":
        _need(p >= 1 and q in (0, p), label)
        Z = la.zeros(4 * p)
        DJ = bd(J(p), J(p))
        return {"g": bd(Ipq(2 * p, 2 * p), la.neg(Ipq(2 * p, 2 * p))),
                "Jbar": bd(J(2 * p), J(2 * p)),
                "J": bd(J(p), J(p), la.neg(J(p)), la.neg(J(p))),
                "L1": L(4 * p),
                "L2": la.block([[Z, DJ], [la.neg(DJ), Z]])}
    raise UsageError(f"no normal form for {label}")


def _need(ok: bool, label: str):
    if not ok:
        raise UsageError(f"parameters not allowed for type {label}: sign(g) must be {SIGNATURE_RULES[label]}")


def find_gauge_change(std: Dict[str, la.Matrix], alt: Dict[str, la.Matrix], height: int = 2) -> Optional[la.Matrix]:
    """P with P^T g_alt P = g_std and P^{-1} A_alt P = A_std for every structure A.

    The intertwining conditions are linear in P; the metric condition is then
    searched over small rational combinations of the intertwiner basis.
    """
    d = len(std["g"])
    names = [k for k in std if k != "g"]
    rows = []
    for k in names:
        A, B = alt[k], std[k]
        # A P - P B = 0
        for i in range(d):
            for j in range(d):
                row = [mpq(0)] * (d * d)
                for t in range(d):
                    row[t * d + j] += A[i][t]
                    row[i * d + t] -= B[t][j]
                rows.append(row)
    basis = la.nullspace(rows, d * d) if rows else [[mpq(1) if i == j else mpq(0) for i in range(d * d)]
                                                    for j in range(d * d)]
    mats = [la.unflatten(v, d) for v in basis]
    vals = sorted({mpq(a, b) for a in range(-height, height + 1) for b in (1, 2)}, key=lambda x: (abs(x), x))
    for coeffs in itertools.product(vals, repeat=len(mats)):
        if not any(coeffs):
            continue
        P = la.lin_comb(list(coeffs), mats)
        if la.equal(la.matmul(la.matmul(la.transpose(P), alt["g"]), P), std["g"]):
            return P
    return None


# H + H negative control -------------------------------------------------------------------------------

def _quat_left(a) -> la.Matrix:
    """Matrix of x -> a x on H = R^4 (basis 1, i, j, k)."""
    a0, a1, a2, a3 = a
    return [[a0, -a1, -a2, -a3],
            [a1, a0, -a3, a2],
            [a2, a3, a0, -a1],
            [a3, -a2, a1, a0]]


def hh_forms(p: int = 1) -> List[la.Matrix]:
    """Gram matrices of the four real components of (x1, x2) -> conj(x1)^T x2 on H^p + H^p."""
    d = 8 * p
    out = []
    for comp in range(4):
        G = la.zeros(d)
        for s in range(p):
            # component comp of conj(x1_s) x2_s = sum_{a,b} x1_a x2_b <e_comp, conj(e_a) e_b>
            for a in range(4):
                ea_bar = [mpq(1) if t == 0 and a == 0 else (mpq(-1) if t == a else mpq(0)) for t in range(4)]
                Lm = _quat_left(ea_bar)
                for b in range(4):
                    c = Lm[comp][b]
                    if c:
                        i, j = 4 * s + a, 4 * p + 4 * s + b
                        G[i][j] += mpq(c, 2)
                        G[j][i] += mpq(c, 2)
        out.append(G)
    return out


def hh_negative_control(p: int = 1):
    """Generators of the Lie algebra preserving the H-valued form; returns (span, g0)."""
    from .holonomy import span_from_matrices
    forms = hh_forms(p)
    d = 8 * p
    rows = []
    for G in forms:
        # W^T G + G W = 0
        for i in range(d):
            for j in range(d):
                row = [mpq(0)] * (d * d)
                for k in range(d):
                    row[k * d + i] += G[k][j]
                    row[k * d + j] += G[i][k]
                rows.append(row)
    gens = [la.unflatten(v, d) for v in la.nullspace(rows, d * d)]
    for W in gens:
        for G in forms:
            if not la.is_zero(la.add(la.matmul(la.transpose(W), G), la.matmul(G, W))):
                raise AssertionError("H+H generator does not preserve the form")
    return span_from_matrices(d, gens, close=True), forms[0]


# expected holonomy dimensions and retry loop ------------------------------------------------------------

def expected_holonomy_dim(label: str, d: int) -> int:
    label = normalize_label(label)
    if label == "(1)":
        return d * (d - 1) // 2
    if label == "(1C)":
        n = d // 2
        return n * (n - 1)
    if label in ("(2)", "(2')"):
        return (d // 2) ** 2
    if label == "(2C)":
        return 2 * (d // 4) ** 2
    if label in ("(3)", "(3')"):
        k = d // 4
        return k * (2 * k + 1)
    if label == "(3C)":
        k = d // 8
        return 2 * k * (2 * k + 1)
    raise UsageError(label)


def generate(label: str, d: Optional[int] = None, signature: Optional[Tuple[int, int]] = None, seed: int = 0,
             K: Optional[int] = None) -> GeneratedGerm:
    """Germ of the requested type; ``d``/``signature`` follow the normal-form table."""
    label = normalize_label(label)
    defaults = {"(1)": 3, "(1C)": 6, "(2)": 4, "(2')": 4, "(2C)": 8, "(3)": 4, "(3')": 4, "(3C)": 8}
    if signature is not None:
        p, q = signature
        d = p + q if d is None else d
        if p + q != d:
            raise UsageError(f"signature ({p},{q}) does not add up to d={d}")
    else:
        d = defaults[label] if d is None else d
        p, q = {
            "(1)": (d, 0), "(1C)": (d // 2, d // 2), "(2)": (d, 0), "(2')": (d // 2, d // 2),
            "(2C)": (d // 2, d // 2), "(3)": (d, 0), "(3')": (d // 2, d // 2), "(3C)": (d // 2, d // 2),
        }[label]
    check_signature(label, p, q)
    if label == "(1)":
        return germ_type1(d, p, q, seed=seed, K=K or 4)
    if label == "(1C)":
        return germ_complex_riemannian(d // 2, seed=seed, K=K or 4)
    if label == "(2)":
        return germ_kaehler(p // 2, q // 2, seed=seed, K=K or 4)
    if label == "(2')":
        return germ_parakaehler(d // 2, seed=seed, K=K or 4)
    if label == "(2C)":
        return germ_complexified_kaehler(d // 4, seed=seed, K=K or 4)
    if label == "(3)":
        return germ_omega_h(OmegaHSpec(delta=d // 4, epsilon=-1, p=p // 4, jet_order=K or 4, seed=seed))
    if label == "(3')":
        return germ_omega_h(OmegaHSpec(delta=d // 4, epsilon=1, jet_order=K or 4, seed=seed))
    if label == "(3C)":
        return germ_omega_h(OmegaHSpec(delta=d // 8, epsilon=-1, complex=True, jet_order=K or 4, seed=seed))
    raise UsageError(label)


def generate_generic(label: str, d: Optional[int] = None, signature=None, seed: int = 0, K: Optional[int] = None,
                     retries: int = 5, holonomy_dim=None):
    """Resample until the holonomy dimension equals the expected generic value.

    ``holonomy_dim`` maps a GeneratedGerm to its holonomy dimension. Returns
    (germ, seeds tried, dims seen); the last germ is returned even on failure.
    """
    tried, dims = [], []
    gen = None
    for k in range(retries):
        s = seed + k
        gen = generate(label, d=d, signature=signature, seed=s, K=K)
        tried.append(s)
        if holonomy_dim is None:
            break
        hd = holonomy_dim(gen)
        dims.append(hd)
        if hd == expected_holonomy_dim(label, gen.germ.d):
            break
    return gen, tried, dims
