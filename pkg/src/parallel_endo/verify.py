"""Identity suites on a classified germ: quasi-commutation and the Ricci identities.

Everything is checked at the origin with exact arithmetic. A failing check keeps
the matrices that break it as a witness.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from gmpy2 import mpq

from . import linalg as la
from .geometry import (CurvatureAtOrigin, MetricGerm, christoffel, complex_bilinear_from_real,
                       connection_matrices, covariant_derivative_of_bilinear, holomorphic_ricci,
                       jm_is_zero, ricci_from_curvature, ricci_jets)
from .holonomy import (MatrixAlgebraWithInvolution, random_element, random_self_adjoint,
                       random_skew_adjoint)

HALF = mpq(1, 2)


@dataclass
class Check:
    name: str
    ok: Optional[bool]          # None = skipped
    samples: int = 0
    note: str = ""
    witness: Optional[dict] = None
    applicable: bool = True     # False: the hypothesis of the identity does not hold here

    @property
    def status(self) -> str:
        if self.ok is None:
            return "skipped" if self.applicable else "n/a"
        return "pass" if self.ok else "fail"

    def to_json(self):
        out = {"name": self.name, "status": self.status, "samples": self.samples}
        if self.note:
            out["note"] = self.note
        if self.witness:
            out["witness"] = self.witness
        return out


@dataclass
class VerificationReport:
    seed: int
    samples: int
    checks: List[Check] = field(default_factory=list)

    def extend(self, checks: Sequence[Check]):
        self.checks.extend(checks)

    def get(self, name: str) -> Optional[Check]:
        for c in self.checks:
            if c.name == name:
                return c
        return None

    @property
    def failed(self) -> List[Check]:
        return [c for c in self.checks if c.ok is False]

    @property
    def skipped(self) -> List[Check]:
        return [c for c in self.checks if c.status == "skipped"]

    def ok(self) -> bool:
        return not self.failed

    def to_json(self):
        return {"seed": self.seed, "samples": self.samples, "all_ok": self.ok(),
                "checks": [c.to_json() for c in self.checks]}


def _mj(m):
    return la.matrix_to_json(m)


def _in_span(vectors: Sequence[la.Vector], v: la.Vector, d: int) -> bool:
    if all(x == 0 for x in v):
        return True
    if not vectors:
        return False
    return la.rank([list(u) for u in vectors] + [list(v)]) == la.rank([list(u) for u in vectors])


def _columns(M: la.Matrix) -> List[la.Vector]:
    return [list(c) for c in zip(*M)]


def _structure_pool(structures: Optional[Dict[str, la.Matrix]], e: MatrixAlgebraWithInvolution, sign: int):
    """Named structures of the given adjointness (+1 self-adjoint, -1 skew)."""
    out = []
    for name, U in (structures or {}).items():
        if la.equal(e.adjoint(U), la.scale(sign, U)):
            out.append((name, U))
    return out


def curvature_slice(curv: CurvatureAtOrigin, a: int, b: int) -> la.Matrix:
    """Matrix of v -> R(e_a, v) e_b."""
    d = curv.d
    return [[curv.R(a, v)[m][b] for v in range(d)] for m in range(d)]


# quasi-commutation -----------------------------------------------------------------

def check_pseudocommutation(curv: CurvatureAtOrigin, e: MatrixAlgebraWithInvolution, E0: Sequence[la.Vector],
                            n0: Sequence[la.Matrix] = (), structures=None, rng=None, samples: int = 8) -> List[Check]:
    """R(x,y)(UV - VU) = 0 for U self-adjoint; Im(UV - VU) in E0; UV = VU when E0 = 0."""
    rng = rng or random.Random(0)
    d = e.d
    Us = [("Id", la.identity(d))] + _structure_pool(structures, e, 1)
    Us += [(f"sample{k}", random_self_adjoint(e, rng)) for k in range(samples)]
    Vs = [("Id", la.identity(d))] + list((structures or {}).items())
    Vs += [(f"sample{k}", random_element(e, rng)) for k in range(samples)]
    Rs = [curv.R(i, j) for i in range(d) for j in range(i + 1, d)]
    ech = la.Echelon(d * d)
    for N in n0:
        ech.add(la.flatten(N))
    bad_r = bad_im = bad_c = bad_n0 = None
    n = 0
    for un, U in Us:
        for vn, V in Vs:
            C = la.commutator(U, V)
            n += 1
            if bad_r is None and any(not la.is_zero(la.matmul(R, C)) for R in Rs):
                bad_r = {"U": un, "V": vn, "UV-VU": _mj(C)}
            if bad_im is None and not all(_in_span(E0, col, d) for col in _columns(C)):
                bad_im = {"U": un, "V": vn, "UV-VU": _mj(C)}
            if bad_n0 is None and not ech.contains(la.flatten(C)):
                bad_n0 = {"U": un, "V": vn, "UV-VU": _mj(C)}
            if not E0 and bad_c is None and not la.is_zero(C):
                bad_c = {"U": un, "V": vn, "UV-VU": _mj(C)}
    out = [
        Check("pseudocommutation R(x,y)(UV-VU)=0", bad_r is None, n, witness=bad_r),
        Check("pseudocommutation Im(UV-VU) in E0", bad_im is None, n, witness=bad_im),
        Check("pseudocommutation UV-VU in n0", bad_n0 is None, n, witness=bad_n0),
    ]
    if not E0:
        out.append(Check("pseudocommutation E0=0 => UV=VU", bad_c is None, n, witness=bad_c))
    else:
        out.append(Check("pseudocommutation E0=0 => UV=VU", None, 0, note="E0 is nonzero", applicable=False))
    return out


# Ricci, self-adjoint part ------------------------------------------------------------

def _ricci_selfadjoint_one(curv, ric, U):
    """First failing (a, b, reason) for ric(a,Ub) = ric(Ua,b) = tr(U R(a,.)b) and [U, R(a,.)b] = 0."""
    d = curv.d
    rU = la.matmul(ric, U)
    Ur = la.matmul(la.transpose(U), ric)
    for a in range(d):
        for b in range(d):
            M = curvature_slice(curv, a, b)
            t = la.trace(la.matmul(U, M))
            if rU[a][b] != Ur[a][b] or rU[a][b] != t:
                return {"a": a, "b": b, "ric(a,Ub)": str(rU[a][b]), "ric(Ua,b)": str(Ur[a][b]),
                        "tr(U R(a,.)b)": str(t)}
            if not la.is_zero(la.commutator(U, M)):
                return {"a": a, "b": b, "reason": "U does not commute with R(a,.)b"}
    return None


def check_ricci_selfadjoint(curv: CurvatureAtOrigin, ric: la.Matrix, e: MatrixAlgebraWithInvolution,
                            n_basis: Sequence[la.Matrix] = (), structures=None, germ: Optional[MetricGerm] = None,
                            rng=None, samples: int = 8) -> List[Check]:
    rng = rng or random.Random(1)
    d = e.d
    Us = [("Id", la.identity(d))] + _structure_pool(structures, e, 1)
    Us += [(f"sample{k}", random_self_adjoint(e, rng)) for k in range(samples)]
    bad = None
    for name, U in Us:
        w = _ricci_selfadjoint_one(curv, ric, U)
        if w is not None:
            bad = dict(w, U=name)
            break
    out = [Check("ricci (i)(a) ric(a,Ub)=ric(Ua,b)=tr(U R(a,.)b)", bad is None, len(Us), witness=bad)]
    # (i)(c): nilpotent self-adjoint elements of the radical
    n_plus = [m for m in (la.scale(HALF, la.add(N, e.adjoint(N))) for N in n_basis) if not la.is_zero(m)]
    if n_plus:
        bad = None
        for k, N in enumerate(n_plus):
            if not la.is_zero(la.matmul(ric, N)):
                bad = {"N": _mj(N), "ric": _mj(ric)}
                break
        if bad is None and la.det(ric) != 0:
            bad = {"reason": "ric is nondegenerate"}
        out.append(Check("ricci (i)(c) Im N in ker ric", bad is None, len(n_plus), witness=bad))
    else:
        out.append(Check("ricci (i)(c) Im N in ker ric", None, 0, note="no nonzero self-adjoint nilpotent", applicable=False))
    out.append(check_complex_ricci(germ, ric))
    return out


def check_complex_ricci(germ: Optional[MetricGerm], ric: la.Matrix) -> Check:
    """ric_C = ric - i ric(., Jbar .) against the Ricci of the holomorphic metric."""
    name = "ricci (i)(b) complex Ricci matches holomorphic oracle"
    if germ is None or germ.kind != "complex" or germ.holomorphic is None:
        return Check(name, None, 0, note="no holomorphic description of the germ", applicable=False)
    if germ.K < 2:
        return Check(name, None, 0, note="jet order too low")
    n = germ.d // 2
    oracle = holomorphic_ricci(germ.holomorphic)
    real_side = complex_bilinear_from_real(ric, n)
    # the real trace of a complex-linear map is twice the real part of its complex trace,
    # so ric - i ric(., Jbar .) equals the holomorphic Ricci with the real-trace normalization
    ok = la.equal(la.scale(2, oracle), real_side)
    wit = None if ok else {"holomorphic": _mj(oracle), "from_real": _mj(real_side)}
    return Check(name, ok, 1, note="ric - i ric(., Jbar .) = 2 ric_C (complex trace)", witness=wit)


# Ricci, skew-adjoint part -------------------------------------------------------------

def _ricci_skew_one(curv, ric, U):
    d = curv.d
    rU = la.matmul(ric, U)
    Ur = la.matmul(la.transpose(U), ric)
    for a in range(d):
        for b in range(d):
            t = HALF * la.trace(la.matmul(U, curv.R(a, b)))
            if rU[a][b] != -Ur[a][b] or rU[a][b] != t:
                return {"a": a, "b": b, "ric(a,Ub)": str(rU[a][b]), "ric(Ua,b)": str(Ur[a][b]),
                        "tr(U R(a,b))/2": str(t)}
    return None


def check_ricci_skewadjoint(curv: CurvatureAtOrigin, ric: la.Matrix, e: MatrixAlgebraWithInvolution,
                            n_basis: Sequence[la.Matrix] = (), structures=None, rng=None,
                            samples: int = 8) -> List[Check]:
    rng = rng or random.Random(2)
    d = e.d
    named = _structure_pool(structures, e, -1)
    Us = named + [(f"sample{k}", random_skew_adjoint(e, rng)) for k in range(samples)]
    Us = [(nm, U) for nm, U in Us if not la.is_zero(U)]
    out = []
    if not Us:
        out.append(Check("ricci (ii)(a) ric(a,Ub)=-ric(Ua,b)=tr(U R(a,b))/2", None, 0, note="e has no skew part", applicable=False))
    else:
        bad = None
        for name, U in Us:
            w = _ricci_skew_one(curv, ric, U)
            if w is not None:
                bad = dict(w, U=name)
                break
        out.append(Check("ricci (ii)(a) ric(a,Ub)=-ric(Ua,b)=tr(U R(a,b))/2", bad is None, len(Us), witness=bad))
    # (ii)(b)
    n_minus = [m for m in (la.scale(HALF, la.sub(N, e.adjoint(N))) for N in n_basis) if not la.is_zero(m)]
    if n_minus:
        bad = None
        for N in n_minus:
            if not la.is_zero(la.matmul(ric, N)):
                bad = {"N": _mj(N), "ric": _mj(ric)}
                break
        if bad is None and la.det(ric) != 0:
            bad = {"reason": "ric is nondegenerate"}
        out.append(Check("ricci (ii)(b) Im N in ker ric", bad is None, len(n_minus), witness=bad))
    else:
        out.append(Check("ricci (ii)(b) Im N in ker ric", None, 0, note="no nonzero skew nilpotent", applicable=False))
    # (ii)(c)
    if len(Us) >= 2:
        bad = None
        n = 0
        for i, (an, A) in enumerate(Us):
            for bn, B in Us[i + 1:]:
                n += 1
                if not la.is_zero(la.matmul(ric, la.commutator(A, B))):
                    bad = {"U": an, "V": bn}
                    break
            if bad:
                break
        out.append(Check("ricci (ii)(c) Im(UV-VU) in ker ric", bad is None, n, witness=bad))
    else:
        out.append(Check("ricci (ii)(c) Im(UV-VU) in ker ric", None, 0, note="fewer than two skew elements", applicable=False))
    # anticommuting invertible pairs force ric = 0
    pairs = []
    for i, (an, A) in enumerate(named):
        for bn, B in named[i + 1:]:
            if la.det(A) != 0 and la.det(B) != 0 and la.is_zero(la.anticommutator(A, B)):
                pairs.append((an, bn))
    if pairs:
        ok = la.is_zero(ric)
        out.append(Check("ricci (ii)(c) anticommuting invertible pair => ric=0", ok, len(pairs),
                         note="pairs: " + ", ".join(f"{a}/{b}" for a, b in pairs),
                         witness=None if ok else {"ric": _mj(ric)}))
    else:
        out.append(Check("ricci (ii)(c) anticommuting invertible pair => ric=0", None, 0,
                         note="no anticommuting invertible skew structures", applicable=False))
    return out


# Ricci operator ------------------------------------------------------------------------

def ricci_is_parallel(germ: MetricGerm, gam=None):
    """(D ric = 0 to order K-3, order) or (None, reason) when the jets are too short."""
    if germ.K < 3:
        return None, "jet order too low to test D ric"
    G = connection_matrices(gam if gam is not None else christoffel(germ))
    ricj = ricci_jets(germ)
    Dric = covariant_derivative_of_bilinear(ricj, G)
    return all(jm_is_zero(m) for m in Dric), germ.K - 3


def check_ricci_operator(germ: MetricGerm, ric: la.Matrix, gam=None) -> Check:
    """If D ric = 0: Ric is semi-simple (square-free min-poly part irreducible) or Ric^2 = 0."""
    name = "ricci operator semi-simple or 2-step nilpotent"
    par, order = ricci_is_parallel(germ, gam)
    if par is None:
        return Check(name, None, 0, note=order)
    if not par:
        return Check(name, None, 0, note=f"D ric != 0 at jet order {order}; hypothesis unmet", applicable=False)
    Ric = la.matmul(la.inverse(germ.g0()), ric)
    if la.is_zero(Ric):
        return Check(name, True, 1, note=f"ric = 0 (D ric = 0 to order {order})")
    if la.det(Ric) == 0:
        ok = la.is_zero(la.matmul(Ric, Ric))
        return Check(name, ok, 1, note=f"nilpotent branch, D ric = 0 to order {order}",
                     witness=None if ok else {"Ric": _mj(Ric)})
    facs = la.factor_rational_poly(la.minimal_polynomial(Ric))
    ok = len(facs) == 1
    return Check(name, ok, 1, note=f"semi-simple branch, D ric = 0 to order {order}",
                 witness=None if ok else {"Ric": _mj(Ric), "factors": [[str(c) for c in f] for f, _ in facs]})


# full suite ----------------------------------------------------------------------------------

def run_suite(germ: Optional[MetricGerm], curv: CurvatureAtOrigin, e: MatrixAlgebraWithInvolution,
              n_basis: Sequence[la.Matrix], E0: Sequence[la.Vector], n0: Sequence[la.Matrix] = (),
              structures=None, seed: int = 0, samples: int = 8, gam=None) -> VerificationReport:
    rep = VerificationReport(seed=seed, samples=samples)
    ric = ricci_from_curvature(curv)
    rep.extend(check_pseudocommutation(curv, e, E0, n0, structures, random.Random(seed), samples))
    rep.extend(check_ricci_selfadjoint(curv, ric, e, n_basis, structures, germ, random.Random(seed + 1), samples))
    rep.extend(check_ricci_skewadjoint(curv, ric, e, n_basis, structures, random.Random(seed + 2), samples))
    if germ is not None:
        rep.checks.append(check_ricci_operator(germ, ric, gam))
    return rep
