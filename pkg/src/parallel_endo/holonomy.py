"""Infinitesimal holonomy span, fixed space E0, commutant and the ideal n0."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from gmpy2 import mpq

from . import linalg as la
from .geometry import CurvatureAtOrigin


class ConsistencyError(RuntimeError):
    """An internal identity that must hold on genuine germs failed."""


@dataclass
class MatrixSpan:
    d: int
    basis: List[la.Matrix]
    bracket_closed: bool = False
    added_per_order: List[int] = field(default_factory=list)
    order_reached: int = -1
    stabilized: bool = False
    orders_computed: int = -1

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, m: la.Matrix) -> bool:
        e = la.Echelon(self.d * self.d)
        for b in self.basis:
            e.add(la.flatten(b))
        return e.contains(la.flatten(m))


def _canonical_basis(mats: Sequence[la.Matrix], d: int) -> List[la.Matrix]:
    if not mats:
        return []
    r, _ = la.rref([la.flatten(m) for m in mats])
    return [la.unflatten(v, d) for v in r]


def bracket_closure(d: int, mats: List[la.Matrix], echelon: Optional[la.Echelon] = None) -> List[la.Matrix]:
    """Smallest Lie-bracket-closed span containing ``mats`` (returns a basis)."""
    if echelon is None:
        echelon = la.Echelon(d * d)
        basis = []
        for m in mats:
            if echelon.add(la.flatten(m)):
                basis.append(m)
    else:
        basis = list(mats)
    start = 0
    while start < len(basis):
        new_from = len(basis)
        for a in range(start, new_from):
            for b in range(a):
                c = la.commutator(basis[a], basis[b])
                if echelon.add(la.flatten(c)):
                    basis.append(c)
        if len(basis) == new_from:
            break
        start = new_from
    return basis


def holonomy_span(curv: CurvatureAtOrigin, upto: Optional[int] = None, window: int = 2) -> MatrixSpan:
    """Span of (D^k R)(e_i, e_j; ...) at 0 for k <= upto, closed under brackets.

    The span is tracked order by order; ``order_reached`` is the last order
    that contributed a new direction and ``stabilized`` says whether at least
    ``window`` later orders were computed and added nothing.
    """
    d = curv.d
    top = curv.max_deriv if upto is None else min(upto, curv.max_deriv)
    ech = la.Echelon(d * d)
    basis: List[la.Matrix] = []
    added = []
    for k in range(top + 1):
        before = len(basis)
        for key in sorted(curv.derivs[k]):
            m = curv.derivs[k][key]
            if la.is_zero(m):
                continue
            if ech.add(la.flatten(m)):
                basis.append(m)
        # the bracket closure of lower orders is part of the running span
        basis = bracket_closure(d, basis, ech)
        added.append(len(basis) - before)
    last = max((k for k, a in enumerate(added) if a), default=-1)
    stabilized = (top - last) >= window
    return MatrixSpan(d=d, basis=_canonical_basis(basis, d), bracket_closed=True,
                      added_per_order=added, order_reached=last, stabilized=stabilized,
                      orders_computed=top)


def span_from_matrices(d: int, mats: Sequence[la.Matrix], close: bool = True) -> MatrixSpan:
    """MatrixSpan from user-supplied generators (the non-germ path)."""
    basis = bracket_closure(d, list(mats)) if close else [mats[i] for i in la.independent_subset([la.flatten(m) for m in mats])]
    return MatrixSpan(d=d, basis=_canonical_basis(basis, d), bracket_closed=close)


def fixed_space(h: MatrixSpan, g0: Optional[la.Matrix] = None):
    """E0 = intersection of ker W; returns (basis, isotropic flag, warning)."""
    d = h.d
    if not h.basis:
        basis = [[mpq(1) if i == j else mpq(0) for i in range(d)] for j in range(d)]
    else:
        rows = [r for W in h.basis for r in W]
        basis = la.nullspace(rows, d)
    isotropic = True
    warning = None
    if g0 is not None and basis:
        for u in basis:
            gu = la.matvec(g0, u)
            for v in basis:
                if sum((a * b for a, b in zip(gu, v)), mpq(0)) != 0:
                    isotropic = False
                    break
            if not isotropic:
                break
        if not isotropic:
            warning = "decomposable germ: E0 is not totally isotropic"
    return basis, isotropic, warning


@dataclass
class MatrixAlgebraWithInvolution:
    d: int
    basis: List[la.Matrix]
    g0: la.Matrix
    g0inv: la.Matrix = None

    def __post_init__(self):
        if self.g0inv is None:
            self.g0inv = la.inverse(self.g0)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def adjoint(self, U: la.Matrix) -> la.Matrix:
        return adjoint(U, self.g0, self.g0inv)

    def coords(self, U: la.Matrix):
        return la.coordinates([la.flatten(b) for b in self.basis], la.flatten(U))

    def contains(self, U: la.Matrix) -> bool:
        return self.coords(U) is not None

    def element(self, coeffs) -> la.Matrix:
        return la.lin_comb(coeffs, self.basis)

    def is_product_closed(self) -> bool:
        e = la.Echelon(self.d * self.d)
        for b in self.basis:
            e.add(la.flatten(b))
        return all(e.contains(la.flatten(la.matmul(a, b))) for a in self.basis for b in self.basis)

    def is_sigma_stable(self) -> bool:
        e = la.Echelon(self.d * self.d)
        for b in self.basis:
            e.add(la.flatten(b))
        return all(e.contains(la.flatten(self.adjoint(b))) for b in self.basis)

    def contains_identity(self) -> bool:
        return self.contains(la.identity(self.d))

    def self_adjoint_part(self) -> List[la.Matrix]:
        """Basis of e+ = {U in e : U* = U}."""
        return self._eigen_part(+1)

    def skew_adjoint_part(self) -> List[la.Matrix]:
        return self._eigen_part(-1)

    def _eigen_part(self, sign: int) -> List[la.Matrix]:
        mats = [la.add(b, la.scale(sign, self.adjoint(b))) for b in self.basis]
        keep = la.independent_subset([la.flatten(m) for m in mats])
        return _canonical_basis([mats[i] for i in keep], self.d)


def adjoint(U: la.Matrix, g0: la.Matrix, g0inv: Optional[la.Matrix] = None) -> la.Matrix:
    """g-adjoint U* = g0^{-1} U^T g0."""
    if g0inv is None:
        g0inv = la.inverse(g0)
    return la.matmul(la.matmul(g0inv, la.transpose(U)), g0)


def commutant(h: MatrixSpan, g0: la.Matrix, verify: bool = True) -> MatrixAlgebraWithInvolution:
    """{U : UW = WU for all W in h} by the stacked Sylvester system."""
    d = h.d
    n = d * d
    rows = []
    for W in h.basis:
        for i in range(d):
            for j in range(d):
                # (UW - WU)[i][j] = sum_k U[i][k] W[k][j] - W[i][k] U[k][j]
                row = [mpq(0)] * n
                for k in range(d):
                    if W[k][j]:
                        row[i * d + k] = row[i * d + k] + W[k][j]
                    if W[i][k]:
                        row[k * d + j] = row[k * d + j] - W[i][k]
                if any(row):
                    rows.append(row)
    if rows:
        r, _ = la.rref(rows)
        vecs = la.nullspace(r)
    else:
        vecs = la.nullspace([], n)
    # canonical basis of the solution space
    basis = _canonical_basis([la.unflatten(v, d) for v in vecs], d)
    e = MatrixAlgebraWithInvolution(d=d, basis=basis, g0=g0)
    if verify:
        for U in basis:
            for W in h.basis:
                if not la.is_zero(la.commutator(U, W)):
                    raise ConsistencyError("commutant element fails to commute")
        if not e.is_sigma_stable():
            raise ConsistencyError("commutant is not stable under g-adjunction")
        if not e.contains_identity():
            raise ConsistencyError("commutant does not contain Id")
    return e


def n0_ideal(e: MatrixAlgebraWithInvolution, E0: Sequence[la.Vector]) -> List[la.Matrix]:
    """n0 = {N in e : Im N subset E0}; checks n0^2 = 0 and sigma(n0) = n0."""
    d = e.d
    if not E0:
        return []
    # functionals vanishing on E0
    ann = la.nullspace([list(v) for v in E0], d)
    if not ann:
        cand = list(e.basis)
    else:
        # C N = 0 with N = sum c_a B_a, as a linear system in c
        rows = []
        for f in ann:
            for col in range(d):
                rows.append([sum((f[k] * B[k][col] for k in range(d)), mpq(0)) for B in e.basis])
        sol = la.nullspace(rows, e.dim)
        cand = [e.element(c) for c in sol]
    basis = _canonical_basis(cand, d)
    for a in basis:
        for b in basis:
            if not la.is_zero(la.matmul(a, b)):
                raise ConsistencyError("n0 is not square-zero")
    ech = la.Echelon(d * d)
    for b in basis:
        ech.add(la.flatten(b))
    for b in basis:
        if not ech.contains(la.flatten(e.adjoint(b))):
            raise ConsistencyError("n0 is not self-adjoint")
    return basis


def random_element(e: MatrixAlgebraWithInvolution, rng: random.Random, lo: int = -3, hi: int = 3) -> la.Matrix:
    return e.element([mpq(rng.randint(lo, hi)) for _ in range(e.dim)])


def random_self_adjoint(e: MatrixAlgebraWithInvolution, rng: random.Random) -> la.Matrix:
    x = random_element(e, rng)
    return la.scale(mpq(1, 2), la.add(x, e.adjoint(x)))


def random_skew_adjoint(e: MatrixAlgebraWithInvolution, rng: random.Random) -> la.Matrix:
    x = random_element(e, rng)
    return la.scale(mpq(1, 2), la.sub(x, e.adjoint(x)))


def decomposability_probe(e: MatrixAlgebraWithInvolution, rng: random.Random, samples: int = 4) -> dict:
    """Self-adjoint elements of e of an indecomposable germ have min-poly Q^a.

    Returns the first witness with two distinct irreducible factors, if any.
    """
    for _ in range(samples):
        U = random_self_adjoint(e, rng)
        mu = la.minimal_polynomial(U)
        facs = la.factor_rational_poly(mu)
        if len(facs) > 1:
            return {"decomposable": True, "witness": U, "factors": [f for f, _ in facs]}
    return {"decomposable": False}
