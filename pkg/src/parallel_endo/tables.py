"""Machine-checked versions of the structure tables.

table1: generator relations on the normal-form matrices (both gauges where two are given).
table2: the normal forms themselves: signature rule, fingerprint of the algebra they generate,
        and the explicit basis change between alternate gauges.
table3: the parallel-tensor catalog instantiated on the normal forms.
types_row: holonomy dimension of generated germs against the group of the types row.
"""
from __future__ import annotations

import random
from typing import Dict, List, Optional

from gmpy2 import mpq

from . import linalg as la
from .endoalgebra import LABELS, StructureSet, check_relations, classify, fingerprint, parallel_tensor_catalog
from .generators import (SIGNATURE_RULES, expected_holonomy_dim, find_gauge_change, generate,
                         normal_form_frames)
from .holonomy import MatrixAlgebraWithInvolution

# (label, p, q) instances of the normal forms, smallest first
INSTANCES = {
    "(1)": [(2, 0), (1, 1), (2, 1)],
    "(1C)": [(1, 1), (2, 2)],
    "(2)": [(1, 0), (1, 1), (2, 0)],
    "(2')": [(1, 1), (2, 2)],
    "(2C)": [(1, 1)],
    "(3)": [(1, 0), (1, 1)],
    "(3')": [(1, 1)],
    "(3C)": [(1, 1)],
}

ALTERNATE = ("(2')", "(3')")

GROUPS = {
    "(1)": "SO0(p,q)", "(1C)": "SO(p,C)", "(2)": "U(p,q)", "(2')": "GL0(p,R)",
    "(2C)": "GL(p,C)", "(3)": "Sp(p,q)", "(3')": "Sp(2p,R)", "(3C)": "Sp(2p,C)",
}


def group_dim(label: str, p: int, q: int = 0) -> int:
    """Real dimension of the group of the types row, from its own parameters."""
    if label == "(1)":
        n = p + q
        return n * (n - 1) // 2
    if label == "(1C)":
        return p * (p - 1)
    if label == "(2)":
        return (p + q) ** 2
    if label == "(2')":
        return p * p
    if label == "(2C)":
        return 2 * p * p
    if label == "(3)":
        n = p + q
        return n * (2 * n + 1)
    if label == "(3')":
        return p * (2 * p + 1)
    if label == "(3C)":
        return 2 * p * (2 * p + 1)
    raise ValueError(label)


def group_params(label: str, d: int, sig) -> tuple:
    """(p, q) of the types-row group for a germ of dimension d and signature sig."""
    P, Q = sig
    return {
        "(1)": (P, Q), "(1C)": (d // 2, 0), "(2)": (P // 2, Q // 2), "(2')": (d // 2, 0),
        "(2C)": (d // 4, 0), "(3)": (P // 4, Q // 4), "(3')": (d // 4, 0), "(3C)": (d // 8, 0),
    }[label]


def generated_algebra(d: int, mats: List[la.Matrix], g0: la.Matrix) -> MatrixAlgebraWithInvolution:
    """Unital algebra generated by ``mats`` (closure under products)."""
    ech = la.Echelon(d * d)
    basis = []
    for m in [la.identity(d)] + list(mats):
        if ech.add(la.flatten(m)):
            basis.append(m)
    start = 0
    while start < len(basis):
        end = len(basis)
        for a in range(end):
            for b in range(start, end):
                for c in (la.matmul(basis[a], basis[b]), la.matmul(basis[b], basis[a])):
                    if ech.add(la.flatten(c)):
                        basis.append(c)
        start = end
    return MatrixAlgebraWithInvolution(d=d, basis=basis, g0=g0)


def commutant_in_so(g0: la.Matrix, mats: List[la.Matrix]) -> int:
    """dim {X : X^T g + g X = 0, XA = AX for all A}."""
    d = len(g0)
    rows = []
    for i in range(d):
        for j in range(d):
            row = [mpq(0)] * (d * d)
            # (X^T g)_{ij} + (g X)_{ij} = sum_k X_ki g_kj + g_ik X_kj
            for k in range(d):
                row[k * d + i] += g0[k][j]
                row[k * d + j] += g0[i][k]
            rows.append(row)
    for A in mats:
        for i in range(d):
            for j in range(d):
                row = [mpq(0)] * (d * d)
                for t in range(d):
                    row[i * d + t] += A[t][j]
                    row[t * d + j] -= A[i][t]
                rows.append(row)
    return d * d - la.rank(rows)


def _structures(frames: Dict[str, la.Matrix]) -> Dict[str, la.Matrix]:
    return {k: v for k, v in frames.items() if k != "g"}


def _sig_ok(label: str, g: la.Matrix) -> bool:
    from .generators import check_signature, UsageError
    p, q, z = la.signature(g)
    if z:
        return False
    try:
        check_signature(label, p, q)
    except UsageError:
        return False
    return True


def table1() -> dict:
    rows = []
    for label in LABELS:
        for p, q in INSTANCES[label]:
            for alt in ((False, True) if label in ALTERNATE else (False,)):
                fr = normal_form_frames(label, p, q, alternate=alt)
                rels = check_relations(label, _structures(fr), fr["g"])
                rows.append({"label": label, "p": p, "q": q, "gauge": "alternate" if alt else "standard",
                             "d": len(fr["g"]), "relations": [{"relation": r, "ok": ok} for r, ok in rels],
                             "ok": all(ok for _, ok in rels)})
    return {"table": "1", "rows": rows, "ok": all(r["ok"] for r in rows)}


def table2() -> dict:
    rows = []
    for label in LABELS:
        for p, q in INSTANCES[label]:
            fr = normal_form_frames(label, p, q)
            d = len(fr["g"])
            e = generated_algebra(d, list(_structures(fr).values()), fr["g"])
            fp = fingerprint(e, [])
            got = classify(fp)
            row = {"label": label, "p": p, "q": q, "d": d, "signature_rule": SIGNATURE_RULES[label],
                   "signature": list(la.signature(fr["g"])[:2]), "signature_ok": _sig_ok(label, fr["g"]),
                   "algebra_dim": e.dim, "fingerprint": fp.to_json(), "classified_as": got,
                   "fingerprint_ok": got == label}
            if label in ALTERNATE:
                alt = normal_form_frames(label, p, q, alternate=True)
                P = find_gauge_change(fr, alt)
                ok = P is not None and la.det(P) != 0
                if ok:
                    Pinv = la.inverse(P)
                    ok = la.equal(la.matmul(la.matmul(la.transpose(P), alt["g"]), P), fr["g"]) and all(
                        la.equal(la.matmul(la.matmul(Pinv, alt[k]), P), fr[k]) for k in _structures(fr))
                row["alternate_gauge_equivalent"] = ok
                if P is not None:
                    row["basis_change"] = la.matrix_to_json(P)
            row["ok"] = row["signature_ok"] and row["fingerprint_ok"] and row.get("alternate_gauge_equivalent", True)
            rows.append(row)
    return {"table": "2", "rows": rows, "ok": all(r["ok"] for r in rows)}


def table3(seed: int = 0) -> dict:
    rows = []
    for label in LABELS:
        p, q = INSTANCES[label][0]
        fr = normal_form_frames(label, p, q)
        d = len(fr["g"])
        mats = _structures(fr)
        e = generated_algebra(d, list(mats.values()), fr["g"])
        st = StructureSet(label=label, mats=mats)
        entries = parallel_tensor_catalog(e, [], st, random.Random(seed))
        rows.append({"label": label, "p": p, "q": q, "d": d, "entries": entries,
                     "ok": bool(entries) and all(x["ok"] for x in entries)})
    return {"table": "3", "rows": rows, "ok": all(r["ok"] for r in rows)}


def types_row(seed: int = 0, deriv_order: Optional[int] = None, labels=None) -> dict:
    """Holonomy dimension of a generated germ vs the group of the types row.

    The group dimension comes from its own formula, from the commutant of s in so(g)
    on the normal form, and from the generated germ's holonomy span.
    """
    from .geometry import curvature
    from .holonomy import holonomy_span

    rows = []
    for label in labels or LABELS:
        gen = generate(label, seed=seed)
        germ = gen.germ
        top = germ.K - 2 if deriv_order is None else min(deriv_order, germ.K - 2)
        h = holonomy_span(curvature(germ, top))
        gp, gq = group_params(label, germ.d, germ.signature)
        gdim = group_dim(label, gp, gq)
        # the normal form with the same table parameters as the germ
        fr = normal_form_frames(label, gp, gq)
        nf_comm = commutant_in_so(fr["g"], list(_structures(fr).values()))
        nf_group = group_dim(label, *group_params(label, len(fr["g"]), la.signature(fr["g"])[:2]))
        rows.append({"label": label, "group": GROUPS[label], "group_params": [gp, gq], "d": germ.d,
                     "signature": list(germ.signature), "group_dim": gdim,
                     "expected_generic": expected_holonomy_dim(label, germ.d), "holonomy_dim": h.dim,
                     "stabilized": h.stabilized, "normal_form_d": len(fr["g"]),
                     "normal_form_commutant_in_so": nf_comm, "normal_form_group_dim": nf_group,
                     "ok": h.dim == gdim and nf_comm == nf_group})
    return {"table": "types_row", "rows": rows, "ok": all(r["ok"] for r in rows)}


def build(which: str, seed: int = 0, deriv_order: Optional[int] = None) -> dict:
    which = str(which)
    if which == "1":
        return table1()
    if which == "2":
        return table2()
    if which == "3":
        return table3(seed)
    if which in ("types_row", "types"):
        return types_row(seed, deriv_order)
    raise ValueError(f"unknown table {which!r}; choose 1, 2, 3 or types_row")
